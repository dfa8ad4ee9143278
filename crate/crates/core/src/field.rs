//! Exact arithmetic in the small finite fields GF(p^k), p^k <= 16.
//!
//! Elements are stored as the integer obtained by reading their coefficient
//! vector (constant term first) in base p, so in GF(4) with `g^2 = g + 1` the
//! generator `g` is `2` and `g + 1` is `3`. Every field carries full addition
//! and multiplication tables; all inner loops of the constructors use the raw
//! `u8` operations and only the public API goes through [`FieldElement`].

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

pub const MAX_ORDER: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("elements belong to different fields (GF({0}) vs GF({1}))")]
    Mismatch(usize, usize),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("unsupported field order {0}")]
    Unsupported(usize),
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("modulus is not monic of the stated degree")]
    BadModulus,
    #[error("modulus is reducible over GF({0})")]
    Reducible(u8),
    #[error("value {0} is out of range for GF({1})")]
    OutOfRange(u32, usize),
}

/// Characteristic, degree and defining polynomial of a finite field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub p: u8,
    pub k: u8,
    /// Monic modulus, constant term first, length `k + 1`.
    pub modulus: Vec<u8>,
}

impl FieldSpec {
    /// The fixed moduli used throughout: x^2+x+1, x^3+x+1, x^2+1, x^4+x+1.
    pub fn standard(q: usize) -> Result<FieldSpec, FieldError> {
        let (p, k, modulus): (u8, u8, Vec<u8>) = match q {
            2 | 3 | 5 | 7 | 11 | 13 => (q as u8, 1, vec![0, 1]),
            4 => (2, 2, vec![1, 1, 1]),
            8 => (2, 3, vec![1, 1, 0, 1]),
            9 => (3, 2, vec![1, 0, 1]),
            16 => (2, 4, vec![1, 1, 0, 0, 1]),
            _ => return Err(FieldError::Unsupported(q)),
        };
        Ok(FieldSpec { p, k, modulus })
    }

    pub fn order(&self) -> usize {
        (self.p as usize).pow(self.k as u32)
    }

    /// Validates primality of `p`, monicity, size bound and irreducibility.
    pub fn check(&self) -> Result<(), FieldError> {
        if !is_prime(self.p as u32) {
            return Err(FieldError::NotPrime(self.p as u32));
        }
        if self.k == 0 || self.modulus.len() != self.k as usize + 1 || self.modulus[self.k as usize] != 1 {
            return Err(FieldError::BadModulus);
        }
        if self.modulus.iter().any(|&c| c >= self.p) {
            return Err(FieldError::BadModulus);
        }
        if self.order() > MAX_ORDER {
            return Err(FieldError::Unsupported(self.order()));
        }
        if !is_irreducible(&self.modulus, self.p) {
            return Err(FieldError::Reducible(self.p));
        }
        Ok(())
    }
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Remainder of `a` modulo the monic polynomial `m` over GF(p).
fn poly_rem(a: &[u8], m: &[u8], p: u8) -> Vec<u8> {
    let mut r: Vec<u32> = a.iter().map(|&c| c as u32).collect();
    let p = p as u32;
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r.pop().unwrap() % p;
        if lead != 0 {
            let off = r.len() - dm;
            for (i, &mc) in m[..dm].iter().enumerate() {
                r[off + i] = (r[off + i] + (p - lead) * mc as u32) % p;
            }
        }
    }
    r.into_iter().map(|c| (c % p) as u8).collect()
}

/// Trial division by every monic polynomial of degree 1..=deg/2.
pub fn is_irreducible(modulus: &[u8], p: u8) -> bool {
    let deg = modulus.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as usize).pow(d as u32);
        for low in 0..count {
            let mut divisor = Vec::with_capacity(d + 1);
            let mut v = low;
            for _ in 0..d {
                divisor.push((v % p as usize) as u8);
                v /= p as usize;
            }
            divisor.push(1);
            if poly_rem(modulus, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// A finite field with precomputed operation tables.
pub struct Field {
    spec: FieldSpec,
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Field) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Field, FieldError> {
        spec.check()?;
        let q = spec.order();
        let p = spec.p as usize;
        let k = spec.k as usize;
        let digits = |v: usize| -> Vec<u8> {
            let mut out = vec![0u8; k];
            let mut v = v;
            for d in out.iter_mut() {
                *d = (v % p) as u8;
                v /= p;
            }
            out
        };
        let value = |c: &[u8]| -> u8 { c.iter().rev().fold(0usize, |acc, &d| acc * p + d as usize) as u8 };
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<u8> = da.iter().zip(&db).map(|(&x, &y)| ((x as usize + y as usize) % p) as u8).collect();
                add[a * q + b] = value(&sum);
                let mut prod = vec![0u8; 2 * k - 1];
                for (i, &x) in da.iter().enumerate() {
                    for (j, &y) in db.iter().enumerate() {
                        prod[i + j] = ((prod[i + j] as usize + x as usize * y as usize) % p) as u8;
                    }
                }
                let mut r = poly_rem(&prod, &spec.modulus, spec.p);
                r.resize(k, 0);
                mul[a * q + b] = value(&r);
            }
        }
        let mut neg = vec![0u8; q];
        let mut inv = vec![0u8; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u8;
            if a != 0 {
                inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).ok_or(FieldError::Reducible(spec.p))? as u8;
            }
        }
        Ok(Field { spec, q, add, mul, neg, inv })
    }

    /// The shared instance for the standard modulus of order `q`.
    pub fn of_order(q: usize) -> Result<&'static Field, FieldError> {
        static FIELDS: [OnceLock<Option<Field>>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
        if q > MAX_ORDER {
            return Err(FieldError::Unsupported(q));
        }
        FIELDS[q]
            .get_or_init(|| FieldSpec::standard(q).ok().and_then(|s| Field::new(s).ok()))
            .as_ref()
            .ok_or(FieldError::Unsupported(q))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> u8 {
        self.spec.p
    }

    pub fn degree(&self) -> u8 {
        self.spec.k
    }

    #[inline]
    pub fn add_raw(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn sub_raw(&self, a: u8, b: u8) -> u8 {
        self.add_raw(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul_raw(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn neg_raw(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    /// Inverse of a nonzero raw value; `inv_raw(0)` is 0.
    #[inline]
    pub fn inv_raw(&self, a: u8) -> u8 {
        self.inv[a as usize]
    }

    pub fn pow_raw(&self, a: u8, e: u64) -> u8 {
        let mut result = 1u8;
        let mut base = a;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul_raw(result, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        result
    }

    /// `a^(p^e)`.
    pub fn frobenius_raw(&self, a: u8, e: u32) -> u8 {
        let mut x = a;
        for _ in 0..e {
            x = self.pow_raw(x, self.spec.p as u64);
        }
        x
    }

    pub fn element(&self, value: u32) -> Result<FieldElement<'_>, FieldError> {
        if value as usize >= self.q {
            return Err(FieldError::OutOfRange(value, self.q));
        }
        Ok(FieldElement { field: self, value: value as u8 })
    }

    pub fn zero(&self) -> FieldElement<'_> {
        FieldElement { field: self, value: 0 }
    }

    pub fn one(&self) -> FieldElement<'_> {
        FieldElement { field: self, value: 1 }
    }

    /// The element `x` (the class of the indeterminate); for prime fields this is 0.
    pub fn generator(&self) -> FieldElement<'_> {
        let value = if self.spec.k == 1 { 0 } else { self.spec.p };
        FieldElement { field: self, value }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement<'_>> + '_ {
        (0..self.q as u8).map(move |value| FieldElement { field: self, value })
    }
}

/// An element of a specific field.
#[derive(Clone, Copy)]
pub struct FieldElement<'f> {
    field: &'f Field,
    value: u8,
}

impl fmt::Debug for FieldElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@GF({})", self.value, self.field.q)
    }
}

impl PartialEq for FieldElement<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.field == other.field
    }
}

impl Eq for FieldElement<'_> {}

impl<'f> FieldElement<'f> {
    pub fn field(&self) -> &'f Field {
        self.field
    }

    /// The serialized integer in `[0, q)`.
    pub fn value(&self) -> u8 {
        self.value
    }

    /// Coefficient vector over GF(p), constant term first.
    pub fn coefficients(&self) -> Vec<u8> {
        let p = self.field.spec.p;
        let mut v = self.value;
        (0..self.field.spec.k)
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::Mismatch(self.field.q, other.field.q))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(FieldElement { field: self.field, value: self.field.add_raw(self.value, other.value) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(FieldElement { field: self.field, value: self.field.sub_raw(self.value, other.value) })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(FieldElement { field: self.field, value: self.field.mul_raw(self.value, other.value) })
    }

    pub fn neg(&self) -> Self {
        FieldElement { field: self.field, value: self.field.neg_raw(self.value) }
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.value == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(FieldElement { field: self.field, value: self.field.inv_raw(self.value) })
    }

    pub fn pow(&self, e: u64) -> Self {
        FieldElement { field: self.field, value: self.field.pow_raw(self.value, e) }
    }

    /// `a^(p^e)`; with `k = 2e` this is the involution used by Hermitian forms.
    pub fn frobenius(&self, e: u32) -> Self {
        FieldElement { field: self.field, value: self.field.frobenius_raw(self.value, e) }
    }
}
