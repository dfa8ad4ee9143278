//! Exact divisibility conditions on the order of a generalized hexagon.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexOrder {
    pub s: u64,
    pub t: u64,
}

impl HexOrder {
    pub fn new(s: u64, t: u64) -> HexOrder {
        HexOrder { s, t }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeasibilityError {
    #[error("st = {0} is not a perfect square")]
    NotSquare(BigUint),
}

fn st(o: HexOrder) -> BigUint {
    BigUint::from(o.s) * BigUint::from(o.t)
}

/// Exact square root, if there is one.
fn exact_sqrt(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

pub fn st_square_check(o: HexOrder) -> bool {
    exact_sqrt(&st(o)).is_some()
}

/// `st(1+s+t+st)(1 ± √st + st) / (2(s + t ± √st))` as numerator and denominator.
pub fn multiplicity(o: HexOrder, plus: bool) -> Result<(BigUint, BigUint), FeasibilityError> {
    let st = st(o);
    let r = exact_sqrt(&st).ok_or_else(|| FeasibilityError::NotSquare(st.clone()))?;
    let (s, t) = (BigUint::from(o.s), BigUint::from(o.t));
    let one = BigUint::from(1u8);
    let a = &one + &s + &t + &st;
    // s + t > √st always, so the minus-sign variants stay positive.
    let (b, d) = if plus { (&one + &r + &st, &s + &t + &r) } else { (&one + &st - &r, &s + &t - &r) };
    Ok((&st * a * b, d * 2u8))
}

fn integral(o: HexOrder, plus: bool) -> Result<bool, FeasibilityError> {
    let (num, den) = multiplicity(o, plus)?;
    Ok(!den.is_zero() && num.is_multiple_of(&den))
}

/// Integrality of the plus- and minus-sign multiplicities.
pub fn multiplicity_integrality(o: HexOrder) -> Result<(bool, bool), FeasibilityError> {
    Ok((integral(o, true)?, integral(o, false)?))
}

pub fn feasible_hexagon_order(o: HexOrder) -> bool {
    matches!(multiplicity_integrality(o), Ok((true, true)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    StSquare,
    PlusIntegral,
    MinusIntegral,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub s: u64,
    pub t: u64,
    pub st_square: bool,
    pub plus_integral: Option<bool>,
    pub minus_integral: Option<bool>,
    pub feasible: bool,
    /// First condition that fails, in the order square, plus, minus.
    pub failed: Option<Condition>,
}

pub fn check_order(o: HexOrder) -> OrderCheck {
    let st_square = st_square_check(o);
    let (plus, minus) = match multiplicity_integrality(o) {
        Ok((p, m)) => (Some(p), Some(m)),
        Err(_) => (None, None),
    };
    let failed = if !st_square {
        Some(Condition::StSquare)
    } else if plus == Some(false) {
        Some(Condition::PlusIntegral)
    } else if minus == Some(false) {
        Some(Condition::MinusIntegral)
    } else {
        None
    };
    OrderCheck { s: o.s, t: o.t, st_square, plus_integral: plus, minus_integral: minus, feasible: failed.is_none(), failed }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonexReport {
    pub t_max: u64,
    pub checks: Vec<OrderCheck>,
    /// Values of `t` for which `(t + t², t)` passed every condition.
    pub falsifications: Vec<u64>,
}

impl NonexReport {
    pub fn all_excluded(&self) -> bool {
        self.falsifications.is_empty()
    }
}

/// Checks `(t + t², t)` for every `t` in `2..=t_max`.
pub fn verify_nonex(t_max: u64) -> NonexReport {
    let checks: Vec<OrderCheck> = (2..=t_max).map(|t| check_order(HexOrder::new(t + t * t, t))).collect();
    let falsifications = checks.iter().filter(|c| c.feasible).map(|c| c.t).collect();
    NonexReport { t_max, checks, falsifications }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squares() {
        assert!(st_square_check(HexOrder::new(2, 2)));
        assert!(st_square_check(HexOrder::new(8, 2)));
        assert!(!st_square_check(HexOrder::new(6, 2)));
        assert!(multiplicity_integrality(HexOrder::new(6, 2)).is_err());
    }

    #[test]
    fn known_orders() {
        for (s, t) in [(2, 2), (3, 3), (8, 2), (2, 8), (4, 4), (27, 3)] {
            assert!(feasible_hexagon_order(HexOrder::new(s, t)), "({s},{t})");
        }
        assert_eq!(multiplicity_integrality(HexOrder::new(2, 2)), Ok((true, true)));
        // 21 and 27 by hand.
        assert_eq!(multiplicity(HexOrder::new(2, 2), true).unwrap(), (BigUint::from(252u32), BigUint::from(12u32)));
        assert_eq!(multiplicity(HexOrder::new(2, 2), false).unwrap(), (BigUint::from(108u32), BigUint::from(4u32)));
    }

    #[test]
    fn case_240_15() {
        assert_eq!(multiplicity_integrality(HexOrder::new(240, 15)), Ok((true, false)));
        let (_, den) = multiplicity(HexOrder::new(240, 15), false).unwrap();
        assert!(den.is_multiple_of(&BigUint::from(13u8)));
        let c = check_order(HexOrder::new(240, 15));
        assert_eq!(c.failed, Some(Condition::MinusIntegral));
        assert!(!c.feasible);
    }

    #[test]
    fn nonex_small() {
        let r = verify_nonex(100);
        assert_eq!(r.checks.len(), 99);
        assert!(r.all_excluded());
        assert_eq!(r.checks[0].failed, Some(Condition::StSquare));
    }
}
