//! Coordinate models of the small geometries: projective spaces, classical
//! polar spaces, the split Cayley hexagon and the symplectic subquadrangle of
//! the Hermitian quadrangle. Every output is checked against its axiom system
//! before it is returned.

use std::collections::HashMap;

use thiserror::Error;

use crate::bitset::BitSet;
use crate::field::{Field, FieldError};
use crate::geometry::{Coordinates, Geometry, GeometryError, Kind, PointId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("form has Witt index {found}, expected {expected}")]
    WittIndex { expected: u32, found: u32 },
    #[error("validation failed: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolarFamily {
    Symplectic,
    OrthogonalParabolic,
    OrthogonalHyperbolic,
    OrthogonalElliptic,
    Hermitian,
}

impl PolarFamily {
    pub fn parse(s: &str) -> Option<PolarFamily> {
        Some(match s {
            "sp" | "symplectic" | "w" => PolarFamily::Symplectic,
            "q" | "parabolic" => PolarFamily::OrthogonalParabolic,
            "q+" | "hyperbolic" => PolarFamily::OrthogonalHyperbolic,
            "q-" | "elliptic" => PolarFamily::OrthogonalElliptic,
            "h" | "hermitian" => PolarFamily::Hermitian,
            _ => return None,
        })
    }
}

/// A classical polar space: family, ambient projective dimension and the
/// order of the coordinate field (for Hermitian spaces this is q²).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolarFormSpec {
    pub family: PolarFamily,
    pub dim: usize,
    pub q: usize,
}

impl PolarFormSpec {
    pub fn new(family: PolarFamily, dim: usize, q: usize) -> PolarFormSpec {
        PolarFormSpec { family, dim, q }
    }

    pub fn expected_rank(&self) -> Result<u32, ConstructError> {
        let d = self.dim;
        let bad = || ConstructError::Unsupported(format!("{:?} in dimension {d}", self.family));
        Ok(match self.family {
            PolarFamily::Symplectic | PolarFamily::OrthogonalHyperbolic if d % 2 == 1 => (d as u32 + 1) / 2,
            PolarFamily::OrthogonalParabolic if d % 2 == 0 => d as u32 / 2,
            PolarFamily::OrthogonalElliptic if d % 2 == 1 && d >= 3 => (d as u32 - 1) / 2,
            PolarFamily::Hermitian => (d as u32 + 1) / 2,
            _ => return Err(bad()),
        })
    }

    fn name(&self) -> String {
        let d = self.dim;
        match self.family {
            PolarFamily::Symplectic => format!("W({d},{})", self.q),
            PolarFamily::OrthogonalParabolic => format!("Q({d},{})", self.q),
            PolarFamily::OrthogonalHyperbolic => format!("Q+({d},{})", self.q),
            PolarFamily::OrthogonalElliptic => format!("Q-({d},{})", self.q),
            PolarFamily::Hermitian => format!("H({d},{})", self.q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HexagonVariant {
    SplitCayley,
    TwistedTriality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HexagonSpec {
    pub q: usize,
    pub variant: HexagonVariant,
}

/// The projective points of GF(q)^d with their lookup table.
struct ProjectivePoints {
    field: &'static Field,
    d: usize,
    vectors: Vec<Vec<u8>>,
    /// Base-q code of a normalized vector to its point id.
    index: Vec<u32>,
}

impl ProjectivePoints {
    fn new(field: &'static Field, d: usize, keep: impl Fn(&[u8]) -> bool) -> Result<ProjectivePoints, ConstructError> {
        let q = field.order();
        let total = q.checked_pow(d as u32).filter(|&t| t <= 1 << 24).ok_or_else(|| {
            ConstructError::Unsupported(format!("GF({q})^{d} is too large"))
        })?;
        let mut vectors = Vec::new();
        let mut index = vec![u32::MAX; total];
        let mut v = vec![0u8; d];
        // Lexicographic order with x0 most significant.
        for code in 0..total {
            let mut c = code;
            for i in (0..d).rev() {
                v[i] = (c % q) as u8;
                c /= q;
            }
            if v.iter().find(|&&x| x != 0) != Some(&1) || !keep(&v) {
                continue;
            }
            index[code] = vectors.len() as u32;
            vectors.push(v.clone());
        }
        Ok(ProjectivePoints { field, d, vectors, index })
    }

    fn code(&self, v: &[u8]) -> usize {
        let q = self.field.order();
        v.iter().fold(0, |acc, &x| acc * q + x as usize)
    }

    /// Point id of the projective point spanned by a nonzero vector.
    fn lookup(&self, v: &[u8]) -> Option<PointId> {
        let lead = *v.iter().find(|&&x| x != 0)?;
        let inv = self.field.inv_raw(lead);
        let normalized: Vec<u8> = v.iter().map(|&x| self.field.mul_raw(x, inv)).collect();
        let id = self.index[self.code(&normalized)];
        (id != u32::MAX).then_some(id)
    }

    /// Points on the line spanned by points `a` and `b`, or `None` if one of
    /// them is missing from the point set.
    fn line_through(&self, a: PointId, b: PointId) -> Option<Vec<PointId>> {
        let f = self.field;
        let (va, vb) = (&self.vectors[a as usize], &self.vectors[b as usize]);
        let mut out = vec![a];
        let mut w = vec![0u8; self.d];
        for lambda in 0..f.order() as u8 {
            for i in 0..self.d {
                w[i] = f.add_raw(vb[i], f.mul_raw(lambda, va[i]));
            }
            out.push(self.lookup(&w)?);
        }
        out.sort_unstable();
        Some(out)
    }

    fn coordinates(&self) -> Coordinates {
        Coordinates { q: self.field.order(), vectors: self.vectors.clone() }
    }
}

/// Lines spanned by pairs accepted by `joinable`, keeping only lines all of whose
/// points are present; each line is emitted once (from its two smallest points).
fn span_lines(pts: &ProjectivePoints, joinable: impl Fn(&[u8], &[u8]) -> bool) -> Vec<Vec<PointId>> {
    let n = pts.vectors.len();
    let mut lines = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !joinable(&pts.vectors[a], &pts.vectors[b]) {
                continue;
            }
            if let Some(l) = pts.line_through(a as PointId, b as PointId) {
                if l[0] == a as PointId && l[1] == b as PointId {
                    lines.push(l);
                }
            }
        }
    }
    lines
}

/// PG(n, q).
pub fn pg(n: usize, q: usize) -> Result<Geometry, ConstructError> {
    if n < 2 {
        return Err(ConstructError::Unsupported(format!("PG({n},{q}) needs n >= 2")));
    }
    let field = Field::of_order(q)?;
    let pts = ProjectivePoints::new(field, n + 1, |_| true)?;
    let lines = span_lines(&pts, |_, _| true);
    let kind = if n == 2 { Kind::GeneralizedPolygon(3) } else { Kind::Other };
    let g = Geometry::new(format!("PG({n},{q})"), kind, pts.vectors.len(), lines)?.with_coordinates(pts.coordinates());
    Ok(g)
}

/// The sesquilinear or bilinear form whose degenerate pairs are the collinear ones,
/// plus the singularity test on vectors.
struct Form {
    field: &'static Field,
    spec: PolarFormSpec,
    nu: u8,
    conj: u32,
}

impl Form {
    fn new(spec: PolarFormSpec) -> Result<Form, ConstructError> {
        let field = Field::of_order(spec.q)?;
        let mut conj = 0;
        if spec.family == PolarFamily::Hermitian {
            if field.degree() % 2 != 0 {
                return Err(ConstructError::Unsupported(format!("Hermitian form needs a square order, got {}", spec.q)));
            }
            conj = field.degree() as u32 / 2;
        }
        let mut nu = 0;
        if spec.family == PolarFamily::OrthogonalElliptic {
            nu = (0..field.order() as u8)
                .find(|&v| (0..field.order() as u8).all(|t| field.add_raw(field.add_raw(field.mul_raw(t, t), t), v) != 0))
                .ok_or_else(|| ConstructError::Unsupported("no irreducible x^2+x+v".into()))?;
        }
        Ok(Form { field, spec, nu, conj })
    }

    fn coords(&self) -> usize {
        self.spec.dim + 1
    }

    fn quad(&self, x: &[u8]) -> u8 {
        let f = self.field;
        let m = self.coords() / 2;
        let mut s = 0;
        for i in 0..m {
            s = f.add_raw(s, f.mul_raw(x[i], x[i + m]));
        }
        match self.spec.family {
            PolarFamily::OrthogonalParabolic => s = f.add_raw(s, f.mul_raw(x[2 * m], x[2 * m])),
            PolarFamily::OrthogonalElliptic => {
                // Hyperbolic part on the first 2m' coordinates, anisotropic plane at the end.
                let m = (self.coords() - 2) / 2;
                s = 0;
                for i in 0..m {
                    s = f.add_raw(s, f.mul_raw(x[i], x[i + m]));
                }
                let (u, v) = (x[2 * m], x[2 * m + 1]);
                let aniso = f.add_raw(f.add_raw(f.mul_raw(u, u), f.mul_raw(u, v)), f.mul_raw(self.nu, f.mul_raw(v, v)));
                s = f.add_raw(s, aniso);
            }
            _ => {}
        }
        s
    }

    fn is_singular(&self, x: &[u8]) -> bool {
        match self.spec.family {
            PolarFamily::Symplectic => true,
            PolarFamily::Hermitian => self.pair(x, x) == 0,
            _ => self.quad(x) == 0,
        }
    }

    /// The form evaluated on a pair; zero exactly when the points are perpendicular.
    fn pair(&self, x: &[u8], y: &[u8]) -> u8 {
        let f = self.field;
        let d = self.coords();
        match self.spec.family {
            PolarFamily::Symplectic => {
                let m = d / 2;
                let mut s = 0;
                for i in 0..m {
                    s = f.add_raw(s, f.sub_raw(f.mul_raw(x[i], y[i + m]), f.mul_raw(x[i + m], y[i])));
                }
                s
            }
            PolarFamily::Hermitian => {
                let mut s = 0;
                for i in 0..d {
                    s = f.add_raw(s, f.mul_raw(x[i], f.frobenius_raw(y[d - 1 - i], self.conj)));
                }
                s
            }
            _ => {
                // Polarization of the quadratic form.
                let sum: Vec<u8> = x.iter().zip(y).map(|(&a, &b)| f.add_raw(a, b)).collect();
                f.sub_raw(f.sub_raw(self.quad(&sum), self.quad(x)), self.quad(y))
            }
        }
    }
}

/// Greedy maximal singular subspace; all maximal ones have the same rank in a polar space.
fn polar_rank(g: &Geometry) -> u32 {
    if g.point_count() == 0 {
        return 0;
    }
    let mut s = BitSet::from_iter_with_len(g.point_count(), [0]);
    let mut rank = 1;
    loop {
        let mut perp = g.perp_of(s.iter().map(|p| p as PointId));
        perp.difference_with(&s);
        let Some(x) = perp.first() else { return rank };
        s.insert(x);
        s = g.subspace_closure(&s);
        rank += 1;
    }
}

pub fn polar_space(spec: PolarFormSpec) -> Result<Geometry, ConstructError> {
    let expected = spec.expected_rank()?;
    let form = Form::new(spec)?;
    let pts = ProjectivePoints::new(form.field, form.coords(), |v| form.is_singular(v))?;
    let lines = span_lines(&pts, |a, b| form.pair(a, b) == 0);
    let g = Geometry::new(spec.name(), Kind::PolarSpace(expected), pts.vectors.len(), lines)?
        .with_coordinates(pts.coordinates());
    let found = polar_rank(&g);
    if found != expected {
        return Err(ConstructError::WittIndex { expected, found });
    }
    if expected >= 2 {
        check_polar(&g)?;
    }
    Ok(g)
}

/// One-or-all axiom and properness of every `x^⊥`.
pub fn check_polar(g: &Geometry) -> Result<(), ConstructError> {
    if !g.satisfies_one_or_all() {
        return Err(ConstructError::Validation(format!("{} violates the one-or-all axiom", g.name())));
    }
    if (0..g.point_count()).any(|x| g.perp(x as PointId).count() == g.point_count()) {
        return Err(ConstructError::Validation(format!("{} has a point collinear to all points", g.name())));
    }
    Ok(())
}

/// Convenience names for the common polar spaces.
pub fn symplectic(dim: usize, q: usize) -> Result<Geometry, ConstructError> {
    polar_space(PolarFormSpec::new(PolarFamily::Symplectic, dim, q))
}

pub fn hyperbolic_quadric(dim: usize, q: usize) -> Result<Geometry, ConstructError> {
    polar_space(PolarFormSpec::new(PolarFamily::OrthogonalHyperbolic, dim, q))
}

pub fn hermitian(dim: usize, q2: usize) -> Result<Geometry, ConstructError> {
    polar_space(PolarFormSpec::new(PolarFamily::Hermitian, dim, q2))
}

/// The split Cayley hexagon H(q) on the quadric x0x4 + x1x5 + x2x6 = x3².
pub fn split_cayley_hexagon(q: usize) -> Result<Geometry, ConstructError> {
    let f = Field::of_order(q)?;
    let quad = |x: &[u8]| -> u8 {
        let mut s = 0;
        for (i, j) in [(0, 4), (1, 5), (2, 6)] {
            s = f.add_raw(s, f.mul_raw(x[i], x[j]));
        }
        f.sub_raw(s, f.mul_raw(x[3], x[3]))
    };
    let pts = ProjectivePoints::new(f, 7, |v| quad(v) == 0)?;
    let pl = |x: &[u8], y: &[u8], i: usize, j: usize| f.sub_raw(f.mul_raw(x[i], y[j]), f.mul_raw(x[j], y[i]));
    let conditions = [((1, 2), (3, 4)), ((5, 4), (3, 2)), ((2, 0), (3, 5)), ((6, 5), (3, 0)), ((0, 1), (3, 6)), ((4, 6), (3, 1))];
    let joinable = |x: &[u8], y: &[u8]| {
        let polar: Vec<u8> = x.iter().zip(y).map(|(&a, &b)| f.add_raw(a, b)).collect();
        quad(&polar) == 0
            && conditions.iter().all(|&((a, b), (c, d))| pl(x, y, a, b) == pl(x, y, c, d))
    };
    let lines = span_lines(&pts, joinable);
    let g = Geometry::new(format!("H({q})"), Kind::GeneralizedPolygon(6), pts.vectors.len(), lines)?
        .with_coordinates(pts.coordinates());
    if g.order() != Some((q, q)) || !g.is_generalized_polygon(6) {
        return Err(ConstructError::Validation(format!(
            "H({q}) failed the hexagon check: order {:?}, girth/diameter {:?}",
            g.order(),
            g.incidence_girth_diameter()
        )));
    }
    Ok(g)
}

pub fn hexagon(spec: HexagonSpec) -> Result<Geometry, ConstructError> {
    match spec.variant {
        HexagonVariant::SplitCayley => split_cayley_hexagon(spec.q),
        HexagonVariant::TwistedTriality => {
            Err(ConstructError::Unsupported("the twisted triality hexagon is not implemented".into()))
        }
    }
}

/// A geometry together with the ids of its points in an ambient geometry.
#[derive(Debug, Clone)]
pub struct SubGeometry {
    pub geometry: Geometry,
    /// `embedding[i]` is the ambient id of sub point `i`.
    pub embedding: Vec<PointId>,
}

impl SubGeometry {
    pub fn point_set(&self, ambient_n: usize) -> BitSet {
        BitSet::from_iter_with_len(ambient_n, self.embedding.iter().map(|&p| p as usize))
    }
}

/// Points of a Hermitian quadrangle H(3, q²) with all coordinates in GF(q),
/// with the ambient lines truncated to them.
pub fn hermitian_subquadrangle(h: &Geometry) -> Result<SubGeometry, ConstructError> {
    let coords = h
        .coordinates()
        .ok_or_else(|| ConstructError::Unsupported("geometry carries no coordinates".into()))?;
    let f = Field::of_order(coords.q)?;
    if f.degree() % 2 != 0 {
        return Err(ConstructError::Unsupported("ambient field has no quadratic subfield".into()));
    }
    let half = f.degree() as u32 / 2;
    let sub_q = (f.characteristic() as usize).pow(half);
    let embedding: Vec<PointId> = (0..h.point_count() as PointId)
        .filter(|&p| coords.vectors[p as usize].iter().all(|&x| f.frobenius_raw(x, half) == x))
        .collect();
    let local: HashMap<PointId, PointId> = embedding.iter().enumerate().map(|(i, &p)| (p, i as PointId)).collect();
    let mut lines = Vec::new();
    for l in h.lines() {
        let sub: Vec<PointId> = l.iter().filter_map(|p| local.get(p).copied()).collect();
        if sub.len() >= 2 {
            lines.push(sub);
        }
    }
    let vectors = embedding.iter().map(|&p| coords.vectors[p as usize].clone()).collect();
    let geometry = Geometry::new(format!("subGQ[{}]", h.name()), Kind::PolarSpace(2), embedding.len(), lines)?
        .with_coordinates(Coordinates { q: coords.q, vectors });
    if geometry.order() != Some((sub_q, sub_q)) || !geometry.is_generalized_polygon(4) {
        return Err(ConstructError::Validation(format!(
            "induced structure is not a GQ of order ({sub_q},{sub_q}); order {:?}",
            geometry.order()
        )));
    }
    Ok(SubGeometry { geometry, embedding })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Number of k-dimensional subspaces of GF(q)^n.
    fn gaussian(n: u32, k: u32, q: u64) -> u64 {
        let mut num = 1u64;
        let mut den = 1u64;
        for i in 0..k {
            num *= q.pow(n - i) - 1;
            den *= q.pow(i + 1) - 1;
        }
        num / den
    }

    #[test]
    fn projective_counts() {
        for (n, q) in [(2, 2), (3, 2), (2, 3), (2, 4), (4, 2), (3, 3)] {
            let g = pg(n, q).unwrap();
            assert_eq!(g.point_count() as u64, gaussian(n as u32 + 1, 1, q as u64));
            assert_eq!(g.line_count() as u64, gaussian(n as u32 + 1, 2, q as u64));
            assert!(g.validate().is_valid());
        }
        assert!(pg(2, 6).is_err());
        assert!(pg(1, 2).is_err());
    }

    #[test]
    fn point_normalization() {
        let g = pg(2, 3).unwrap();
        let c = g.coordinates().unwrap();
        assert_eq!(c.vectors[0], vec![0, 0, 1]);
        assert!(c.vectors.iter().all(|v| v.iter().find(|&&x| x != 0) == Some(&1)));
        assert!(c.vectors.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn polar_counts() {
        // (points, lines, rank, order) from the classical formulas
        let cases = [
            (PolarFamily::Symplectic, 3, 2, 15, 15, Some((2, 2))),
            (PolarFamily::Symplectic, 3, 3, 40, 40, Some((3, 3))),
            (PolarFamily::Symplectic, 5, 2, 63, 315, Some((2, 14))),
            (PolarFamily::OrthogonalParabolic, 4, 2, 15, 15, Some((2, 2))),
            (PolarFamily::OrthogonalParabolic, 4, 3, 40, 40, Some((3, 3))),
            (PolarFamily::OrthogonalHyperbolic, 3, 2, 9, 6, Some((2, 1))),
            (PolarFamily::OrthogonalHyperbolic, 5, 2, 35, 105, Some((2, 8))),
            (PolarFamily::OrthogonalElliptic, 5, 2, 27, 45, Some((2, 4))),
            (PolarFamily::Hermitian, 3, 4, 45, 27, Some((4, 2))),
        ];
        for (family, dim, q, np, nl, order) in cases {
            let g = polar_space(PolarFormSpec::new(family, dim, q)).unwrap();
            assert_eq!((g.point_count(), g.line_count(), g.order()), (np, nl, order), "{}", g.name());
        }
    }

    #[test]
    fn bad_polar_parameters() {
        assert!(polar_space(PolarFormSpec::new(PolarFamily::Symplectic, 4, 2)).is_err());
        assert!(polar_space(PolarFormSpec::new(PolarFamily::Hermitian, 3, 2)).is_err());
        assert!(polar_space(PolarFormSpec::new(PolarFamily::OrthogonalParabolic, 3, 2)).is_err());
    }

    #[test]
    fn split_cayley_small() {
        let h = split_cayley_hexagon(2).unwrap();
        assert_eq!((h.point_count(), h.line_count()), (63, 63));
        assert_eq!(h.incidence_girth_diameter().unwrap(), (12, 6));
    }

    #[test]
    fn subquadrangle_of_h34() {
        let h = hermitian(3, 4).unwrap();
        let sub = hermitian_subquadrangle(&h).unwrap();
        assert_eq!((sub.geometry.point_count(), sub.geometry.line_count()), (15, 15));
        for p in 0..15 {
            assert_eq!(sub.geometry.lines_through(p).len(), 3);
        }
    }
}
