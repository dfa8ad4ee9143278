//! The relation between two points: equal, collinear, symplectic, special or
//! opposite, plus the per-point opposition bitsets used by the searches.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::geometry::{Geometry, Kind, LineId, PointId, UNREACHABLE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("relations are not defined for geometries of kind {0:?}")]
    Unsupported(Kind),
    #[error("points {0} and {1} are in different components")]
    Unreachable(PointId, PointId),
}

/// Relations ordered by increasing distance: `0 < 1 < 3/2 < 2 < 3`.
///
/// `NearOpposite` marks a pair in a Grassmannian at distance at least 3 that
/// is not opposite in the building; it sits between `Special` and `Opposite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairRelation {
    Equal,
    Collinear,
    Symplectic,
    Special,
    NearOpposite,
    Opposite,
}

impl PairRelation {
    pub const ALL: [PairRelation; 6] = [
        PairRelation::Equal,
        PairRelation::Collinear,
        PairRelation::Symplectic,
        PairRelation::Special,
        PairRelation::NearOpposite,
        PairRelation::Opposite,
    ];

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    #[inline]
    pub fn from_code(c: u8) -> PairRelation {
        Self::ALL[c as usize]
    }

    /// The numeric value in half units: 0, 2, 3, 4, 6 (`NearOpposite` is 5).
    pub fn halves(self) -> u8 {
        [0, 2, 3, 4, 5, 6][self as usize]
    }

    /// `0 ↔ 3`, `1 ↔ 2`, `3/2` fixed.
    pub fn dual(self) -> PairRelation {
        match self {
            PairRelation::Equal => PairRelation::Opposite,
            PairRelation::Opposite => PairRelation::Equal,
            PairRelation::Collinear => PairRelation::Special,
            PairRelation::Special => PairRelation::Collinear,
            other => other,
        }
    }

    pub fn symbol(self) -> &'static str {
        ["0", "1", "3/2", "2", "3*", "3"][self as usize]
    }

    pub fn name(self) -> &'static str {
        ["equal", "collinear", "symplectic", "special", "near-opposite", "opposite"][self as usize]
    }
}

impl fmt::Display for PairRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for PairRelation {
    type Err = String;

    fn from_str(s: &str) -> Result<PairRelation, String> {
        Self::ALL
            .into_iter()
            .find(|r| r.symbol() == s || r.name() == s)
            .ok_or_else(|| format!("unknown relation {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Model {
    Hexagon,
    /// Opposite means non-collinear: quadrangles and polar spaces.
    Polar,
    /// Every pair collinear (projective planes).
    Plane,
    Grassmannian,
}

fn model_of(g: &Geometry) -> Result<Model, RelationError> {
    match g.kind() {
        Kind::GeneralizedPolygon(6) => Ok(Model::Hexagon),
        Kind::GeneralizedPolygon(4) | Kind::PolarSpace(_) => Ok(Model::Polar),
        Kind::GeneralizedPolygon(3) => Ok(Model::Plane),
        Kind::Grassmannian if g.parent().is_some() => Ok(Model::Grassmannian),
        k => Err(RelationError::Unsupported(k)),
    }
}

/// `L ∩ M^⊥ = ∅` and `M ∩ L^⊥ = ∅` for point sets of a polar space.
pub fn opposite_subspaces(p: &Geometry, a: &[PointId], b: &[PointId]) -> bool {
    let pb = p.perp_of(b.iter().copied());
    if a.iter().any(|&x| pb.contains(x as usize)) {
        return false;
    }
    let pa = p.perp_of(a.iter().copied());
    !b.iter().any(|&y| pa.contains(y as usize))
}

pub fn opposite_lines_polar(p: &Geometry, l: LineId, m: LineId) -> bool {
    opposite_subspaces(p, p.line_points(l), p.line_points(m))
}

/// Classifier for one geometry. Precomputes what the per-pair test needs.
pub struct Classifier<'g> {
    g: &'g Geometry,
    model: Model,
    /// For Grassmannians: `X^⊥` in the parent for every parent line `X`.
    parent_perps: Vec<BitSet>,
}

impl<'g> Classifier<'g> {
    pub fn new(g: &'g Geometry) -> Result<Classifier<'g>, RelationError> {
        let model = model_of(g)?;
        let mut parent_perps = Vec::new();
        if model == Model::Grassmannian {
            let p = g.parent().unwrap();
            parent_perps = p.lines().iter().map(|l| p.perp_of(l.iter().copied())).collect();
        }
        if matches!(model, Model::Hexagon | Model::Grassmannian) {
            g.distances();
        }
        Ok(Classifier { g, model, parent_perps })
    }

    pub fn geometry(&self) -> &'g Geometry {
        self.g
    }

    /// Building opposition of two Grassmannian points (parent lines).
    fn grass_opposite(&self, x: PointId, y: PointId) -> bool {
        let p = self.g.parent().unwrap();
        !p.line_set(x).intersects(&self.parent_perps[y as usize])
            && !p.line_set(y).intersects(&self.parent_perps[x as usize])
    }

    pub fn classify(&self, x: PointId, y: PointId) -> PairRelation {
        let g = self.g;
        if x == y {
            return PairRelation::Equal;
        }
        if g.collinear(x, y) {
            return PairRelation::Collinear;
        }
        match self.model {
            Model::Plane | Model::Polar => PairRelation::Opposite,
            Model::Hexagon => match g.distance_raw(x, y) {
                2 => self.distance_two(x, y),
                _ => PairRelation::Opposite,
            },
            Model::Grassmannian => {
                if self.grass_opposite(x, y) {
                    PairRelation::Opposite
                } else if g.distance_raw(x, y) == 2 {
                    self.distance_two(x, y)
                } else {
                    PairRelation::NearOpposite
                }
            }
        }
    }

    fn distance_two(&self, x: PointId, y: PointId) -> PairRelation {
        if self.g.perp(x).and_count(self.g.perp(y)) == 1 {
            PairRelation::Special
        } else {
            PairRelation::Symplectic
        }
    }

    fn row(&self, x: PointId) -> Vec<u8> {
        (0..self.g.point_count() as PointId).map(|y| self.classify(x, y).code()).collect()
    }
}

/// Pair relation by direct classification, without a table.
pub fn classify_pair(g: &Geometry, x: PointId, y: PointId) -> Result<PairRelation, RelationError> {
    let model = model_of(g)?;
    if matches!(model, Model::Hexagon | Model::Grassmannian) && g.distance_raw(x, y) == UNREACHABLE {
        return Err(RelationError::Unreachable(x, y));
    }
    Ok(Classifier::new(g)?.classify(x, y))
}

pub fn opposite_points_polygon(g: &Geometry, x: PointId, y: PointId) -> bool {
    matches!(classify_pair(g, x, y), Ok(PairRelation::Opposite))
}

pub const EAGER_LIMIT: usize = 2000;

/// All pair relations, one memoized row per point.
pub struct RelationTable<'g> {
    classifier: Classifier<'g>,
    rows: Vec<OnceLock<Vec<u8>>>,
}

impl<'g> RelationTable<'g> {
    /// Rows are filled up front (in parallel) when the geometry has at most
    /// [`EAGER_LIMIT`] points, and on first access otherwise.
    pub fn new(g: &'g Geometry) -> Result<RelationTable<'g>, RelationError> {
        let classifier = Classifier::new(g)?;
        let n = g.point_count();
        let table = RelationTable { classifier, rows: (0..n).map(|_| OnceLock::new()).collect() };
        if n <= EAGER_LIMIT {
            table.rows.par_iter().enumerate().for_each(|(x, r)| {
                r.get_or_init(|| table.classifier.row(x as PointId));
            });
        }
        Ok(table)
    }

    pub fn geometry(&self) -> &'g Geometry {
        self.classifier.g
    }

    pub fn classifier(&self) -> &Classifier<'g> {
        &self.classifier
    }

    pub fn row(&self, x: PointId) -> &[u8] {
        self.rows[x as usize].get_or_init(|| self.classifier.row(x))
    }

    #[inline]
    pub fn get(&self, x: PointId, y: PointId) -> PairRelation {
        PairRelation::from_code(self.row(x)[y as usize])
    }

    /// The unique common neighbour of a special pair.
    pub fn special_center(&self, x: PointId, y: PointId) -> Option<PointId> {
        if self.get(x, y) != PairRelation::Special {
            return None;
        }
        let g = self.geometry();
        g.perp(x).and(g.perp(y)).first().map(|c| c as PointId)
    }

    /// Points in relation `r` to `x`, as a bitset.
    pub fn relation_set(&self, x: PointId, r: PairRelation) -> BitSet {
        let row = self.row(x);
        BitSet::from_iter_with_len(row.len(), (0..row.len()).filter(|&y| row[y] == r.code()))
    }

    pub fn census(&self) -> RelationCensus {
        let n = self.geometry().point_count();
        let mut counts = [0u64; 6];
        let mut opposite_sizes = Vec::with_capacity(n);
        let mut near = Vec::new();
        for x in 0..n {
            let row = self.row(x as PointId);
            opposite_sizes.push(row.iter().filter(|&&c| c == PairRelation::Opposite.code()).count());
            for (y, &c) in row.iter().enumerate().skip(x + 1) {
                counts[c as usize] += 1;
                if c == PairRelation::NearOpposite.code() && near.len() < 100 {
                    near.push((x as PointId, y as PointId));
                }
            }
        }
        RelationCensus {
            equal: n as u64,
            collinear: counts[1],
            symplectic: counts[2],
            special: counts[3],
            near_opposite: counts[4],
            opposite: counts[5],
            opposite_set_sizes: opposite_sizes,
            near_opposite_examples: near,
        }
    }
}

/// Counts over unordered pairs of distinct points (`equal` counts the diagonal).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCensus {
    pub equal: u64,
    pub collinear: u64,
    pub symplectic: u64,
    pub special: u64,
    pub near_opposite: u64,
    pub opposite: u64,
    pub opposite_set_sizes: Vec<usize>,
    pub near_opposite_examples: Vec<(PointId, PointId)>,
}

/// `p^≡` and its complement for every point.
#[derive(Debug, Clone)]
pub struct OppositionSets {
    pub opp: Vec<BitSet>,
    pub nopp: Vec<BitSet>,
}

impl OppositionSets {
    pub fn from_table(t: &RelationTable<'_>) -> OppositionSets {
        let n = t.geometry().point_count();
        let opp: Vec<BitSet> = (0..n as PointId)
            .into_par_iter()
            .map(|x| t.relation_set(x, PairRelation::Opposite))
            .collect();
        let nopp = opp.iter().map(|s| s.complement()).collect();
        OppositionSets { opp, nopp }
    }

    pub fn new(g: &Geometry) -> Result<OppositionSets, RelationError> {
        Ok(Self::from_table(&RelationTable::new(g)?))
    }

    pub fn len(&self) -> usize {
        self.opp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opp.is_empty()
    }

    #[inline]
    pub fn opposite(&self, x: PointId, y: PointId) -> bool {
        self.opp[x as usize].contains(y as usize)
    }

    /// Points opposite every member of `s`.
    pub fn common_opposites(&self, s: &[PointId]) -> BitSet {
        let mut acc = BitSet::full(self.len());
        for &p in s {
            acc.intersect_with(&self.opp[p as usize]);
        }
        acc
    }

    pub fn common_opposite(&self, s: &[PointId]) -> Option<PointId> {
        self.common_opposites(s).first().map(|p| p as PointId)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{split_cayley_hexagon, symplectic};

    #[test]
    fn relation_order_and_duals() {
        use PairRelation::*;
        assert!(Equal < Collinear && Collinear < Symplectic && Symplectic < Special && Special < Opposite);
        for r in PairRelation::ALL {
            assert_eq!(r.dual().dual(), r);
            assert_eq!(r.symbol().parse::<PairRelation>().unwrap(), r);
        }
        assert_eq!(Symplectic.dual(), Symplectic);
    }

    #[test]
    fn hexagon_relations() {
        let h = split_cayley_hexagon(2).unwrap();
        let t = RelationTable::new(&h).unwrap();
        let c = t.census();
        assert_eq!(c.symplectic, 0);
        assert_eq!(c.near_opposite, 0);
        assert!(c.opposite_set_sizes.iter().all(|&s| s == 32));
        for x in 0..63 {
            for y in 0..63 {
                assert_eq!(t.get(x, y), t.get(y, x));
            }
        }
        let l = h.line_points(0);
        assert_eq!(t.get(l[0], l[1]), PairRelation::Collinear);
    }

    #[test]
    fn quadrangle_relations() {
        let w = symplectic(3, 2).unwrap();
        let o = OppositionSets::new(&w).unwrap();
        assert!(o.opp.iter().all(|s| s.count() == 8));
        assert!(!o.opposite(3, 3));
        // a line blocks
        assert_eq!(o.common_opposite(w.line_points(0)), None);
    }

    #[test]
    fn lines_of_a_quadrangle() {
        let w = symplectic(3, 2).unwrap();
        assert!(!opposite_lines_polar(&w, 0, 0));
        let p = w.line_points(0)[0];
        let through = w.lines_through(p);
        assert!(!opposite_lines_polar(&w, through[0], through[1]));
        let disjoint_opposite = (0..15).filter(|&m| opposite_lines_polar(&w, 0, m)).count();
        // lines of W(3,2) opposite a given one: 15 - 1 - 3*2 concurrent
        assert_eq!(disjoint_opposite, 8);
    }

    #[test]
    fn unsupported_kind() {
        let g = crate::construct::pg(3, 2).unwrap();
        assert!(matches!(RelationTable::new(&g), Err(RelationError::Unsupported(Kind::Other))));
    }
}
