//! Mutual positions of line pairs as 4-tuples `(a, b, c, d)` over the point
//! relations, the 26-entry catalogue, Table 1 of combing successors, and the
//! two combing algorithms.
//!
//! A position is read off the `|L| × |M|` relation matrix (rows on `L`). All
//! catalogue entries fit one of two templates:
//!
//! * cross: entry `(x, y)` is `a`, the rest of row `x` is `b`, the rest of
//!   column `y` is `c`, everything else is `d`;
//! * matching: `a` on a perfect matching, `b` elsewhere (class II, `a = d`, `b = c`).
//!
//! Matching goes through the sorted row and column multisets, which separate
//! all 26 entries, and is then confirmed against the template itself.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Geometry, LineId, PointId};
use crate::relations::{PairRelation, RelationTable};

use PairRelation::{Collinear as C1, Equal as C0, Opposite as C3, Special as C2, Symplectic as H};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PositionTuple(pub [PairRelation; 4]);

impl PositionTuple {
    pub const EQUAL: PositionTuple = PositionTuple([C0, C1, C1, C0]);
    pub const OPPOSITE: PositionTuple = PositionTuple([C2, C3, C3, C2]);
    pub const LOCALLY_OPPOSITE: PositionTuple = PositionTuple([C0, C1, C1, C2]);

    pub fn inverse(self) -> PositionTuple {
        let [a, b, c, d] = self.0;
        PositionTuple([a, c, b, d])
    }

    /// `(a, b, c, d) ↦ (d*, b*, c*, a*)`. For the projection-homogeneous class
    /// the matched pair sits in the first and last slot, so a dual of that shape
    /// which is not in the catalogue is relabelled `(b, a, a, b)`.
    pub fn dual(self) -> PositionTuple {
        let [a, b, c, d] = self.0;
        let t = PositionTuple([d.dual(), b.dual(), c.dual(), a.dual()]);
        let [a, b, c, d] = t.0;
        if lookup(t).is_none() && a == d && b == c {
            return PositionTuple([b, a, a, b]);
        }
        t
    }

    pub fn is_integral(&self) -> bool {
        !self.0.contains(&PairRelation::Symplectic)
    }
}

impl fmt::Display for PositionTuple {
    /// `0112` when all entries are integers, `1 3/2 3/2 1` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.0.iter().map(|r| r.symbol()).collect();
        if self.is_integral() {
            f.write_str(&parts.concat())
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

impl FromStr for PositionTuple {
    type Err = String;

    fn from_str(s: &str) -> Result<PositionTuple, String> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let tokens: Vec<String> = if s.contains(' ') || s.contains(',') {
            s.split([' ', ',']).filter(|t| !t.is_empty()).map(str::to_string).collect()
        } else {
            s.chars().map(|c| c.to_string()).collect()
        };
        let rels: Vec<PairRelation> = tokens.iter().map(|t| t.parse()).collect::<Result<_, _>>()?;
        let arr: [PairRelation; 4] = rels.try_into().map_err(|_| format!("expected four entries in {s:?}"))?;
        Ok(PositionTuple(arr))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PositionClass {
    I,
    II,
    III,
    IV,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    Cross,
    Matching,
}

#[derive(Debug, Clone)]
pub struct CatalogueEntry {
    pub tuple: PositionTuple,
    pub class: PositionClass,
    /// Next position in Table 1; `None` for the opposite position.
    pub successor: Option<PositionTuple>,
    /// Table 1 row number.
    pub table_row: u8,
    /// Admissible local relations of `K` to `L` at the free point.
    pub local: &'static [PairRelation],
    pub k_not_unique: bool,
}

impl CatalogueEntry {
    pub fn template(&self) -> Template {
        if self.class == PositionClass::II {
            Template::Matching
        } else {
            Template::Cross
        }
    }
}

const fn t(a: PairRelation, b: PairRelation, c: PairRelation, d: PairRelation) -> PositionTuple {
    PositionTuple([a, b, c, d])
}

pub fn catalogue() -> &'static [CatalogueEntry] {
    static CAT: OnceLock<Vec<CatalogueEntry>> = OnceLock::new();
    CAT.get_or_init(|| {
        use PositionClass::*;
        // (tuple, class, successor, table row, local relation, K not unique)
        let rows: [(PositionTuple, PositionClass, Option<PositionTuple>, u8, &'static [PairRelation], bool); 26] = [
            (t(C0, C1, C1, C0), II, Some(t(C0, C1, C1, C2)), 1, &[C0], false),
            (t(C0, C1, C1, C1), III, Some(t(C1, C1, H, C2)), 2, &[C0, C1], true),
            (t(C0, C1, C1, H), III, Some(t(C1, H, C2, C2)), 3, &[C0], false),
            (t(C1, C1, C1, H), III, Some(t(C1, H, C2, C2)), 4, &[C1], false),
            (t(C1, H, H, C1), II, Some(t(C1, H, C2, C2)), 5, &[H], false),
            (t(C0, C1, C1, C2), III, Some(t(C1, C2, C2, C3)), 6, &[C0], false),
            (t(C1, H, C1, C2), IV, Some(t(C1, C2, C2, C3)), 7, &[C1], false),
            (t(C1, C1, H, C2), IV, Some(t(H, C2, C2, C3)), 8, &[C0], false),
            (t(C1, H, H, C2), III, Some(t(H, C2, C2, C3)), 9, &[C1], false),
            (t(C1, C2, H, C2), IV, Some(t(H, C2, C2, C3)), 10, &[H], false),
            (t(H, C2, C2, H), II, Some(t(H, C2, C2, C3)), 11, &[C1], false),
            (t(C1, C2, C2, C3), III, Some(t(C2, C3, C3, C2)), 12, &[C0], false),
            (t(C1, H, C2, C2), IV, Some(t(C2, C2, C2, C3)), 13, &[C0, C1], true),
            (t(H, C2, C2, C2), III, Some(t(C2, C2, C2, C3)), 14, &[C1, H], true),
            (t(H, C2, C2, C3), III, Some(t(C2, C3, C3, C2)), 15, &[C1], false),
            (t(C2, C2, C2, C3), III, Some(t(C2, C3, C3, C2)), 16, &[H], false),
            (t(C2, C3, C3, C2), II, None, 17, &[C2], false),
            (t(C1, C1, C1, C1), I, Some(t(C1, C1, H, C2)), 18, &[C1], true),
            (t(H, H, H, H), I, Some(t(H, H, C2, C2)), 19, &[C1], true),
            (t(C2, C2, C2, C2), I, Some(t(C2, C2, C2, C3)), 20, &[H], true),
            (t(C1, H, C1, H), IV, Some(t(C1, H, C2, C2)), 21, &[C1], false),
            (t(C1, C1, H, H), IV, Some(t(H, H, C2, C2)), 22, &[C0], false),
            (t(C1, H, H, H), III, Some(t(H, H, C2, C2)), 23, &[C1], true),
            (t(H, H, C2, C2), IV, Some(t(C2, C2, C2, C3)), 24, &[C1], true),
            (t(H, C2, H, C2), IV, Some(t(H, C2, C2, C3)), 25, &[H], false),
            (t(H, H, H, C2), III, Some(t(H, C2, C2, C3)), 26, &[C1], false),
        ];
        rows.into_iter()
            .map(|(tuple, class, successor, table_row, local, k_not_unique)| CatalogueEntry {
                tuple,
                class,
                successor,
                table_row,
                local,
                k_not_unique,
            })
            .collect()
    })
}

pub fn lookup(t: PositionTuple) -> Option<&'static CatalogueEntry> {
    catalogue().iter().find(|e| e.tuple == t)
}

/// Number of Table 1 arrows from `t` to the opposite position.
pub fn table_level(t: PositionTuple) -> Option<u32> {
    let mut cur = lookup(t)?;
    let mut level = 0;
    while let Some(next) = cur.successor {
        cur = lookup(next)?;
        level += 1;
        if level > 26 {
            return None;
        }
    }
    Some(level)
}

/// The template matrix of an entry on `k × k`, with the distinguished row and
/// column (or the matching) on the diagonal.
pub fn template_matrix(e: &CatalogueEntry, k: usize) -> Vec<PairRelation> {
    let [a, b, c, d] = e.tuple.0;
    let mut m = vec![d; k * k];
    for i in 0..k {
        for j in 0..k {
            m[i * k + j] = match e.template() {
                Template::Matching => {
                    if i == j {
                        a
                    } else {
                        b
                    }
                }
                Template::Cross => match (i == 0, j == 0) {
                    (true, true) => a,
                    (true, false) => b,
                    (false, true) => c,
                    (false, false) => d,
                },
            };
        }
    }
    m
}

/// Sorted row multisets followed by sorted column multisets.
fn signature(m: &[u8], k: usize) -> Vec<u8> {
    let mut rows: Vec<Vec<u8>> = (0..k)
        .map(|i| {
            let mut r = m[i * k..(i + 1) * k].to_vec();
            r.sort_unstable();
            r
        })
        .collect();
    let mut cols: Vec<Vec<u8>> = (0..k)
        .map(|j| {
            let mut c: Vec<u8> = (0..k).map(|i| m[i * k + j]).collect();
            c.sort_unstable();
            c
        })
        .collect();
    rows.sort_unstable();
    cols.sort_unstable();
    let mut out = rows.concat();
    out.push(u8::MAX);
    out.extend(cols.concat());
    out
}

/// Signature lookup for line size `k`; `Err` lists colliding entries.
pub fn signature_index(k: usize) -> Result<HashMap<Vec<u8>, usize>, (usize, usize)> {
    let mut map = HashMap::new();
    for (i, e) in catalogue().iter().enumerate() {
        let m: Vec<u8> = template_matrix(e, k).iter().map(|r| r.code()).collect();
        if let Some(j) = map.insert(signature(&m, k), i) {
            return Err((j, i));
        }
    }
    Ok(map)
}

fn fits(e: &CatalogueEntry, m: &[u8], k: usize) -> bool {
    let [a, b, c, d] = e.tuple.0.map(|r| r.code());
    match e.template() {
        Template::Matching => {
            // exactly one `a` per row and column, everything else `b`
            let rows_ok = (0..k).all(|i| m[i * k..(i + 1) * k].iter().filter(|&&v| v == a).count() == 1);
            let cols_ok = (0..k).all(|j| (0..k).filter(|&i| m[i * k + j] == a).count() == 1);
            rows_ok && cols_ok && m.iter().all(|&v| v == a || v == b)
        }
        Template::Cross => (0..k).any(|x| {
            (0..k).any(|y| {
                (0..k).all(|i| {
                    (0..k).all(|j| {
                        let want = match (i == x, j == y) {
                            (true, true) => a,
                            (true, false) => b,
                            (false, true) => c,
                            (false, false) => d,
                        };
                        m[i * k + j] == want
                    })
                })
            })
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Position {
    Catalogue(PositionTuple),
    /// The raw row-major relation matrix of a pair matching no entry.
    Miss(Vec<PairRelation>),
}

impl Position {
    pub fn tuple(&self) -> Option<PositionTuple> {
        match self {
            Position::Catalogue(t) => Some(*t),
            Position::Miss(_) => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PositionError {
    #[error("lines have different sizes or the geometry has no uniform line size")]
    LineSize,
    #[error("catalogue signatures collide for entries {0} and {1}")]
    SignatureCollision(usize, usize),
    #[error("lines {0} and {1} are in no catalogue position")]
    CatalogueMiss(LineId, LineId),
    #[error("line {1} does not pass through point {0}")]
    NotThrough(PointId, LineId),
    #[error("lines {0} and {1} are already opposite")]
    Terminal(LineId, LineId),
    #[error("point {0} is not free for ({1}, {2})")]
    NotFree(PointId, LineId, LineId),
    #[error("no combing line through {x} for ({l}, {m})")]
    NoCombingLine { l: LineId, m: LineId, x: PointId },
    #[error("combing ({0}, {1}) did not reach an opposite pair")]
    NonterminatingComb(LineId, LineId),
    #[error("(ALG1) fails: no point of {0} is free for every target")]
    Alg1Violation(LineId),
    #[error("(ALG2) fails at {0}: {1}")]
    Alg2Violation(PointId, String),
    #[error("(ALG3) fails at {0}: {1}")]
    Alg3Violation(PointId, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombStep {
    pub line: LineId,
    pub position: PositionTuple,
    pub free_point: PointId,
    pub k: LineId,
    pub replacement: LineId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombTrace {
    pub start: LineId,
    pub target: LineId,
    pub steps: Vec<CombStep>,
    pub final_line: LineId,
    pub final_position: PositionTuple,
}

impl CombTrace {
    pub fn level(&self) -> u32 {
        self.steps.len() as u32
    }

    pub fn positions(&self) -> Vec<PositionTuple> {
        let mut v: Vec<PositionTuple> = self.steps.iter().map(|s| s.position).collect();
        v.push(self.final_position);
        v
    }
}

/// Result of one run of a combing algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombingOutcome {
    pub point: PointId,
    /// The auxiliary lines `M_i`, one per target.
    pub auxiliary: Vec<LineId>,
    pub line: LineId,
}

/// A combing line and the lines through the free point locally opposite it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombingLine {
    pub k: LineId,
    pub opposite_at_x: Vec<LineId>,
    /// Relation of `K` to `L` in the residue at the free point.
    pub local: PairRelation,
}

/// Position machinery over a relation table of a geometry with uniform lines.
pub struct Positions<'t, 'g> {
    table: &'t RelationTable<'g>,
    k: usize,
    index: HashMap<Vec<u8>, usize>,
    /// Packed matrix (3 bits per entry, lines of at most four points) to
    /// catalogue index, `u8::MAX` for a miss.
    memo: RwLock<HashMap<u64, u8>>,
}

impl<'t, 'g> Positions<'t, 'g> {
    pub fn new(table: &'t RelationTable<'g>) -> Result<Positions<'t, 'g>, PositionError> {
        let g = table.geometry();
        let k = g.order().map(|(s, _)| s + 1).ok_or(PositionError::LineSize)?;
        let index = signature_index(k).map_err(|(a, b)| PositionError::SignatureCollision(a, b))?;
        Ok(Positions { table, k, index, memo: RwLock::new(HashMap::new()) })
    }

    pub fn geometry(&self) -> &'g Geometry {
        self.table.geometry()
    }

    pub fn table(&self) -> &'t RelationTable<'g> {
        self.table
    }

    fn matrix(&self, l: LineId, m: LineId) -> Vec<u8> {
        let g = self.geometry();
        let (pl, pm) = (g.line_points(l), g.line_points(m));
        let mut out = Vec::with_capacity(self.k * self.k);
        for &x in pl {
            let row = self.table.row(x);
            out.extend(pm.iter().map(|&y| row[y as usize]));
        }
        out
    }

    pub fn relation_matrix(&self, l: LineId, m: LineId) -> Vec<PairRelation> {
        self.matrix(l, m).into_iter().map(PairRelation::from_code).collect()
    }

    fn classify_matrix(&self, mat: &[u8]) -> Option<usize> {
        match self.index.get(&signature(mat, self.k)) {
            Some(&i) if fits(&catalogue()[i], mat, self.k) => Some(i),
            _ => None,
        }
    }

    /// Catalogue index of the pair, through the memo when the matrix packs into 64 bits.
    fn entry_index(&self, l: LineId, m: LineId) -> Option<usize> {
        if self.k > 4 {
            return self.classify_matrix(&self.matrix(l, m));
        }
        let g = self.geometry();
        let (pl, pm) = (g.line_points(l), g.line_points(m));
        let mut code = 0u64;
        for &x in pl {
            let row = self.table.row(x);
            for &y in pm {
                code = code << 3 | row[y as usize] as u64;
            }
        }
        if let Some(&i) = self.memo.read().unwrap().get(&code) {
            return (i != u8::MAX).then_some(i as usize);
        }
        let found = self.classify_matrix(&self.matrix(l, m));
        self.memo.write().unwrap().insert(code, found.map_or(u8::MAX, |i| i as u8));
        found
    }

    pub fn position_of(&self, l: LineId, m: LineId) -> Position {
        match self.entry_index(l, m) {
            Some(i) => Position::Catalogue(catalogue()[i].tuple),
            None => Position::Miss(self.relation_matrix(l, m)),
        }
    }

    /// Catalogue tuple of the pair, or `None` for a miss; allocation free when memoized.
    pub fn try_tuple(&self, l: LineId, m: LineId) -> Option<PositionTuple> {
        self.entry_index(l, m).map(|i| catalogue()[i].tuple)
    }

    pub fn tuple_of(&self, l: LineId, m: LineId) -> Result<PositionTuple, PositionError> {
        self.try_tuple(l, m).ok_or(PositionError::CatalogueMiss(l, m))
    }

    /// The point of `l` whose sorted row is the unique lexicographic minimum.
    pub fn projection_point(&self, l: LineId, m: LineId) -> Option<PointId> {
        let mat = self.matrix(l, m);
        let k = self.k;
        let rows: Vec<Vec<u8>> = (0..k)
            .map(|i| {
                let mut r = mat[i * k..(i + 1) * k].to_vec();
                r.sort_unstable();
                r
            })
            .collect();
        let min = rows.iter().min()?;
        let mut hits = (0..k).filter(|&i| &rows[i] == min);
        let first = hits.next()?;
        if hits.next().is_some() {
            return None;
        }
        Some(self.geometry().line_points(l)[first])
    }

    /// Points of `l` other than its projection point; empty when `l = m`.
    pub fn free_points(&self, l: LineId, m: LineId) -> Vec<PointId> {
        if l == m {
            return Vec::new();
        }
        let proj = self.projection_point(l, m);
        self.geometry().line_points(l).iter().copied().filter(|&p| Some(p) != proj).collect()
    }

    pub fn locally_opposite_at(&self, x: PointId, k: LineId, l2: LineId) -> Result<bool, PositionError> {
        let g = self.geometry();
        for line in [k, l2] {
            if g.line_points(line).binary_search(&x).is_err() {
                return Err(PositionError::NotThrough(x, line));
            }
        }
        Ok(k != l2 && self.try_tuple(k, l2) == Some(PositionTuple::LOCALLY_OPPOSITE))
    }

    /// Relation of two lines through `x` in the residue at `x`.
    pub fn local_relation(&self, k: LineId, l: LineId) -> PairRelation {
        if k == l {
            return PairRelation::Equal;
        }
        match self.try_tuple(k, l).map(|t| t.0[3]) {
            Some(PairRelation::Collinear) => PairRelation::Collinear,
            Some(PairRelation::Symplectic) => PairRelation::Symplectic,
            Some(PairRelation::Special) => PairRelation::Special,
            _ => PairRelation::NearOpposite,
        }
    }

    fn opposite_through(&self, x: PointId, k: LineId) -> Vec<LineId> {
        self.geometry()
            .lines_through(x)
            .iter()
            .copied()
            .filter(|&l2| l2 != k && self.try_tuple(k, l2) == Some(PositionTuple::LOCALLY_OPPOSITE))
            .collect()
    }

    /// Least line `K ∋ x`, not locally opposite `l`, all of whose locally
    /// opposite lines `L'` at `x` are in the Table 1 successor position to `m`.
    pub fn find_combing_line(&self, l: LineId, m: LineId, x: PointId) -> Result<CombingLine, PositionError> {
        let g = self.geometry();
        if g.line_points(l).binary_search(&x).is_err() {
            return Err(PositionError::NotThrough(x, l));
        }
        let pos = self.tuple_of(l, m)?;
        let successor = lookup(pos).and_then(|e| e.successor).ok_or(PositionError::Terminal(l, m))?;
        if l != m && !self.free_points(l, m).contains(&x) {
            return Err(PositionError::NotFree(x, l, m));
        }
        for &k in g.lines_through(x) {
            if self.locally_opposite_at(x, l, k)? {
                continue;
            }
            let opp = self.opposite_through(x, k);
            if !opp.is_empty() && opp.iter().all(|&l2| self.try_tuple(l2, m) == Some(successor)) {
                return Ok(CombingLine { k, opposite_at_x: opp, local: self.local_relation(k, l) });
            }
        }
        Err(PositionError::NoCombingLine { l, m, x })
    }

    pub const STEP_BOUND: usize = 8;

    pub fn comb_to_opposite(&self, l: LineId, m: LineId) -> Result<CombTrace, PositionError> {
        let mut steps = Vec::new();
        let mut cur = l;
        loop {
            let pos = self.tuple_of(cur, m)?;
            if pos == PositionTuple::OPPOSITE {
                return Ok(CombTrace { start: l, target: m, steps, final_line: cur, final_position: pos });
            }
            if steps.len() >= Self::STEP_BOUND {
                return Err(PositionError::NonterminatingComb(l, m));
            }
            let x = if cur == m {
                self.geometry().line_points(cur)[0]
            } else {
                *self.free_points(cur, m).first().ok_or(PositionError::NotFree(u32::MAX, cur, m))?
            };
            let choice = self.find_combing_line(cur, m, x)?;
            let next = choice.opposite_at_x[0];
            steps.push(CombStep { line: cur, position: pos, free_point: x, k: choice.k, replacement: next });
            cur = next;
        }
    }

    pub fn level(&self, l: LineId, m: LineId) -> Result<u32, PositionError> {
        Ok(self.comb_to_opposite(l, m)?.level())
    }

    /// Level from Table 1 alone, without combing.
    pub fn table_level(&self, l: LineId, m: LineId) -> Result<u32, PositionError> {
        table_level(self.tuple_of(l, m)?).ok_or(PositionError::CatalogueMiss(l, m))
    }

    /// Least point of `l` free for every target.
    fn common_free_point(&self, l: LineId, targets: &[LineId]) -> Result<PointId, PositionError> {
        let g = self.geometry();
        g.line_points(l)
            .iter()
            .copied()
            .find(|&x| targets.iter().all(|&t| self.free_points(l, t).contains(&x)))
            .ok_or(PositionError::Alg1Violation(l))
    }

    /// The line through `x` towards an opposite target: the unique line whose
    /// other points include one collinear to some point of the target.
    fn projection_line(&self, x: PointId, target: LineId) -> Option<LineId> {
        let g = self.geometry();
        let mut near = crate::bitset::BitSet::new(g.point_count());
        for &w in g.line_points(target) {
            near.union_with(g.perp(w));
        }
        let hits: Vec<LineId> = g
            .lines_through(x)
            .iter()
            .copied()
            .filter(|&k| g.line_points(k).iter().any(|&z| z != x && near.contains(z as usize)))
            .collect();
        (hits.len() == 1).then(|| hits[0])
    }

    fn auxiliary_lines(&self, l: LineId, targets: &[LineId], x: PointId) -> Result<Vec<LineId>, PositionError> {
        let mut aux = Vec::with_capacity(targets.len());
        for &t in targets {
            if self.tuple_of(l, t)? == PositionTuple::OPPOSITE {
                let mi = self
                    .projection_line(x, t)
                    .ok_or_else(|| PositionError::Alg2Violation(x, format!("no unique projection line of {t}")))?;
                if !self.locally_opposite_at(x, l, mi)? {
                    return Err(PositionError::Alg2Violation(x, format!("projection line {mi} is not locally opposite {l}")));
                }
                aux.push(mi);
            } else {
                aux.push(self.find_combing_line(l, t, x)?.k);
            }
        }
        Ok(aux)
    }

    /// First combing algorithm: a line through a common free point locally
    /// opposite every auxiliary line.
    pub fn combing_algorithm_1(&self, l: LineId, targets: &[LineId]) -> Result<CombingOutcome, PositionError> {
        let x = self.common_free_point(l, targets)?;
        let aux = self.auxiliary_lines(l, targets, x)?;
        let g = self.geometry();
        let line = g
            .lines_through(x)
            .iter()
            .copied()
            .find(|&c| aux.iter().all(|&mi| self.locally_opposite_at(x, mi, c).unwrap_or(false)))
            .ok_or_else(|| PositionError::Alg2Violation(x, "no line locally opposite every auxiliary line".into()))?;
        Ok(CombingOutcome { point: x, auxiliary: aux, line })
    }

    /// Second combing algorithm, combing back at target `back`. The result is
    /// locally opposite every other auxiliary line and not locally opposite the
    /// designated one.
    pub fn combing_algorithm_2(&self, l: LineId, targets: &[LineId], back: usize) -> Result<CombingOutcome, PositionError> {
        let x = self.common_free_point(l, targets)?;
        let aux = self.auxiliary_lines(l, targets, x)?;
        let designated = *aux
            .get(back)
            .ok_or_else(|| PositionError::Alg3Violation(x, format!("no target {back}")))?;
        if !self.locally_opposite_at(x, l, designated)? {
            return Err(PositionError::Alg3Violation(x, "designated line is not locally opposite L".into()));
        }
        let others: Vec<LineId> = aux.iter().copied().filter(|&a| a != designated).collect();
        let g = self.geometry();
        let line = g
            .lines_through(x)
            .iter()
            .copied()
            .find(|&c| {
                others.iter().all(|&mi| self.locally_opposite_at(x, mi, c).unwrap_or(false))
                    && !self.locally_opposite_at(x, designated, c).unwrap_or(true)
            })
            .ok_or_else(|| PositionError::Alg3Violation(x, "no admissible line".into()))?;
        Ok(CombingOutcome { point: x, auxiliary: aux, line })
    }
}

/// Census over all ordered line pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionCensus {
    /// Catalogue tuple string to count, in catalogue order; unrealized entries included.
    pub counts: Vec<(String, u64)>,
    pub total: u64,
    pub miss_count: u64,
    /// Up to 100 missed pairs with their raw matrices.
    pub misses: Vec<(LineId, LineId, Vec<PairRelation>)>,
    /// Pairs where `δ(M,L)` is not the inverse of `δ(L,M)`.
    pub inverse_violations: Vec<(LineId, LineId)>,
}

impl PositionCensus {
    pub fn count(&self, t: PositionTuple) -> u64 {
        let key = t.to_string();
        self.counts.iter().find(|(k, _)| *k == key).map_or(0, |&(_, c)| c)
    }

    pub fn realized(&self) -> Vec<PositionTuple> {
        self.counts.iter().filter(|(_, c)| *c > 0).map(|(k, _)| k.parse().unwrap()).collect()
    }
}

impl Positions<'_, '_> {
    /// Every ordered pair, unordered pairs computed in both directions.
    pub fn census(&self) -> PositionCensus {
        use rayon::prelude::*;
        let nl = self.geometry().line_count() as LineId;
        struct Part {
            counts: Vec<u64>,
            miss_count: u64,
            misses: Vec<(LineId, LineId, Vec<PairRelation>)>,
            inverse: Vec<(LineId, LineId)>,
        }
        let empty = || Part { counts: vec![0; 27], miss_count: 0, misses: Vec::new(), inverse: Vec::new() };
        let slot = |t: Option<PositionTuple>| t.and_then(|t| catalogue().iter().position(|e| e.tuple == t)).unwrap_or(26);
        let parts: Vec<Part> = (0..nl)
            .into_par_iter()
            .map(|l| {
                let mut part = empty();
                for m in l..nl {
                    let a = self.try_tuple(l, m);
                    let b = if l == m { a } else { self.try_tuple(m, l) };
                    let pairs: &[(LineId, LineId, Option<PositionTuple>)] =
                        if l == m { &[(l, m, a)][..] } else { &[(l, m, a), (m, l, b)][..] };
                    for &(x, y, t) in pairs {
                        part.counts[slot(t)] += 1;
                        if t.is_none() {
                            part.miss_count += 1;
                            if part.misses.len() < 100 {
                                part.misses.push((x, y, self.relation_matrix(x, y)));
                            }
                        }
                    }
                    if let (Some(a), Some(b)) = (a, b) {
                        if b != a.inverse() && part.inverse.len() < 100 {
                            part.inverse.push((l, m));
                        }
                    }
                }
                part
            })
            .collect();
        let mut total = empty();
        for p in parts {
            for (c, d) in total.counts.iter_mut().zip(&p.counts) {
                *c += d;
            }
            total.miss_count += p.miss_count;
            total.misses.extend(p.misses);
            total.inverse.extend(p.inverse);
        }
        total.misses.truncate(100);
        total.inverse.truncate(100);
        PositionCensus {
            counts: catalogue().iter().zip(&total.counts).map(|(e, &c)| (e.tuple.to_string(), c)).collect(),
            total: total.counts.iter().sum(),
            miss_count: total.miss_count,
            misses: total.misses,
            inverse_violations: total.inverse,
        }
    }
}
