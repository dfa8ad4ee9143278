//! Exhaustive searches driven by opposition bitsets: blocking sets, round-up
//! triples, geometric lines, hyperbolic lines, distance-3 traces and ovoids.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::construct::SubGeometry;
use crate::geometry::{Geometry, Kind, LineId, PointId};
use crate::relations::{OppositionSets, PairRelation, RelationTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("node budget of {limit} exceeded after {found} results")]
    BudgetExceeded { limit: u64, found: usize },
    #[error("points must be distinct")]
    NotDistinct,
    #[error("points {0} and {1} are not special")]
    NotSpecial(PointId, PointId),
    #[error("no point opposite the centre {0} sees both points")]
    NoWitness(PointId),
    #[error("lines {0} and {1} are not opposite")]
    NotOpposite(LineId, LineId),
    #[error("trace of lines {l} and {m} has {found} points, expected {expected}")]
    TraceSize { l: LineId, m: LineId, found: usize, expected: usize },
    #[error("set size {k} out of range")]
    BadSize { k: usize },
    #[error("geometry is not a {0}")]
    WrongKind(&'static str),
}

fn ids(s: &BitSet) -> Vec<PointId> {
    s.iter().map(|i| i as PointId).collect()
}

fn sorted(mut v: Vec<PointId>) -> Vec<PointId> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Any point opposite every member of `s`.
pub fn common_opposite(opp: &OppositionSets, s: &[PointId]) -> Option<PointId> {
    opp.common_opposite(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockingClass {
    Line,
    PlanarPencil,
    HyperbolicLine,
    Distance3Trace,
    HyperbolicPencil,
    OvoidOfSubGq,
    Unclassified,
}

impl BlockingClass {
    pub fn name(self) -> &'static str {
        match self {
            BlockingClass::Line => "line",
            BlockingClass::PlanarPencil => "planar_pencil",
            BlockingClass::HyperbolicLine => "hyperbolic_line",
            BlockingClass::Distance3Trace => "distance3_trace",
            BlockingClass::HyperbolicPencil => "hyperbolic_pencil",
            BlockingClass::OvoidOfSubGq => "ovoid_of_sub_gq",
            BlockingClass::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for BlockingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingSet {
    pub points: Vec<PointId>,
    pub class: Option<BlockingClass>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BlockingOptions {
    /// Skip sets containing a smaller blocking set.
    pub minimal_only: bool,
    /// Limit on DFS nodes; `None` is unlimited.
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingSearch {
    /// Sorted sets, in lexicographic order.
    pub sets: Vec<Vec<PointId>>,
    pub nodes: u64,
    pub complete: bool,
}

struct Dfs<'a> {
    opp: &'a OppositionSets,
    order: Vec<PointId>,
    later: Vec<BitSet>,
    max_cover: usize,
    k: usize,
    minimal_only: bool,
    budget: Option<u64>,
    nodes: AtomicU64,
    stop: AtomicBool,
}

impl Dfs<'_> {
    fn tick(&self) -> bool {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if let Some(b) = self.budget {
            if n > b {
                self.stop.store(true, Ordering::Relaxed);
            }
        }
        !self.stop.load(Ordering::Relaxed)
    }

    fn is_minimal(&self, s: &[PointId]) -> bool {
        (0..s.len()).all(|skip| {
            let rest: Vec<PointId> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &p)| p).collect();
            self.opp.common_opposite(&rest).is_some()
        })
    }

    fn record(&self, chosen: &[PointId], out: &mut Vec<Vec<PointId>>) {
        let s = sorted(chosen.to_vec());
        if !self.minimal_only || self.is_minimal(&s) {
            out.push(s);
        }
    }

    /// `cur` is the running intersection after `chosen`; `rest` holds scratch
    /// sets for the deeper levels.
    fn go(&self, j: usize, chosen: &mut Vec<PointId>, last: usize, cur: &BitSet, rest: &mut [BitSet], out: &mut Vec<Vec<PointId>>) {
        if !self.tick() {
            return;
        }
        if self.minimal_only && cur.is_empty() {
            return;
        }
        if j + 1 == self.k {
            // The last point must be non-opposite every survivor.
            let mut cand = self.later[last].clone();
            for x in cur.iter() {
                cand.intersect_with(&self.opp.nopp[x]);
                if cand.is_empty() {
                    return;
                }
            }
            for d in cand.iter() {
                chosen.push(d as PointId);
                self.record(chosen, out);
                chosen.pop();
            }
            return;
        }
        if cur.count() > (self.k - j) * self.max_cover {
            return;
        }
        let n = self.order.len();
        for pos in last + 1..=n - (self.k - j) {
            let p = self.order[pos];
            let (next, deeper) = rest.split_first_mut().expect("scratch depth");
            next.assign_and(cur, &self.opp.opp[p as usize]);
            chosen.push(p);
            self.go(j + 1, chosen, pos, next, deeper, out);
            chosen.pop();
            if self.stop.load(Ordering::Relaxed) {
                return;
            }
        }
    }
}

/// All `k`-sets with no common opposite point.
///
/// Points are tried in order of decreasing `|p^{not≡}|`; the first choice is
/// distributed over rayon workers and the merged output is sorted, so the
/// result does not depend on the thread count.
pub fn blocking_search(opp: &OppositionSets, k: usize, opts: BlockingOptions) -> Result<BlockingSearch, SearchError> {
    let n = opp.len();
    if k == 0 || k > n {
        return Err(SearchError::BadSize { k });
    }
    let mut order: Vec<PointId> = (0..n as PointId).collect();
    order.sort_by_key(|&p| (std::cmp::Reverse(opp.nopp[p as usize].count()), p));
    let mut later = Vec::with_capacity(n);
    let mut acc = BitSet::new(n);
    for &p in order.iter().rev() {
        later.push(acc.clone());
        acc.insert(p as usize);
    }
    later.reverse();
    let max_cover = opp.nopp.iter().map(|s| s.count()).max().unwrap_or(0);
    let dfs = Dfs {
        opp,
        order,
        later,
        max_cover,
        k,
        minimal_only: opts.minimal_only,
        budget: opts.budget,
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
    };
    let mut sets: Vec<Vec<PointId>> = if k == 1 {
        (0..n as PointId).filter(|&p| opp.opp[p as usize].is_empty()).map(|p| vec![p]).collect()
    } else {
        (0..=n - k)
            .into_par_iter()
            .map(|pos| {
                let mut scratch = vec![BitSet::new(n); k - 1];
                let p = dfs.order[pos];
                let mut out = Vec::new();
                let mut chosen = vec![p];
                dfs.go(1, &mut chosen, pos, &opp.opp[p as usize], &mut scratch, &mut out);
                out
            })
            .flatten()
            .collect()
    };
    sets.sort();
    Ok(BlockingSearch { sets, nodes: dfs.nodes.load(Ordering::Relaxed), complete: !dfs.stop.load(Ordering::Relaxed) })
}

/// Like [`blocking_search`], but budget overruns are an error.
pub fn enumerate_blocking_sets(opp: &OppositionSets, k: usize, opts: BlockingOptions) -> Result<Vec<BlockingSet>, SearchError> {
    let r = blocking_search(opp, k, opts)?;
    if !r.complete {
        return Err(SearchError::BudgetExceeded { limit: opts.budget.unwrap_or(0), found: r.sets.len() });
    }
    Ok(r.sets.into_iter().map(|points| BlockingSet { points, class: None }).collect())
}

#[inline]
fn rut_words(a: &BitSet, b: &BitSet, c: &BitSet) -> bool {
    a.words().iter().zip(b.words()).zip(c.words()).all(|((&x, &y), &z)| (x & !(y | z)) | (y & !(x | z)) | (z & !(x | y)) == 0)
}

/// No point is opposite exactly one of the three.
pub fn is_round_up_triple(opp: &OppositionSets, a: PointId, b: PointId, c: PointId) -> Result<bool, SearchError> {
    if a == b || b == c || a == c {
        return Err(SearchError::NotDistinct);
    }
    Ok(rut_words(&opp.opp[a as usize], &opp.opp[b as usize], &opp.opp[c as usize]))
}

/// Geometries up to this size get the full triple scan.
pub const RUT_EXHAUSTIVE_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RutScope {
    All,
    /// Triples through one point only.
    BasePoint(PointId),
}

impl RutScope {
    pub fn auto(n: usize) -> RutScope {
        if n <= RUT_EXHAUSTIVE_LIMIT { RutScope::All } else { RutScope::BasePoint(0) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RutEnumeration {
    pub scope: RutScope,
    /// Sorted triples in lexicographic order.
    pub triples: Vec<[PointId; 3]>,
    /// True when not every triple of the geometry was examined.
    pub partial: bool,
}

/// Third points `c` completing the pair `{a, b}`: `O_a △ O_b ⊆ O_c ⊆ O_a ∪ O_b`.
fn completions(opp: &OppositionSets, a: PointId, b: PointId) -> impl Iterator<Item = PointId> + '_ {
    let (oa, ob) = (&opp.opp[a as usize], &opp.opp[b as usize]);
    let lo: Vec<u64> = oa.words().iter().zip(ob.words()).map(|(x, y)| x ^ y).collect();
    let hi: Vec<u64> = oa.words().iter().zip(ob.words()).map(|(x, y)| x | y).collect();
    (0..opp.len() as PointId).filter(move |&c| {
        c != a
            && c != b
            && opp.opp[c as usize].words().iter().zip(&lo).zip(&hi).all(|((&w, &l), &h)| l & !w == 0 && w & !h == 0)
    })
}

pub fn enumerate_round_up_triples(opp: &OppositionSets, scope: RutScope) -> RutEnumeration {
    let n = opp.len() as PointId;
    let mut triples: Vec<[PointId; 3]> = match scope {
        RutScope::All => (0..n)
            .into_par_iter()
            .flat_map_iter(|a| {
                ((a + 1)..n).flat_map(move |b| completions(opp, a, b).filter(move |&c| c > b).map(move |c| [a, b, c]))
            })
            .collect(),
        RutScope::BasePoint(p) => (0..n)
            .into_par_iter()
            .filter(|&b| b != p)
            .flat_map_iter(|b| {
                completions(opp, p, b).filter(move |&c| c > b).map(move |c| {
                    let mut t = [p, b, c];
                    t.sort_unstable();
                    t
                })
            })
            .collect(),
    };
    triples.sort_unstable();
    let partial = matches!(scope, RutScope::BasePoint(_)) && n > 3;
    RutEnumeration { scope, triples, partial }
}

/// Every point is opposite no member of `s`, or all members but one.
pub fn is_geometric_line(opp: &OppositionSets, s: &[PointId]) -> bool {
    if s.len() < 2 {
        return false;
    }
    let set = BitSet::from_iter_with_len(opp.len(), s.iter().map(|&p| p as usize));
    // Opposition is symmetric, so |O_w ∩ S| counts the members opposite w.
    opp.opp.iter().all(|o| {
        let c = o.and_count(&set);
        c == 0 || c == s.len() - 1
    })
}

/// Grows a round-up triple by every point whose addition keeps "no point
/// opposite exactly one member"; returns the result if it is a geometric line.
pub fn geometric_line_closure(opp: &OppositionSets, t: [PointId; 3]) -> Option<Vec<PointId>> {
    if !is_round_up_triple(opp, t[0], t[1], t[2]).ok()? {
        return None;
    }
    // Adding such a point never enlarges the union of opposite sets,
    // so the fixed point is reached in one pass.
    let mut cover = opp.opp[t[0] as usize].clone();
    cover.union_with(&opp.opp[t[1] as usize]);
    cover.union_with(&opp.opp[t[2] as usize]);
    let s: Vec<PointId> = (0..opp.len() as PointId).filter(|&v| opp.opp[v as usize].is_subset(&cover)).collect();
    is_geometric_line(opp, &s).then_some(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricLines {
    pub lines: Vec<Vec<PointId>>,
    pub triples_examined: usize,
    pub rejected_closures: usize,
    pub partial: bool,
}

/// Distinct validated closures of the round-up triples in `scope`.
pub fn enumerate_geometric_lines(opp: &OppositionSets, scope: RutScope) -> GeometricLines {
    let ruts = enumerate_round_up_triples(opp, scope);
    let closures: Vec<Option<Vec<PointId>>> = ruts.triples.par_iter().map(|&t| geometric_line_closure(opp, t)).collect();
    let rejected = closures.iter().filter(|c| c.is_none()).count();
    let lines: BTreeSet<Vec<PointId>> = closures.into_iter().flatten().collect();
    GeometricLines {
        lines: lines.into_iter().collect(),
        triples_examined: ruts.triples.len(),
        rejected_closures: rejected,
        partial: ruts.partial,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicLine {
    pub center: PointId,
    pub points: Vec<PointId>,
    /// Every `q ≡ c` seeing two points of the set cuts out exactly the set.
    pub regular: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distance3Trace {
    pub lines: (LineId, LineId),
    pub points: Vec<PointId>,
}

/// Hexagon-specific searches on top of a relation table.
pub struct HexagonTools<'t, 'g> {
    table: &'t RelationTable<'g>,
    opp: OppositionSets,
    special: Vec<BitSet>,
}

impl<'t, 'g> HexagonTools<'t, 'g> {
    pub fn new(table: &'t RelationTable<'g>) -> Result<HexagonTools<'t, 'g>, SearchError> {
        if !matches!(table.geometry().kind(), Kind::GeneralizedPolygon(6)) {
            return Err(SearchError::WrongKind("generalized hexagon"));
        }
        let n = table.geometry().point_count() as PointId;
        let special = (0..n).into_par_iter().map(|x| table.relation_set(x, PairRelation::Special)).collect();
        Ok(HexagonTools { table, opp: OppositionSets::from_table(table), special })
    }

    pub fn geometry(&self) -> &'g Geometry {
        self.table.geometry()
    }

    pub fn opposition(&self) -> &OppositionSets {
        &self.opp
    }

    pub fn special_set(&self, x: PointId) -> &BitSet {
        &self.special[x as usize]
    }

    pub fn hyperbolic_line(&self, a: PointId, b: PointId) -> Result<HyperbolicLine, SearchError> {
        let g = self.geometry();
        let c = self.table.special_center(a, b).ok_or(SearchError::NotSpecial(a, b))?;
        let mut h = g.perp(c).clone();
        let mut seen = false;
        for q in self.opp.opp[c as usize].iter() {
            let sq = &self.special[q];
            if sq.contains(a as usize) && sq.contains(b as usize) {
                h.intersect_with(sq);
                seen = true;
            }
        }
        if !seen {
            return Err(SearchError::NoWitness(c));
        }
        debug_assert!(h.contains(a as usize) && h.contains(b as usize));
        let cut = |q: usize| {
            let mut s = self.special[q].clone();
            s.intersect_with(g.perp(c));
            s
        };
        let regular = self.opp.opp[c as usize]
            .iter()
            .filter(|&q| self.special[q].and_count(&h) >= 2)
            .all(|q| cut(q) == h);
        Ok(HyperbolicLine { center: c, points: ids(&h), regular })
    }

    /// Every hyperbolic line, once each, sorted by point set.
    pub fn all_hyperbolic_lines(&self) -> Result<Vec<HyperbolicLine>, SearchError> {
        let n = self.geometry().point_count() as PointId;
        let found: Vec<Result<Vec<HyperbolicLine>, SearchError>> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut v = Vec::new();
                for b in self.special[a as usize].iter().filter(|&b| b > a as usize) {
                    let h = self.hyperbolic_line(a, b as PointId)?;
                    // Keep each line once: from its two smallest points.
                    if h.points[0] == a && h.points[1] == b as PointId {
                        v.push(h);
                    }
                }
                Ok(v)
            })
            .collect();
        let mut all = Vec::new();
        for r in found {
            all.extend(r?);
        }
        all.sort_by(|x, y| x.points.cmp(&y.points));
        Ok(all)
    }

    /// Lines opposite `l`: no point of one is equal or collinear to a point of the other.
    pub fn lines_opposite(&self, l: LineId) -> Vec<LineId> {
        let g = self.geometry();
        let near = g.perp_of_union(g.line_points(l));
        (0..g.line_count() as LineId).filter(|&m| !g.line_set(m).intersects(&near)).collect()
    }

    pub fn lines_are_opposite(&self, l: LineId, m: LineId) -> bool {
        let g = self.geometry();
        !g.line_set(m).intersects(&g.perp_of_union(g.line_points(l)))
    }

    /// Points off `l` collinear to exactly one of its points.
    fn close_to(&self, l: LineId) -> BitSet {
        let g = self.geometry();
        let line = g.line_set(l);
        let mut s = g.perp_of_union(g.line_points(l));
        s.difference_with(line);
        let members: Vec<usize> = s.iter().filter(|&x| g.perp(x as PointId).and_count(line) != 1).collect();
        for x in members {
            s.remove(x);
        }
        s
    }

    pub fn distance3_trace(&self, l: LineId, m: LineId) -> Result<Distance3Trace, SearchError> {
        if !self.lines_are_opposite(l, m) {
            return Err(SearchError::NotOpposite(l, m));
        }
        let t = self.close_to(l).and(&self.close_to(m));
        let expected = self.geometry().order().map(|(s, _)| s + 1).unwrap_or(0);
        if t.count() != expected {
            return Err(SearchError::TraceSize { l, m, found: t.count(), expected });
        }
        Ok(Distance3Trace { lines: (l, m), points: ids(&t) })
    }

    /// For every `N ≡ M` meeting the trace `[L,M]₃` in two points, `[N,M]₃ = [L,M]₃`.
    pub fn trace_is_regular(&self, l: LineId, m: LineId) -> Result<bool, SearchError> {
        let t = self.distance3_trace(l, m)?;
        for n in self.lines_opposite(m) {
            let other = self.distance3_trace(n, m)?;
            let shared = other.points.iter().filter(|p| t.points.binary_search(p).is_ok()).count();
            if shared >= 2 && other.points != t.points {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Distinct distance-3 traces (as point sets), sorted.
    pub fn all_distance3_traces(&self) -> Result<Vec<Vec<PointId>>, SearchError> {
        let nl = self.geometry().line_count() as LineId;
        let per: Vec<Result<Vec<Vec<PointId>>, SearchError>> = (0..nl)
            .into_par_iter()
            .map(|l| {
                self.lines_opposite(l)
                    .into_iter()
                    .filter(|&m| m > l)
                    .map(|m| self.distance3_trace(l, m).map(|t| t.points))
                    .collect()
            })
            .collect();
        let mut all = BTreeSet::new();
        for r in per {
            all.extend(r?);
        }
        Ok(all.into_iter().collect())
    }

    /// Lines `L` with every member of `s` close to `L`.
    fn lines_close_to_all(&self, s: &[PointId]) -> Vec<LineId> {
        let g = self.geometry();
        let x = s[0];
        let mut cand = BTreeSet::new();
        for y in g.perp(x).iter().filter(|&y| y != x as usize) {
            for &l in g.lines_through(y as PointId) {
                if !g.line_set(l).contains(x as usize) {
                    cand.insert(l);
                }
            }
        }
        cand.into_iter()
            .filter(|&l| {
                let line = g.line_set(l);
                s.iter().all(|&p| !line.contains(p as usize) && g.perp(p).and_count(line) == 1)
            })
            .collect()
    }

    /// Opposite lines whose trace is exactly `s`.
    pub fn trace_of(&self, s: &[PointId]) -> Option<(LineId, LineId)> {
        if s.len() < 2 {
            return None;
        }
        let close = self.lines_close_to_all(s);
        for (i, &l) in close.iter().enumerate() {
            for &m in &close[i + 1..] {
                if let Ok(t) = self.distance3_trace(l, m) {
                    if t.points == s {
                        return Some((l, m));
                    }
                }
            }
        }
        None
    }
}

impl Geometry {
    /// Points equal or collinear to at least one of `points`.
    pub fn perp_of_union(&self, points: &[PointId]) -> BitSet {
        let mut s = BitSet::new(self.point_count());
        for &p in points {
            s.union_with(self.perp(p));
        }
        s
    }
}

/// `{a,b}^⊥⊥` in a polar space, for non-collinear `a`, `b`.
pub fn polar_hyperbolic_line(g: &Geometry, a: PointId, b: PointId) -> Vec<PointId> {
    let inner = g.perp_of([a, b]);
    ids(&g.perp_of(inner.iter().map(|i| i as PointId)))
}

/// Hyperbolic lines of the residue at each parent point, as sets of
/// Grassmannian points (parent lines), sorted.
pub fn hyperbolic_pencils(g: &Geometry) -> Result<Vec<Vec<PointId>>, SearchError> {
    let parent = g.parent().ok_or(SearchError::WrongKind("line-Grassmannian"))?;
    let per: Vec<Vec<Vec<PointId>>> = (0..parent.point_count() as PointId)
        .into_par_iter()
        .map(|p| {
            let Ok(res) = parent.point_residual(p) else { return Vec::new() };
            let through = parent.lines_through(p);
            let mut out = Vec::new();
            let n = res.point_count() as PointId;
            for a in 0..n {
                for b in (a + 1)..n {
                    if res.collinear(a, b) {
                        continue;
                    }
                    let h = polar_hyperbolic_line(&res, a, b);
                    if h[0] == a && h[1] == b {
                        out.push(sorted(h.iter().map(|&i| through[i as usize]).collect()));
                    }
                }
            }
            out
        })
        .collect();
    let all: BTreeSet<Vec<PointId>> = per.into_iter().flatten().collect();
    Ok(all.into_iter().collect())
}

/// Every point equal or collinear to some member of `s`.
pub fn gq_dominating_check(g: &Geometry, s: &[PointId]) -> bool {
    g.perp_of_union(s).count() == g.point_count()
}

/// Every line meets `s` in exactly one point.
pub fn is_ovoid(g: &Geometry, s: &[PointId]) -> bool {
    if let Some((a, b)) = g.order() {
        if s.len() != a * b + 1 {
            return false;
        }
    }
    let set = BitSet::from_iter_with_len(g.point_count(), s.iter().map(|&p| p as usize));
    set.count() == s.len() && (0..g.line_count() as LineId).all(|l| g.line_set(l).and_count(&set) == 1)
}

/// All ovoids, by exact cover of the lines; sorted.
pub fn enumerate_ovoids(g: &Geometry) -> Vec<Vec<PointId>> {
    fn go(g: &Geometry, chosen: &mut Vec<PointId>, blocked: &mut Vec<u32>, covered: &mut Vec<bool>, out: &mut Vec<Vec<PointId>>) {
        let Some(l) = covered.iter().position(|&c| !c) else {
            out.push(sorted(chosen.clone()));
            return;
        };
        for &p in g.line_points(l as LineId) {
            if blocked[p as usize] > 0 {
                continue;
            }
            chosen.push(p);
            for q in g.perp(p).iter() {
                blocked[q] += 1;
            }
            for &m in g.lines_through(p) {
                covered[m as usize] = true;
            }
            go(g, chosen, blocked, covered, out);
            for &m in g.lines_through(p) {
                covered[m as usize] = false;
            }
            for q in g.perp(p).iter() {
                blocked[q] -= 1;
            }
            chosen.pop();
        }
    }
    let mut out = Vec::new();
    go(g, &mut Vec::new(), &mut vec![0; g.point_count()], &mut vec![false; g.line_count()], &mut out);
    out.sort();
    out.dedup();
    out
}

/// Structure recognizers for blocking sets, tried in a fixed order.
pub struct Recognizer<'t, 'g> {
    g: &'g Geometry,
    hex: Option<HexagonTools<'t, 'g>>,
    sub: Option<(HashMap<PointId, PointId>, Geometry)>,
}

impl<'t, 'g> Recognizer<'t, 'g> {
    pub fn new(table: &'t RelationTable<'g>) -> Recognizer<'t, 'g> {
        Recognizer { g: table.geometry(), hex: HexagonTools::new(table).ok(), sub: None }
    }

    /// Also recognize ovoids of this subquadrangle.
    pub fn with_subgq(mut self, sub: &SubGeometry) -> Recognizer<'t, 'g> {
        let local = sub.embedding.iter().enumerate().map(|(i, &p)| (p, i as PointId)).collect();
        self.sub = Some((local, sub.geometry.clone()));
        self
    }

    pub fn hexagon(&self) -> Option<&HexagonTools<'t, 'g>> {
        self.hex.as_ref()
    }

    pub fn classify(&self, s: &[PointId]) -> BlockingClass {
        let g = self.g;
        let s = sorted(s.to_vec());
        if let Some(l) = g.find_line(&s) {
            if g.line_points(l).len() == s.len() {
                return if g.kind() == Kind::Grassmannian { BlockingClass::PlanarPencil } else { BlockingClass::Line };
            }
        }
        if let Some(hex) = &self.hex {
            if s.len() >= 2 {
                if let Ok(h) = hex.hyperbolic_line(s[0], s[1]) {
                    if h.points == s {
                        return BlockingClass::HyperbolicLine;
                    }
                }
            }
            if hex.trace_of(&s).is_some() {
                return BlockingClass::Distance3Trace;
            }
        }
        if g.kind() == Kind::Grassmannian && is_hyperbolic_pencil(g, &s) {
            return BlockingClass::HyperbolicPencil;
        }
        if let Some((local, sub)) = &self.sub {
            let mapped: Option<Vec<PointId>> = s.iter().map(|p| local.get(p).copied()).collect();
            if mapped.is_some_and(|m| is_ovoid(sub, &m)) {
                return BlockingClass::OvoidOfSubGq;
            }
        }
        BlockingClass::Unclassified
    }
}

/// Parent lines through one point forming a hyperbolic line of its residue.
pub fn is_hyperbolic_pencil(g: &Geometry, s: &[PointId]) -> bool {
    let Some(parent) = g.parent() else { return false };
    if s.len() < 2 {
        return false;
    }
    let mut common = parent.line_set(s[0]).clone();
    for &l in &s[1..] {
        common.intersect_with(parent.line_set(l));
    }
    let Some(p) = common.first() else { return false };
    let Ok(res) = parent.point_residual(p as PointId) else { return false };
    let through = parent.lines_through(p as PointId);
    let local: Vec<PointId> = s.iter().map(|l| through.binary_search(l).unwrap() as PointId).collect();
    let local = sorted(local);
    !res.collinear(local[0], local[1]) && polar_hyperbolic_line(&res, local[0], local[1]) == local
}
