//! Named verification runs producing machine-readable reports.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::construct::{self, hermitian_subquadrangle, ConstructError};
use crate::feasibility::{check_order, verify_nonex, Condition, HexOrder};
use crate::geometry::{line_grassmannian, Geometry, GeometryError, LineId, PointId};
use crate::io::{fingerprint, Fingerprint};
use crate::positions::{catalogue, lookup, PositionError, PositionTuple, Positions};
use crate::relations::{OppositionSets, PairRelation, RelationError, RelationTable};
use crate::search::{self, BlockingClass, BlockingOptions, HexagonTools, Recognizer, RutScope, SearchError};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum RecipeError {
    #[error("unknown recipe {0:?}")]
    Unknown(String),
    #[error("unknown model {0:?}")]
    Model(String),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Position(#[from] PositionError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    /// Witness data for failures, supporting detail otherwise.
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryStamp {
    pub label: String,
    pub name: String,
    pub fingerprint: Fingerprint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub recipe: String,
    pub params: RecipeParams,
    pub seed: u64,
    pub geometries: Vec<GeometryStamp>,
    pub status: Status,
    pub assertions: Vec<Assertion>,
    pub data: BTreeMap<String, Value>,
    pub wall_time_ms: u64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// The report without its timing, for reproducibility comparisons.
    pub fn payload(&self) -> String {
        let mut r = self.clone();
        r.wall_time_ms = 0;
        serde_json::to_string(&r).expect("report serializes")
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeParams {
    pub q: Option<usize>,
    pub model: Option<String>,
    pub tmax: Option<u64>,
    pub seed: u64,
    pub budget: Option<u64>,
    /// Instances per position (table1), trials per algorithm (combing) or points (coroltits).
    pub samples: Option<usize>,
}

impl Default for RecipeParams {
    fn default() -> RecipeParams {
        RecipeParams { q: None, model: None, tmax: None, seed: 0, budget: None, samples: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recipe {
    Constructors,
    Bshex,
    GeomlinesHex,
    RutHex,
    PositionsCatalogue,
    Table1,
    Combing,
    TypebGrassmannian,
    Coroltits,
    ObsGq,
    Nonex,
}

impl Recipe {
    pub const ALL: [Recipe; 11] = [
        Recipe::Constructors,
        Recipe::Bshex,
        Recipe::GeomlinesHex,
        Recipe::RutHex,
        Recipe::PositionsCatalogue,
        Recipe::Table1,
        Recipe::Combing,
        Recipe::TypebGrassmannian,
        Recipe::Coroltits,
        Recipe::ObsGq,
        Recipe::Nonex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Constructors => "constructors",
            Recipe::Bshex => "bshex",
            Recipe::GeomlinesHex => "geomlines-hex",
            Recipe::RutHex => "rut-hex",
            Recipe::PositionsCatalogue => "positions-catalogue",
            Recipe::Table1 => "table1",
            Recipe::Combing => "combing",
            Recipe::TypebGrassmannian => "typeb-grassmannian",
            Recipe::Coroltits => "coroltits",
            Recipe::ObsGq => "obs-gq",
            Recipe::Nonex => "nonex",
        }
    }

    pub fn parse(s: &str) -> Result<Recipe, RecipeError> {
        Recipe::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| RecipeError::Unknown(s.to_string()))
    }
}

/// Models by short name: `pg22`, `w32`, `w52`, `oplus72`, `h34`, `hex2`,
/// `hex3`, `hex4`, and `lines-<polar>` for a line-Grassmannian.
pub fn model(name: &str) -> Result<Geometry, RecipeError> {
    if let Some(rest) = name.strip_prefix("lines-") {
        let parent = Arc::new(model(rest)?);
        return Ok(line_grassmannian(&parent)?);
    }
    Ok(match name {
        "pg22" => construct::pg(2, 2)?,
        "pg32" => construct::pg(3, 2)?,
        "w32" => construct::symplectic(3, 2)?,
        "w52" => construct::symplectic(5, 2)?,
        "oplus72" => construct::hyperbolic_quadric(7, 2)?,
        "h34" => construct::hermitian(3, 4)?,
        _ => match name.strip_prefix("hex").and_then(|q| q.parse().ok()) {
            Some(q) => construct::split_cayley_hexagon(q)?,
            None => return Err(RecipeError::Model(name.to_string())),
        },
    })
}

struct Run {
    recipe: Recipe,
    params: RecipeParams,
    start: Instant,
    geometries: Vec<GeometryStamp>,
    assertions: Vec<Assertion>,
    data: BTreeMap<String, Value>,
    partial: bool,
}

impl Run {
    fn new(recipe: Recipe, params: &RecipeParams) -> Run {
        Run {
            recipe,
            params: params.clone(),
            start: Instant::now(),
            geometries: Vec::new(),
            assertions: Vec::new(),
            data: BTreeMap::new(),
            partial: false,
        }
    }

    fn stamp(&mut self, label: &str, g: &Geometry) {
        self.geometries.push(GeometryStamp { label: label.into(), name: g.name().into(), fingerprint: fingerprint(g) });
    }

    fn check(&mut self, name: &str, passed: bool, detail: Value) {
        self.assertions.push(Assertion { name: name.into(), passed, detail });
    }

    fn put(&mut self, key: &str, v: Value) {
        self.data.insert(key.into(), v);
    }

    fn finish(self) -> RunReport {
        let status = if self.assertions.iter().any(|a| !a.passed) {
            Status::Fail
        } else if self.partial {
            Status::Partial
        } else {
            Status::Pass
        };
        RunReport {
            schema: SCHEMA,
            recipe: self.recipe.name().into(),
            seed: self.params.seed,
            params: self.params,
            geometries: self.geometries,
            status,
            assertions: self.assertions,
            data: self.data,
            wall_time_ms: self.start.elapsed().as_millis() as u64,
        }
    }
}

pub fn run_recipe(recipe: Recipe, params: &RecipeParams) -> Result<RunReport, RecipeError> {
    let mut run = Run::new(recipe, params);
    match recipe {
        Recipe::Constructors => constructors(&mut run)?,
        Recipe::Bshex => bshex(&mut run)?,
        Recipe::GeomlinesHex => geomlines_hex(&mut run)?,
        Recipe::RutHex => rut_hex(&mut run)?,
        Recipe::PositionsCatalogue => positions_catalogue(&mut run)?,
        Recipe::Table1 => table1(&mut run)?,
        Recipe::Combing => combing(&mut run)?,
        Recipe::TypebGrassmannian => typeb(&mut run)?,
        Recipe::Coroltits => coroltits(&mut run)?,
        Recipe::ObsGq => obs_gq(&mut run)?,
        Recipe::Nonex => nonex(&mut run),
    }
    Ok(run.finish())
}

fn q_param(run: &Run, default: usize) -> usize {
    run.params.q.unwrap_or(default)
}

fn model_param(run: &Run, default: &str) -> String {
    run.params.model.clone().unwrap_or_else(|| default.to_string())
}

/// Witness lists are capped so failing reports stay readable.
fn witnesses<T: Serialize>(items: impl IntoIterator<Item = T>) -> Value {
    json!(items.into_iter().take(20).collect::<Vec<_>>())
}

// Counting formulas, independent of the constructions.

fn gaussian(n: u32, k: u32, q: u64) -> u64 {
    let (mut num, mut den) = (1u64, 1u64);
    for i in 0..k {
        num *= q.pow(n - i) - 1;
        den *= q.pow(i + 1) - 1;
    }
    num / den
}

/// Points of a polar space of rank `r` with parameter `e` (1 for symplectic,
/// 0 for hyperbolic): `(q^{r+e-1}+1)(q^r-1)/(q-1)`.
fn polar_points(r: u32, e: u32, q: u64) -> u64 {
    (q.pow(r + e - 1) + 1) * (q.pow(r) - 1) / (q - 1)
}

/// Lines of a polar space of rank ≥ 2: points times points of the residue over `q + 1`.
fn polar_lines(r: u32, e: u32, q: u64) -> u64 {
    polar_points(r, e, q) * polar_points(r - 1, e, q) / (q + 1)
}

fn constructors(run: &mut Run) -> Result<(), RecipeError> {
    let mut rows = Vec::new();
    let mut expect = |run: &mut Run, label: &str, g: &Geometry, points: u64, lines: u64, order: Option<(usize, usize)>| {
        let v = g.validate();
        let ok = g.point_count() as u64 == points
            && g.line_count() as u64 == lines
            && (order.is_none() || g.order() == order)
            && v.is_partial_linear();
        run.stamp(label, g);
        run.check(
            &format!("{label} counts"),
            ok,
            json!({"points": g.point_count(), "lines": g.line_count(), "order": g.order(),
                   "expected": {"points": points, "lines": lines, "order": order}}),
        );
        rows.push(json!({"model": label, "points": g.point_count(), "lines": g.line_count(), "order": g.order()}));
    };
    let q = 2u64;
    let pg22 = construct::pg(2, 2)?;
    expect(run, "PG(2,2)", &pg22, gaussian(3, 1, q), gaussian(3, 2, q), Some((2, 2)));
    // A point of a rank-r polar space lies on as many lines as its residue has points.
    let order = |r: u32, e: u32| Some((q as usize, polar_points(r - 1, e, q) as usize - 1));
    let w32 = construct::symplectic(3, 2)?;
    expect(run, "W(3,2)", &w32, polar_points(2, 1, q), polar_lines(2, 1, q), order(2, 1));
    let w52 = construct::symplectic(5, 2)?;
    expect(run, "W(5,2)", &w52, polar_points(3, 1, q), polar_lines(3, 1, q), order(3, 1));
    let q72 = construct::hyperbolic_quadric(7, 2)?;
    expect(run, "Q+(7,2)", &q72, polar_points(4, 0, q), polar_lines(4, 0, q), order(4, 0));
    let h34 = construct::hermitian(3, 4)?;
    // GQ of order (s,t) = (q², q) for H(3,q²): (s+1)(st+1) points, (t+1)(st+1) lines.
    let (s, t) = (4u64, 2u64);
    expect(run, "H(3,4)", &h34, (s + 1) * (s * t + 1), (t + 1) * (s * t + 1), Some((4, 2)));
    let sub = hermitian_subquadrangle(&h34)?;
    expect(run, "H(3,4) subGQ", &sub.geometry, 15, 15, Some((2, 2)));
    run.check("H(3,4) subGQ is a GQ", sub.geometry.is_generalized_polygon(4), json!(null));
    for hq in [2u64, 3] {
        let h = construct::split_cayley_hexagon(hq as usize)?;
        // Hexagon of order (s,s): (1+s)(1+s²+s⁴) points and as many lines.
        let count = (1 + hq) * (1 + hq * hq + hq.pow(4));
        expect(run, &format!("H({hq})"), &h, count, count, Some((hq as usize, hq as usize)));
        let gd = h.incidence_girth_diameter()?;
        run.check(&format!("H({hq}) girth 12 diameter 6"), gd == (12, 6), json!({"girth": gd.0, "diameter": gd.1}));
    }
    run.put("models", json!(rows));
    Ok(())
}

/// Independent opposition test for hexagons: point-graph distance 3.
fn far(g: &Geometry, x: PointId, y: PointId) -> bool {
    g.distance_raw(x, y) == 3
}

fn blocks_by_scan(g: &Geometry, s: &[PointId]) -> bool {
    !(0..g.point_count() as PointId).any(|w| s.iter().all(|&p| far(g, w, p)))
}

fn hexagon_q(run: &Run) -> Result<(usize, Geometry), RecipeError> {
    let q = q_param(run, 2);
    Ok((q, construct::split_cayley_hexagon(q)?))
}

fn bshex(run: &mut Run) -> Result<(), RecipeError> {
    let (q, g) = hexagon_q(run)?;
    run.stamp("hexagon", &g);
    let table = RelationTable::new(&g)?;
    let hex = HexagonTools::new(&table)?;
    let opp = hex.opposition();
    let k = q + 1;
    let found = search::blocking_search(opp, k, BlockingOptions { minimal_only: false, budget: run.params.budget })?;
    if !found.complete {
        run.partial = true;
    }
    run.put("nodes", json!(found.nodes));
    let unsound: Vec<&Vec<PointId>> = found.sets.iter().filter(|s| !blocks_by_scan(&g, s)).collect();
    run.check("every reported set blocks (distance scan)", unsound.is_empty(), witnesses(&unsound));

    // Seeded spot check of sets the search skipped.
    let reported: BTreeSet<&Vec<PointId>> = found.sets.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(run.params.seed);
    let n = g.point_count() as PointId;
    let mut sample = Vec::new();
    while sample.len() < 1000 {
        let mut s: Vec<PointId> = rand::seq::index::sample(&mut rng, n as usize, k).into_iter().map(|i| i as PointId).collect();
        s.sort_unstable();
        if !reported.contains(&s) {
            sample.push(s);
        }
    }
    let missed: Vec<&Vec<PointId>> = sample.iter().filter(|s| blocks_by_scan(&g, s)).collect();
    run.check("1000 skipped sets have a common opposite", missed.is_empty(), witnesses(&missed));
    run.put("spot_check_sample", json!(sample));

    let rec = Recognizer::new(&table);
    let mut census: BTreeMap<BlockingClass, usize> = BTreeMap::new();
    let mut unclassified = Vec::new();
    for s in &found.sets {
        let c = rec.classify(s);
        *census.entry(c).or_default() += 1;
        if c == BlockingClass::Unclassified {
            unclassified.push(s.clone());
        }
    }
    run.check("nothing unclassified", unclassified.is_empty(), witnesses(&unclassified));
    let allowed: &[BlockingClass] = if q % 2 == 0 {
        &[BlockingClass::Line, BlockingClass::HyperbolicLine, BlockingClass::Distance3Trace]
    } else {
        &[BlockingClass::Line, BlockingClass::HyperbolicLine]
    };
    let stray: Vec<String> = census.keys().filter(|c| !allowed.contains(c)).map(|c| c.to_string()).collect();
    run.check("classes allowed for this parity", stray.is_empty(), json!(stray));

    let hyp = hex.all_hyperbolic_lines()?;
    let traces = hex.all_distance3_traces()?;
    let mut expected: BTreeSet<Vec<PointId>> = g.lines().iter().cloned().collect();
    expected.extend(hyp.iter().map(|h| h.points.clone()));
    if q % 2 == 0 {
        expected.extend(traces.iter().cloned());
    }
    let got: BTreeSet<Vec<PointId>> = found.sets.iter().cloned().collect();
    run.check(
        "blocking sets = lines ∪ hyperbolic lines (∪ traces, q even)",
        got == expected,
        json!({"extra": witnesses(got.difference(&expected)), "absent": witnesses(expected.difference(&got))}),
    );
    let bad_hyp: Vec<&search::HyperbolicLine> = hyp.iter().filter(|h| h.points.len() != q + 1 || !h.regular).collect();
    run.check("hyperbolic lines have q+1 points and are regular", bad_hyp.is_empty(), witnesses(&bad_hyp));
    if q % 2 == 1 {
        let blocked: Vec<&Vec<PointId>> = traces.iter().filter(|t| opp.common_opposite(t).is_none()).collect();
        run.check("every distance-3 trace has a common opposite", blocked.is_empty(), witnesses(&blocked));
    }
    run.put(
        "census",
        json!({
            "blocking_sets": found.sets.len(),
            "lines": g.line_count(),
            "hyperbolic_lines": hyp.len(),
            "distance3_traces": traces.len(),
            "by_class": census.iter().map(|(c, n)| (c.to_string(), *n)).collect::<BTreeMap<_, _>>(),
        }),
    );
    Ok(())
}

fn geomlines_hex(run: &mut Run) -> Result<(), RecipeError> {
    let (q, g) = hexagon_q(run)?;
    run.stamp("hexagon", &g);
    let table = RelationTable::new(&g)?;
    let hex = HexagonTools::new(&table)?;
    let opp = hex.opposition();
    let scope = RutScope::auto(g.point_count());
    let found = search::enumerate_geometric_lines(opp, scope);
    run.partial |= found.partial;
    let hyp = hex.all_hyperbolic_lines()?;
    let traces = hex.all_distance3_traces()?;
    let mut expected: BTreeSet<Vec<PointId>> = g.lines().iter().cloned().collect();
    expected.extend(hyp.iter().map(|h| h.points.clone()));
    if q % 2 == 0 {
        expected.extend(traces.iter().cloned());
    }
    let got: BTreeSet<Vec<PointId>> = found.lines.iter().cloned().collect();
    if !found.partial {
        run.check(
            "geometric lines = lines ∪ hyperbolic lines (∪ traces, q even)",
            got == expected,
            json!({"extra": witnesses(got.difference(&expected)), "absent": witnesses(expected.difference(&got))}),
        );
    } else {
        let extra: Vec<&Vec<PointId>> = got.difference(&expected).collect();
        run.check("geometric lines found are lines, hyperbolic lines or traces", extra.is_empty(), witnesses(extra));
    }
    let not_blocking: Vec<&Vec<PointId>> = found.lines.iter().filter(|s| opp.common_opposite(s).is_some()).collect();
    run.check("every geometric line blocks", not_blocking.is_empty(), witnesses(&not_blocking));
    let bad_lines: Vec<&Vec<PointId>> = g.lines().iter().filter(|l| !search::is_geometric_line(opp, l)).collect();
    run.check("every line is a geometric line", bad_lines.is_empty(), witnesses(&bad_lines));
    if q % 2 == 1 {
        let closed: Vec<&Vec<PointId>> = traces
            .iter()
            .filter(|t| search::geometric_line_closure(opp, [t[0], t[1], t[2]]).as_ref() == Some(*t))
            .collect();
        run.check("no distance-3 trace closes to itself (odd q)", closed.is_empty(), witnesses(&closed));
        let pairwise_opposite_ruts = search::enumerate_round_up_triples(opp, scope)
            .triples
            .into_iter()
            .filter(|t| opp.opposite(t[0], t[1]) && opp.opposite(t[0], t[2]) && opp.opposite(t[1], t[2]))
            .count();
        run.check("no round-up triple is pairwise opposite (odd q)", pairwise_opposite_ruts == 0, json!(pairwise_opposite_ruts));
    } else {
        let irregular: Vec<&Vec<PointId>> = traces
            .iter()
            .filter(|t| {
                let (l, m) = hex.trace_of(t).expect("trace has defining lines");
                !hex.trace_is_regular(l, m).unwrap_or(false)
            })
            .collect();
        run.check("distance-3 traces are regular", irregular.is_empty(), witnesses(&irregular));
    }
    run.put(
        "census",
        json!({
            "geometric_lines": found.lines.len(),
            "round_up_triples": found.triples_examined,
            "rejected_closures": found.rejected_closures,
            "lines": g.line_count(),
            "hyperbolic_lines": hyp.len(),
            "distance3_traces": traces.len(),
            "scope": scope,
        }),
    );
    Ok(())
}

fn rut_hex(run: &mut Run) -> Result<(), RecipeError> {
    let (q, g) = hexagon_q(run)?;
    run.stamp("hexagon", &g);
    let table = RelationTable::new(&g)?;
    let hex = HexagonTools::new(&table)?;
    let opp = hex.opposition();
    let scope = RutScope::auto(g.point_count());
    let ruts = search::enumerate_round_up_triples(opp, scope);
    run.partial |= ruts.partial;
    let traces = hex.all_distance3_traces()?;
    let trace_sets: Vec<BitSet> = traces
        .iter()
        .map(|t| BitSet::from_iter_with_len(g.point_count(), t.iter().map(|&p| p as usize)))
        .collect();
    let (mut by_lemma, mut fail1, mut fail2, mut fail3) = ([0usize; 3], Vec::new(), Vec::new(), Vec::new());
    for &t in &ruts.triples {
        let pairs = [(t[0], t[1], t[2]), (t[0], t[2], t[1]), (t[1], t[2], t[0])];
        if let Some(&(a, b, _)) = pairs.iter().find(|(a, b, _)| g.collinear(*a, *b)) {
            by_lemma[0] += 1;
            let l = g.line(a, b).unwrap();
            if !t.iter().all(|&p| g.line_set(l).contains(p as usize)) {
                fail1.push(t);
            }
        } else if let Some(&(a, b, _)) = pairs.iter().find(|(a, b, _)| table.get(*a, *b) == PairRelation::Special) {
            by_lemma[1] += 1;
            let c = table.special_center(a, b).unwrap();
            let ok = opp.opp[c as usize]
                .iter()
                .filter(|&y| hex.special_set(y as PointId).contains(a as usize) && hex.special_set(y as PointId).contains(b as usize))
                .all(|y| t.iter().all(|&p| g.collinear(p, c) && hex.special_set(y as PointId).contains(p as usize)));
            if !ok {
                fail2.push(t);
            }
        } else {
            by_lemma[2] += 1;
            let ok = trace_sets.iter().all(|ts| {
                let hits = t.iter().filter(|&&p| ts.contains(p as usize)).count();
                hits < 2 || hits == 3
            });
            if !ok || q % 2 == 1 {
                fail3.push(t);
            }
        }
    }
    run.check("collinear pair: triple on a common line", fail1.is_empty(), witnesses(&fail1));
    run.check("special pair: triple in [x1,x2]^⊥ ∩ y^⋈ for every valid y", fail2.is_empty(), witnesses(&fail2));
    run.check(
        "pairwise opposite: triple in every trace meeting it twice (absent for odd q)",
        fail3.is_empty(),
        witnesses(&fail3),
    );
    let rec = Recognizer::new(&table);
    let mut closures = BTreeMap::new();
    let mut outside = Vec::new();
    for &t in &ruts.triples {
        match search::geometric_line_closure(opp, t) {
            Some(s) => *closures.entry(rec.classify(&s).to_string()).or_insert(0usize) += 1,
            None => outside.push(t),
        }
    }
    run.check("every round-up triple lies in a line, hyperbolic line or trace", outside.is_empty(), witnesses(&outside));
    run.put(
        "census",
        json!({"round_up_triples": ruts.triples.len(), "collinear_case": by_lemma[0], "special_case": by_lemma[1],
               "opposite_case": by_lemma[2], "containing_structure": closures, "scope": scope}),
    );
    Ok(())
}

fn grassmannian(run: &mut Run, default: &str) -> Result<Geometry, RecipeError> {
    let name = model_param(run, default);
    let g = model(&format!("lines-{name}"))?;
    run.stamp("parent", g.parent().unwrap());
    run.stamp("grassmannian", &g);
    Ok(g)
}

fn positions_catalogue(run: &mut Run) -> Result<(), RecipeError> {
    let g = grassmannian(run, "oplus72")?;
    let table = RelationTable::new(&g)?;
    let pos = Positions::new(&table)?;
    let census = pos.census();
    let nl = g.line_count() as u64;
    run.check("census covers every ordered pair", census.total == nl * nl, json!({"total": census.total}));
    run.check("(0110) counts the diagonal", census.count(PositionTuple::EQUAL) == nl, json!(census.count(PositionTuple::EQUAL)));
    run.check("inverse law", census.inverse_violations.is_empty(), witnesses(&census.inverse_violations));
    let realized = census.realized();
    let bad_dual: Vec<String> = realized
        .iter()
        .filter(|t| lookup(t.dual()).is_none() || t.dual().dual() != **t)
        .map(|t| t.to_string())
        .collect();
    run.check("duals of realized positions are catalogue entries", bad_dual.is_empty(), json!(bad_dual));
    let bad_inverse: Vec<String> =
        realized.iter().filter(|t| !realized.contains(&t.inverse())).map(|t| t.to_string()).collect();
    run.check("realized positions closed under inverse", bad_inverse.is_empty(), json!(bad_inverse));

    // Opposite position against flag opposition of the pencils in the parent.
    let info = g.grassmannian().unwrap();
    let parent = &info.parent;
    let plane_sets: Vec<BitSet> = info
        .planes
        .iter()
        .map(|pl| BitSet::from_iter_with_len(parent.point_count(), pl.iter().map(|&p| p as usize)))
        .collect();
    let plane_perps: Vec<BitSet> = info.planes.iter().map(|pl| parent.perp_of(pl.iter().copied())).collect();
    let flag_opposite = |l: LineId, m: LineId| {
        let (pa, ia) = info.pencils[l as usize];
        let (pb, ib) = info.pencils[m as usize];
        !parent.collinear(pa, pb)
            && !plane_sets[ia as usize].intersects(&plane_perps[ib as usize])
            && !plane_sets[ib as usize].intersects(&plane_perps[ia as usize])
    };
    let mismatches: Vec<(LineId, LineId)> = (0..nl as LineId)
        .into_par_iter()
        .flat_map_iter(|l| {
            let pos = &pos;
            (0..nl as LineId)
                .filter(move |&m| (pos.try_tuple(l, m) == Some(PositionTuple::OPPOSITE)) != flag_opposite(l, m))
                .map(move |m| (l, m))
        })
        .collect();
    run.check("(2332) iff the pencils are opposite flags", mismatches.is_empty(), witnesses(&mismatches));
    let unrealized: Vec<String> = census.counts.iter().filter(|(_, c)| *c == 0).map(|(k, _)| k.clone()).collect();
    run.put(
        "census",
        json!({
            "counts": census.counts.iter().cloned().collect::<BTreeMap<_, _>>(),
            "realized": realized.len(),
            "unrealized": unrealized,
            "catalogue_misses": census.miss_count,
            "miss_examples": census.misses,
        }),
    );
    Ok(())
}

/// Up to `per` seeded instances of every realized position.
fn position_instances(pos: &Positions<'_, '_>, per: usize, seed: u64) -> BTreeMap<u8, Vec<(LineId, LineId)>> {
    let nl = pos.geometry().line_count();
    let mut order: Vec<LineId> = (0..nl as LineId).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut out: BTreeMap<u8, Vec<(LineId, LineId)>> = BTreeMap::new();
    for &l in order.iter() {
        let mut ms: Vec<LineId> = (0..nl as LineId).collect();
        ms.shuffle(&mut rng);
        for m in ms {
            if let Some(e) = pos.try_tuple(l, m).and_then(lookup) {
                let v = out.entry(e.table_row).or_default();
                // At most a few instances per first line keep the sample spread out.
                if v.len() < per && v.iter().filter(|(a, _)| *a == l).count() < per.div_ceil(50).max(1) {
                    v.push((l, m));
                }
            }
        }
        if out.values().all(|v| v.len() >= per) && out.contains_key(&1) {
            break;
        }
    }
    out
}

fn table1(run: &mut Run) -> Result<(), RecipeError> {
    let g = grassmannian(run, "oplus72")?;
    let table = RelationTable::new(&g)?;
    let pos = Positions::new(&table)?;
    let per = run.params.samples.unwrap_or(100);
    let instances = position_instances(&pos, per, run.params.seed);
    let mut counts = BTreeMap::new();
    let (mut no_line, mut wrong_successor, mut wrong_local, mut long_comb, mut level_mismatch) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut checked_points = 0usize;
    for (row, list) in &instances {
        let entry = catalogue().iter().find(|e| e.table_row == *row).unwrap();
        counts.insert(entry.tuple.to_string(), list.len());
        for &(l, m) in list {
            let trace = pos.comb_to_opposite(l, m);
            match &trace {
                Ok(t) if t.level() > 3 => long_comb.push((l, m)),
                Ok(t) if Some(t.level()) != crate::positions::table_level(entry.tuple) => level_mismatch.push((l, m)),
                Err(_) => long_comb.push((l, m)),
                _ => {}
            }
            let Some(successor) = entry.successor else { continue };
            let points = if l == m { vec![g.line_points(l)[0]] } else { pos.free_points(l, m) };
            for x in points {
                checked_points += 1;
                match pos.find_combing_line(l, m, x) {
                    Ok(c) => {
                        if c.opposite_at_x.iter().any(|&l2| pos.try_tuple(l2, m) != Some(successor)) {
                            wrong_successor.push((l, m, x));
                        }
                        if !entry.local.contains(&c.local) {
                            wrong_local.push((l, m, x, c.local.symbol()));
                        }
                    }
                    Err(_) => no_line.push((l, m, x)),
                }
            }
        }
    }
    let short: Vec<String> = counts.iter().filter(|(_, &c)| c < per).map(|(k, c)| format!("{k}: {c}")).collect();
    run.check(&format!("{per} instances of every realized position"), short.is_empty(), json!(short));
    run.check("a combing line exists at every free point", no_line.is_empty(), witnesses(&no_line));
    run.check("successors follow Table 1", wrong_successor.is_empty(), witnesses(&wrong_successor));
    run.check("local relation of K matches Table 1", wrong_local.is_empty(), witnesses(&wrong_local));
    run.check("combing reaches (2332) within 3 steps", long_comb.is_empty(), witnesses(&long_comb));
    run.check("trace length equals Table 1 level", level_mismatch.is_empty(), witnesses(&level_mismatch));
    run.put(
        "census",
        json!({"instances": counts, "free_points_checked": checked_points,
               "sample": instances.iter().map(|(r, v)| (r.to_string(), v.clone())).collect::<BTreeMap<_, _>>()}),
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct Trial {
    line: LineId,
    targets: Vec<LineId>,
    before: Vec<u32>,
    after: Vec<u32>,
    result: LineId,
}

fn combing(run: &mut Run) -> Result<(), RecipeError> {
    let g = grassmannian(run, "oplus72")?;
    let table = RelationTable::new(&g)?;
    let pos = Positions::new(&table)?;
    let want = run.params.samples.unwrap_or(500);
    let cap = want * 40;
    let nl = g.line_count();
    let mut rng = ChaCha8Rng::seed_from_u64(run.params.seed);
    let levels = |l: LineId, ts: &[LineId]| -> Result<Vec<u32>, PositionError> { ts.iter().map(|&t| pos.level(l, t)).collect() };

    // ALG1: at least two targets at level ≥ 2, the rest random, 3 to 5 in all.
    let (mut runs1, mut attempts1, mut skipped1, mut viol1, mut exact1) = (Vec::new(), 0, BTreeMap::new(), Vec::new(), 0);
    while runs1.len() < want && attempts1 < cap {
        attempts1 += 1;
        let l = rng.gen_range(0..nl) as LineId;
        let k = rng.gen_range(3..=5);
        let deep: Vec<LineId> = (0..nl as LineId).filter(|&m| pos.table_level(l, m).is_ok_and(|v| v >= 2)).collect();
        let mut targets: Vec<LineId> = deep.choose_multiple(&mut rng, 2).copied().collect();
        while targets.len() < k {
            let m = rng.gen_range(0..nl) as LineId;
            if !targets.contains(&m) {
                targets.push(m);
            }
        }
        let before = levels(l, &targets)?;
        match pos.combing_algorithm_1(l, &targets) {
            Ok(out) => {
                let after = levels(out.line, &targets)?;
                let max_b = before.iter().max().copied().unwrap_or(0);
                let max_a = after.iter().max().copied().unwrap_or(0);
                if max_a >= max_b {
                    viol1.push(json!({"line": l, "targets": targets, "before": before, "after": after}));
                }
                if before.iter().zip(&after).all(|(b, a)| *a == b.saturating_sub(1)) {
                    exact1 += 1;
                }
                runs1.push(Trial { line: l, targets, before, after, result: out.line });
            }
            Err(e) => *skipped1.entry(error_kind(&e)).or_insert(0usize) += 1,
        }
    }
    run.check(&format!("ALG1 ran {want} times"), runs1.len() == want, json!({"runs": runs1.len(), "attempts": attempts1}));
    run.check("ALG1 strictly lowers the maximum level", viol1.is_empty(), witnesses(&viol1));

    // ALG2: at least one opposite target, combed back at the first of them.
    let (mut runs2, mut attempts2, mut skipped2, mut viol2) = (Vec::new(), 0, BTreeMap::new(), Vec::new());
    while runs2.len() < want && attempts2 < cap {
        attempts2 += 1;
        let l = rng.gen_range(0..nl) as LineId;
        let k = rng.gen_range(3..=5);
        let opposite: Vec<LineId> = (0..nl as LineId).filter(|&m| pos.table_level(l, m) == Ok(0)).collect();
        let mut targets: Vec<LineId> = opposite.choose(&mut rng).copied().into_iter().collect();
        while targets.len() < k {
            let m = rng.gen_range(0..nl) as LineId;
            if !targets.contains(&m) {
                targets.push(m);
            }
        }
        let before = levels(l, &targets)?;
        match pos.combing_algorithm_2(l, &targets, 0) {
            Ok(out) => {
                let after = levels(out.line, &targets)?;
                if before.iter().zip(&after).any(|(b, a)| *b == 0 && *a > 1) {
                    viol2.push(json!({"line": l, "targets": targets, "before": before, "after": after}));
                }
                runs2.push(Trial { line: l, targets, before, after, result: out.line });
            }
            Err(e) => *skipped2.entry(error_kind(&e)).or_insert(0usize) += 1,
        }
    }
    run.check(&format!("ALG2 ran {want} times"), runs2.len() == want, json!({"runs": runs2.len(), "attempts": attempts2}));
    run.check("ALG2 sends level 0 to level at most 1", viol2.is_empty(), witnesses(&viol2));
    run.put(
        "census",
        json!({
            "alg1": {"runs": runs1.len(), "attempts": attempts1, "skipped": skipped1, "every_level_drops_by_one": exact1},
            "alg2": {"runs": runs2.len(), "attempts": attempts2, "skipped": skipped2},
        }),
    );
    run.put("trials", json!({"alg1": runs1, "alg2": runs2}));
    Ok(())
}

fn error_kind(e: &PositionError) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("").to_string()
}

fn typeb(run: &mut Run) -> Result<(), RecipeError> {
    let g = grassmannian(run, "w52")?;
    let table = RelationTable::new(&g)?;
    let opp = OppositionSets::from_table(&table);
    let scope = RutScope::auto(g.point_count());
    let found = search::enumerate_geometric_lines(&opp, scope);
    run.partial |= found.partial;
    let pencils = search::hyperbolic_pencils(&g)?;
    let mut expected: BTreeSet<Vec<PointId>> = g.lines().iter().cloned().collect();
    expected.extend(pencils.iter().cloned());
    let got: BTreeSet<Vec<PointId>> = found.lines.iter().cloned().collect();
    run.check(
        "geometric lines = planar pencils ∪ hyperbolic pencils",
        got == expected,
        json!({"extra": witnesses(got.difference(&expected)), "absent": witnesses(expected.difference(&got))}),
    );
    let rec = Recognizer::new(&table);
    let mut by_class: BTreeMap<String, usize> = BTreeMap::new();
    for s in &found.lines {
        *by_class.entry(rec.classify(s).to_string()).or_default() += 1;
    }
    let ruts = search::enumerate_round_up_triples(&opp, scope);
    let sets: Vec<BitSet> =
        expected.iter().map(|s| BitSet::from_iter_with_len(g.point_count(), s.iter().map(|&p| p as usize))).collect();
    let loose: Vec<[PointId; 3]> = ruts
        .triples
        .par_iter()
        .filter(|t| !sets.iter().any(|s| t.iter().all(|&p| s.contains(p as usize))))
        .copied()
        .collect();
    run.check("every round-up triple lies in a planar or hyperbolic pencil", loose.is_empty(), witnesses(&loose));
    let not_blocking: Vec<&Vec<PointId>> = found.lines.iter().filter(|s| opp.common_opposite(s).is_some()).collect();
    run.check("every geometric line blocks", not_blocking.is_empty(), witnesses(&not_blocking));
    let bad_lines: Vec<&Vec<PointId>> = g.lines().iter().filter(|l| !search::is_geometric_line(&opp, l)).collect();
    run.check("every line is a geometric line", bad_lines.is_empty(), witnesses(&bad_lines));
    run.put(
        "census",
        json!({"geometric_lines": found.lines.len(), "planar_pencils": g.line_count(),
               "hyperbolic_pencils": pencils.len(), "round_up_triples": ruts.triples.len(), "by_class": by_class}),
    );
    Ok(())
}

fn coroltits(run: &mut Run) -> Result<(), RecipeError> {
    let g = grassmannian(run, "w52")?;
    let parent = Arc::clone(g.parent().unwrap());
    let opp = OppositionSets::new(&g)?;
    let want = run.params.samples.unwrap_or(50).min(parent.point_count());
    let mut points: Vec<PointId> = (0..parent.point_count() as PointId).collect();
    points.shuffle(&mut ChaCha8Rng::seed_from_u64(run.params.seed));
    points.truncate(want);
    points.sort_unstable();
    let mut differ = Vec::new();
    let mut sizes = Vec::new();
    for &p in &points {
        let through = parent.lines_through(p);
        let res = parent.point_residual(p)?;
        let ropp = OppositionSets::new(&res)?;
        let n = through.len() as PointId;
        let (mut ambient, mut local) = (BTreeSet::new(), BTreeSet::new());
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    let (x, y, z) = (through[a as usize], through[b as usize], through[c as usize]);
                    if search::is_round_up_triple(&opp, x, y, z)? {
                        ambient.insert([a, b, c]);
                    }
                    if search::is_round_up_triple(&ropp, a, b, c)? {
                        local.insert([a, b, c]);
                    }
                }
            }
        }
        sizes.push(ambient.len());
        if ambient != local {
            differ.push(json!({"point": p, "ambient_only": witnesses(ambient.difference(&local)),
                               "residue_only": witnesses(local.difference(&ambient))}));
        }
    }
    run.check("round-up triples through p agree with those of the residue", differ.is_empty(), witnesses(&differ));
    run.put("sample_points", json!(points));
    run.put("triples_per_point", json!(sizes));
    Ok(())
}

fn obs_gq(run: &mut Run) -> Result<(), RecipeError> {
    let h = construct::hermitian(3, 4)?;
    let sub = hermitian_subquadrangle(&h)?;
    run.stamp("hermitian", &h);
    run.stamp("subquadrangle", &sub.geometry);
    let ovoids = search::enumerate_ovoids(&sub.geometry);
    run.check("the subquadrangle has ovoids", !ovoids.is_empty(), json!(ovoids.len()));
    let table = RelationTable::new(&h)?;
    let opp = OppositionSets::from_table(&table);
    let rec = Recognizer::new(&table).with_subgq(&sub);
    let (mut not_dominating, mut proper_dominating, mut unrecognized) = (Vec::new(), Vec::new(), Vec::new());
    let mut ambient_sets = Vec::new();
    for o in &ovoids {
        let s: Vec<PointId> = o.iter().map(|&i| sub.embedding[i as usize]).collect();
        if !search::gq_dominating_check(&h, &s) || opp.common_opposite(&s).is_some() {
            not_dominating.push(s.clone());
        }
        for mask in 1..(1u32 << s.len()) - 1 {
            let part: Vec<PointId> = (0..s.len()).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
            if search::gq_dominating_check(&h, &part) {
                proper_dominating.push(part);
            }
        }
        if rec.classify(&s) != BlockingClass::OvoidOfSubGq {
            unrecognized.push(s.clone());
        }
        ambient_sets.push(s);
    }
    run.check("every ovoid dominates the ambient quadrangle", not_dominating.is_empty(), witnesses(&not_dominating));
    run.check("no proper subset of an ovoid dominates", proper_dominating.is_empty(), witnesses(&proper_dominating));
    run.check("ovoids are recognized", unrecognized.is_empty(), witnesses(&unrecognized));
    run.put("ovoids", json!(ambient_sets));
    Ok(())
}

fn nonex(run: &mut Run) {
    let tmax = run.params.tmax.unwrap_or(100);
    let report = verify_nonex(tmax);
    run.check(
        &format!("every (t+t², t) with 2 ≤ t ≤ {tmax} is infeasible"),
        report.all_excluded(),
        json!(report.falsifications),
    );
    let c = check_order(HexOrder::new(240, 15));
    run.check(
        "(240,15) fails exactly the minus-sign integrality",
        c.st_square && c.plus_integral == Some(true) && c.failed == Some(Condition::MinusIntegral),
        json!(c),
    );
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    for c in &report.checks {
        let key = c.failed.map_or("none".to_string(), |f| serde_json::to_value(f).unwrap().as_str().unwrap().to_string());
        *reasons.entry(key).or_default() += 1;
    }
    run.put("excluded", json!(report.checks.len() - report.falsifications.len()));
    run.put("failed_condition_counts", json!(reasons));
    run.put("checks", json!(report.checks));
}
