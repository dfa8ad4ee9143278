use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hexgeom::construct::{self, HexagonSpec, HexagonVariant, PolarFamily, PolarFormSpec};
use hexgeom::feasibility::{check_order, verify_nonex, HexOrder};
use hexgeom::geometry::line_grassmannian;
use hexgeom::io::{export_geometry, fingerprint, import_geometry};
use hexgeom::positions::Positions;
use hexgeom::recipes::{run_recipe, Recipe, RecipeParams, Status};
use hexgeom::relations::{OppositionSets, RelationTable};
use hexgeom::search::{self, BlockingOptions, Recognizer, RutScope};
use hexgeom::{Geometry, LineId, PointId};

/// Exit codes besides 0: assertion failure, usage or input error, partial result.
const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "hexgeom", version, about = "Finite point-line geometries, opposition and blocking sets")]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Search node budget.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a geometry and write it as JSON.
    Build(BuildArgs),
    /// Pair relation census.
    Relations {
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long)]
        census: bool,
    },
    /// Mutual positions of lines.
    Positions {
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long)]
        census: bool,
        #[arg(long, num_args = 2, value_names = ["L", "M"])]
        pair: Option<Vec<LineId>>,
        #[arg(long, num_args = 2, value_names = ["L", "M"])]
        comb: Option<Vec<LineId>>,
    },
    /// Exhaustive searches.
    #[command(subcommand)]
    Search(SearchCommand),
    /// Point-set predicates.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Feasibility of hexagon orders.
    Fh {
        #[arg(long)]
        s: Option<u64>,
        #[arg(long)]
        t: Option<u64>,
        #[arg(long)]
        verify_nonex: bool,
        #[arg(long, default_value_t = 100)]
        tmax: u64,
    },
    /// Run a named verification recipe.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Replace the result by its line-Grassmannian.
    #[arg(long, global = true)]
    grassmannian: bool,
    #[command(subcommand)]
    kind: BuildKind,
}

#[derive(Subcommand)]
enum BuildKind {
    Pg {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
    },
    Polar {
        /// sp, q, q+, q- or h.
        #[arg(long)]
        family: String,
        #[arg(long)]
        dim: usize,
        /// Field order (q² for Hermitian spaces).
        #[arg(long)]
        q: usize,
    },
    Hexagon {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        triality: bool,
    },
    /// H(3, q²); `--subgq` gives the subquadrangle over GF(q).
    HermitianGq {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        subgq: bool,
    },
}

#[derive(Subcommand)]
enum SearchCommand {
    /// k-sets admitting no common opposite point.
    Blocking {
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        classify: bool,
        #[arg(long)]
        minimal_only: bool,
    },
    /// Round-up triples.
    Rut {
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long)]
        base_point: Option<PointId>,
    },
    /// Geometric lines, as closures of round-up triples.
    GeometricLines {
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long)]
        base_point: Option<PointId>,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Whether every point is equal or collinear to one of the given points.
    Dominating {
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long, value_delimiter = ',')]
        points: Vec<PointId>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    recipe: String,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    tmax: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
}

struct Output {
    value: Value,
    /// Already-serialized output, written verbatim.
    raw: Option<String>,
    code: u8,
}

impl Output {
    fn ok(value: Value) -> Output {
        Output { value, raw: None, code: 0 }
    }
}

fn load(path: &PathBuf) -> Result<Geometry> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (g, _) = import_geometry(&text).with_context(|| format!("importing {}", path.display()))?;
    Ok(g)
}

fn build(args: &BuildArgs) -> Result<Geometry> {
    let g = match &args.kind {
        BuildKind::Pg { n, q } => construct::pg(*n, *q)?,
        BuildKind::Polar { family, dim, q } => {
            let f = PolarFamily::parse(family).with_context(|| format!("unknown polar family {family:?}"))?;
            construct::polar_space(PolarFormSpec::new(f, *dim, *q))?
        }
        BuildKind::Hexagon { q, triality } => {
            let variant = if *triality { HexagonVariant::TwistedTriality } else { HexagonVariant::SplitCayley };
            construct::hexagon(HexagonSpec { q: *q, variant })?
        }
        BuildKind::HermitianGq { q, subgq } => {
            let h = construct::hermitian(3, q * q)?;
            if *subgq {
                construct::hermitian_subquadrangle(&h)?.geometry
            } else {
                h
            }
        }
    };
    if args.grassmannian {
        return Ok(line_grassmannian(&Arc::new(g))?);
    }
    Ok(g)
}

fn positions_cmd(g: &Geometry, census: bool, pair: Option<&[LineId]>, comb: Option<&[LineId]>) -> Result<Output> {
    let table = RelationTable::new(g)?;
    let pos = Positions::new(&table)?;
    let check = |l: LineId| -> Result<()> {
        if l as usize >= g.line_count() {
            bail!("line {l} out of range (the geometry has {} lines)", g.line_count());
        }
        Ok(())
    };
    if let Some([l, m]) = pair {
        check(*l)?;
        check(*m)?;
        let p = pos.position_of(*l, *m);
        let tuple = p.tuple().map(|t| t.to_string());
        let level = pos.level(*l, *m).ok();
        return Ok(Output::ok(json!({
            "l": l, "m": m, "position": tuple,
            "matrix": pos.relation_matrix(*l, *m).iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "projection_point": pos.projection_point(*l, *m), "free_points": pos.free_points(*l, *m),
            "level": level,
        })));
    }
    if let Some([l, m]) = comb {
        check(*l)?;
        check(*m)?;
        let trace = pos.comb_to_opposite(*l, *m)?;
        let positions: Vec<String> = trace.positions().iter().map(|t| t.to_string()).collect();
        let mut v = serde_json::to_value(&trace)?;
        v["positions"] = json!(positions);
        return Ok(Output::ok(v));
    }
    if !census {
        bail!("positions needs one of --census, --pair or --comb");
    }
    let c = pos.census();
    let counts: serde_json::Map<String, Value> = c.counts.iter().map(|(k, n)| (k.clone(), json!(n))).collect();
    Ok(Output::ok(json!({
        "geometry": fingerprint(g), "counts": counts, "total": c.total,
        "catalogue_misses": c.miss_count, "miss_examples": c.misses, "inverse_violations": c.inverse_violations,
    })))
}

fn scope(g: &Geometry, base: Option<PointId>) -> Result<RutScope> {
    Ok(match base {
        Some(p) if p as usize >= g.point_count() => bail!("point {p} out of range"),
        Some(p) => RutScope::BasePoint(p),
        None => RutScope::auto(g.point_count()),
    })
}

fn search_cmd(cmd: &SearchCommand, budget: Option<u64>) -> Result<Output> {
    match cmd {
        SearchCommand::Blocking { geometry, k, classify, minimal_only } => {
            let g = load(geometry)?;
            let table = RelationTable::new(&g)?;
            let opp = OppositionSets::from_table(&table);
            let found = search::blocking_search(&opp, *k, BlockingOptions { minimal_only: *minimal_only, budget })?;
            let rec = classify.then(|| Recognizer::new(&table));
            let mut by_class = std::collections::BTreeMap::<String, usize>::new();
            let sets: Vec<Value> = found
                .sets
                .iter()
                .map(|s| match &rec {
                    Some(r) => {
                        let c = r.classify(s);
                        *by_class.entry(c.to_string()).or_default() += 1;
                        json!({"points": s, "class": c})
                    }
                    None => json!({"points": s}),
                })
                .collect();
            let mut summary = json!({"k": k, "count": found.sets.len(), "nodes": found.nodes, "complete": found.complete});
            if rec.is_some() {
                summary["by_class"] = json!(by_class);
            }
            let code = if found.complete { 0 } else { EXIT_PARTIAL };
            Ok(Output { value: json!({"geometry": fingerprint(&g), "summary": summary, "sets": sets}), raw: None, code })
        }
        SearchCommand::Rut { geometry, base_point } => {
            let g = load(geometry)?;
            let opp = OppositionSets::new(&g)?;
            let r = search::enumerate_round_up_triples(&opp, scope(&g, *base_point)?);
            Ok(Output::ok(json!({"geometry": fingerprint(&g), "count": r.triples.len(), "enumeration": r})))
        }
        SearchCommand::GeometricLines { geometry, base_point } => {
            let g = load(geometry)?;
            let table = RelationTable::new(&g)?;
            let opp = OppositionSets::from_table(&table);
            let found = search::enumerate_geometric_lines(&opp, scope(&g, *base_point)?);
            let rec = Recognizer::new(&table);
            let lines: Vec<Value> = found.lines.iter().map(|s| json!({"points": s, "class": rec.classify(s)})).collect();
            Ok(Output::ok(json!({
                "geometry": fingerprint(&g),
                "summary": {"count": found.lines.len(), "triples_examined": found.triples_examined,
                            "rejected_closures": found.rejected_closures, "partial": found.partial},
                "lines": lines,
            })))
        }
    }
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Build(args) => {
            let g = build(args)?;
            log::info!("built {} with {} points and {} lines", g.name(), g.point_count(), g.line_count());
            Ok(Output { value: Value::Null, raw: Some(export_geometry(&g)), code: 0 })
        }
        Command::Relations { geometry, census } => {
            let g = load(geometry)?;
            let table = RelationTable::new(&g)?;
            let mut v = json!({"geometry": fingerprint(&g), "kind": g.kind().tag()});
            if *census {
                v["census"] = serde_json::to_value(table.census())?;
            }
            Ok(Output::ok(v))
        }
        Command::Positions { geometry, census, pair, comb } => {
            let g = load(geometry)?;
            positions_cmd(&g, *census, pair.as_deref(), comb.as_deref())
        }
        Command::Search(cmd) => search_cmd(cmd, cli.budget),
        Command::Check(CheckCommand::Dominating { geometry, points }) => {
            let g = load(geometry)?;
            if let Some(p) = points.iter().find(|&&p| p as usize >= g.point_count()) {
                bail!("point {p} out of range");
            }
            let dominating = search::gq_dominating_check(&g, points);
            Ok(Output::ok(json!({"geometry": fingerprint(&g), "points": points, "dominating": dominating})))
        }
        Command::Fh { s, t, verify_nonex: nonex, tmax } => {
            if *nonex {
                let r = verify_nonex(*tmax);
                let code = if r.all_excluded() { 0 } else { EXIT_FAIL };
                let excluded = r.checks.len() - r.falsifications.len();
                return Ok(Output { value: json!({"excluded": excluded, "report": r}), raw: None, code });
            }
            let (Some(s), Some(t)) = (s, t) else { bail!("fh needs --s and --t, or --verify-nonex") };
            Ok(Output::ok(serde_json::to_value(check_order(HexOrder::new(*s, *t)))?))
        }
        Command::Verify(args) => {
            let recipe = Recipe::parse(&args.recipe)?;
            let params = RecipeParams {
                q: args.q,
                model: args.model.clone(),
                tmax: args.tmax,
                seed: cli.seed,
                budget: cli.budget,
                samples: args.samples,
            };
            let report = run_recipe(recipe, &params)?;
            for a in report.failures() {
                log::error!("{}: {}", a.name, a.detail);
            }
            let code = match report.status {
                Status::Pass => 0,
                Status::Fail => EXIT_FAIL,
                Status::Partial => EXIT_PARTIAL,
            };
            eprintln!("{} {:?}", recipe.name(), report.status);
            Ok(Output { value: serde_json::to_value(&report)?, raw: None, code })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let text = out.raw.unwrap_or_else(|| {
        let mut s = serde_json::to_string_pretty(&out.value).expect("JSON value serializes");
        s.push('\n');
        s
    });
    let written = match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_ERROR);
    }
    ExitCode::from(out.code)
}
