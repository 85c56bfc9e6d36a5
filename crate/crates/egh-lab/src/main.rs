//! Command-line laboratory: distance searches, condition checkers,
//! near-zero solving and escape-norm tables over the shipped scenarios,
//! with JSON reports and CSV tables as the only outputs.

use egh_lab::{formats, report};

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use egh_core::approx::{
    blowup, check_conditions, detect_small, localize, maximal_small, quotient_sequence,
    verify_blowup_bounds,
};
use egh_core::borsuk::{
    certify_no_small_image, continuity_modulus, find_near_zero, OddMapSample,
    SymmetricTriangulation,
};
use egh_core::escape::{
    check_limsup_formula, convex_hull_norm, escape_norm, escape_norm_model,
    estimate_gleason_constant_model, tau_and_algebra_norm, zero_set, DEFAULT_M_CAP,
};
use egh_core::gh::{equivariant_gh, pointed_gh, GhMode, Triple};
use egh_core::group::{MElem, SymSet, TargetSet};
use egh_core::scenarios::{
    self, collapsing_sphere, counterexample, cyclic_tower, hexagon_approximation, hexagon_graph,
    point_triple, torus_collapse, tower_instability, Condition, TORUS_BLOWUP_SCALE,
};

use formats::{GhResultJson, MapJson, OddSampleJson, TripleJson};
use report::{write_json, ReportBuilder, RunReport};

const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(name = "egh-lab", about = "equivariant convergence laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the run report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two triple files.
    Gh(GhArgs),
    /// Scenario checks against their declared verdicts.
    Check(CheckArgs),
    /// Near-zero search for odd samples on spheres.
    Borsuk(BorsukArgs),
    /// Escape-norm, exit-time and gauge tables.
    Norms(NormsArgs),
    /// Scenario export to JSON files.
    Scenario(ScenarioArgs),
}

#[derive(Args)]
struct GhArgs {
    file_a: String,
    file_b: String,
    /// Use the groups in the files; default compares pointed spaces only.
    #[arg(long)]
    equivariant: bool,
    /// Write the witness here.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// hexagon | counterexample-i..-v | cyclic-tower | torus-collapse |
    /// collapsing-sphere, or a path to an exported .map.json file
    scenario: String,
    /// Comma-separated index list.
    #[arg(long, default_value = "1,2,4,8")]
    indices: String,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 3)]
    nmax: usize,
}

#[derive(Args)]
struct BorsukArgs {
    /// JSON file holding a triangulated odd sample.
    #[arg(long)]
    map_file: Option<String>,
    /// Generate random odd samples instead.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Ambient dimension (the sample lives on the (n-1)-sphere).
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Value dimension.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    subdiv: usize,
    /// Number of consecutive seeds to run (parallel up to EGH_LAB_THREADS).
    #[arg(long, default_value_t = 1)]
    batch: usize,
}

#[derive(Args)]
struct NormsArgs {
    /// hexagon | s1-arc | r2 | t2 | so3 | cyclic-tower
    scenario: String,
    #[arg(long, default_value_t = 1)]
    index: u32,
    /// lo:hi:steps sweep of the neighborhood radius.
    #[arg(long, default_value = "0.25:1.0:4")]
    r_sweep: String,
    /// Directory for CSV tables.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(subcommand)]
    action: ScenarioAction,
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Write the JSON files a scenario index is made of.
    Export {
        /// hexagon | collapsing-sphere | counterexample-i..-v |
        /// cyclic-tower | torus-collapse | ray | point
        name: String,
        index: u32,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn emit(out: &Option<PathBuf>, rep: &RunReport) -> Result<()> {
    match out {
        Some(path) => write_json(path, rep)?,
        None => println!("{}", serde_json::to_string_pretty(rep)?),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gh(args) => cmd_gh(args, &cli.out),
        Command::Check(args) => cmd_check(args, &cli.out),
        Command::Borsuk(args) => cmd_borsuk(args, &cli.out),
        Command::Norms(args) => cmd_norms(args, &cli.out),
        Command::Scenario(args) => cmd_scenario(args, &cli.out),
    }
}

fn cmd_gh(args: GhArgs, out: &Option<PathBuf>) -> Result<i32> {
    let mut rb = ReportBuilder::new(DEFAULT_SEED);
    rb.add_input(&args.file_a)?;
    rb.add_input(&args.file_b)?;
    let ta = formats::load_triple(&args.file_a)?;
    let tb = formats::load_triple(&args.file_b)?;
    let result = if args.equivariant {
        equivariant_gh(&ta, &tb)
    } else {
        pointed_gh(&ta.space, &tb.space)
    };
    let rj = GhResultJson::from_core(&result, tb.space.len());
    if let (Some(path), Some(w)) = (&args.witness, &rj.witness) {
        write_json(path, w)?;
    }
    let results = json!({
        "distance": rj,
        "bounds_only": matches!(result.mode, GhMode::Bounds),
    });
    let rep = rb.finish(results, true);
    emit(out, &rep)?;
    Ok(0)
}

fn parse_indices(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|e| anyhow!("bad index {t}: {e}")))
        .collect()
}

fn cmd_check(args: CheckArgs, out: &Option<PathBuf>) -> Result<i32> {
    let rb = ReportBuilder::new(DEFAULT_SEED);
    let indices = parse_indices(&args.indices)?;
    let (results, ok) = match args.scenario.as_str() {
        "hexagon" => check_hexagon(&indices, args.delta, args.nmax)?,
        "counterexample-i" => check_counterexample(Condition::I, &indices, args.delta, args.nmax)?,
        "counterexample-ii" => {
            check_counterexample(Condition::II, &indices, args.delta, args.nmax)?
        }
        "counterexample-iii" => {
            check_counterexample(Condition::III, &indices, args.delta, args.nmax)?
        }
        "counterexample-iv" => {
            check_counterexample(Condition::IV, &indices, args.delta, args.nmax)?
        }
        "counterexample-v" => check_counterexample(Condition::V, &indices, args.delta, args.nmax)?,
        "cyclic-tower" => check_tower(&indices)?,
        "torus-collapse" => check_torus(&indices, args.delta)?,
        "collapsing-sphere" => check_sphere(&indices)?,
        path if path.ends_with(".json") => check_map_file(path, args.delta, args.nmax)?,
        other => bail!("unknown scenario {other}"),
    };
    let rep = rb.finish(results, ok);
    emit(out, &rep)?;
    Ok(if ok { 0 } else { 1 })
}

/// Runs the condition checker on an exported approximation-map file; no
/// declared verdict, so the exit code only reflects input validity.
fn check_map_file(path: &str, delta: f64, nmax: usize) -> Result<(serde_json::Value, bool)> {
    let text = std::fs::read_to_string(path)?;
    let mj: MapJson = serde_json::from_str(&text)?;
    let map = mj.into_core()?;
    let reports = check_conditions(&[map], delta, nmax, None).map_err(|e| anyhow!("{e}"))?;
    Ok((
        json!({
            "scenario": path,
            "failing": reports[0].failing(),
            "slacks": reports[0].outcomes.iter().map(|o| o.slack).collect::<Vec<_>>(),
        }),
        true,
    ))
}

fn check_hexagon(indices: &[u32], delta: f64, nmax: usize) -> Result<(serde_json::Value, bool)> {
    let mut rows = Vec::new();
    let mut ok = true;
    for &i in indices {
        let s = hexagon_graph(i);
        let iso_order = s.triple.group.order();
        let verdict = detect_small(&[(s.triple.clone(), s.h_indices.clone())], 0.0, f64::from(i));
        let map = hexagon_approximation(i);
        let loc = localize(&map, &map.a_tgt.clone(), nmax).map_err(|e| anyhow!("{e}"))?;
        let ms = maximal_small(&[loc.map], delta).map_err(|e| anyhow!("{e}"))?;
        let m = &ms[0];
        let row_ok = iso_order == 6
            && verdict[0].small_at
            && verdict[0].subgroup_ok
            && m.is_subgroup
            && m.members.len() == 2
            && m.contains_all_small
            && m.normal_in_span
            && m.normal_in_full == Some(false);
        ok &= row_ok;
        rows.push(json!({
            "index": i,
            "iso_order": iso_order,
            "h_small": verdict[0].small_at,
            "h_order": m.members.len(),
            "maximal": m.contains_all_small,
            "normal_in_span": m.normal_in_span,
            "normal_in_full": m.normal_in_full,
            "ok": row_ok,
        }));
    }
    Ok((json!({"scenario": "hexagon", "rows": rows}), ok))
}

fn check_counterexample(
    which: Condition,
    indices: &[u32],
    delta: f64,
    nmax: usize,
) -> Result<(serde_json::Value, bool)> {
    let mut rows = Vec::new();
    let mut ok = true;
    for &i in indices {
        let map = counterexample(which, i);
        let reports = check_conditions(&[map], delta, nmax, None).map_err(|e| anyhow!("{e}"))?;
        let failing = reports[0].failing();
        let row_ok = failing == vec![which.index()];
        ok &= row_ok;
        rows.push(json!({
            "index": i,
            "expected_failure": which.to_string(),
            "failing": failing,
            "slacks": reports[0].outcomes.iter().map(|o| o.slack).collect::<Vec<_>>(),
            "ok": row_ok,
        }));
    }
    Ok((json!({"scenario": format!("counterexample-{which}"), "rows": rows}), ok))
}

fn check_tower(indices: &[u32]) -> Result<(serde_json::Value, bool)> {
    let max_i = indices.iter().copied().max().unwrap_or(5);
    let rep = tower_instability(2, max_i);
    let ok = rep.unstable;
    let levels: Vec<_> = rep
        .levels
        .iter()
        .map(|l| json!({"delta": l.delta, "order": l.members.len()}))
        .collect();
    Ok((
        json!({
            "scenario": "cyclic-tower",
            "levels": levels,
            "no_stable_maximum": rep.unstable,
        }),
        ok,
    ))
}

fn check_torus(indices: &[u32], delta: f64) -> Result<(serde_json::Value, bool)> {
    let mut rows = Vec::new();
    let mut ok = true;
    for &i in indices {
        if i < 2 {
            bail!("torus collapse needs index >= 2");
        }
        let s = torus_collapse(i, 16);
        let loc = localize(&s.map, &TargetSet::Ball { radius: 0.5, closed: false }, 3)
            .map_err(|e| anyhow!("{e}"))?;
        let ms = maximal_small(&[loc.map], core::f64::consts::PI / f64::from(i) + 1e-9)
            .map_err(|e| anyhow!("{e}"))?;
        let m = &ms[0];
        let quotients = quotient_sequence(&[(s.triple.clone(), s.h_indices.clone())])
            .map_err(|e| anyhow!("{e}"))?;
        let q_is_circle = quotients[0].space.len() == 16 && quotients[0].group.order() == 16;
        let row_ok = m.is_subgroup
            && m.members == s.second_factor
            && m.normal_in_full == Some(true)
            && q_is_circle;
        ok &= row_ok;
        rows.push(json!({
            "index": i,
            "h_order": m.members.len(),
            "h_is_second_factor": m.members == s.second_factor,
            "normal": m.normal_in_full,
            "quotient_circle": q_is_circle,
            "ok": row_ok,
        }));
    }
    // Blow-up on the fine abstract maps.
    let maps: Vec<_> = indices
        .iter()
        .filter(|&&i| i >= 2)
        .map(|&i| torus_collapse(i, 48).map)
        .collect();
    let blown =
        blowup(&maps, 1, &vec![TORUS_BLOWUP_SCALE; maps.len()]).map_err(|e| anyhow!("{e}"))?;
    let reports = check_conditions(&blown, delta.max(0.1), 3, None).map_err(|e| anyhow!("{e}"))?;
    let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7]];
    let bounds = verify_blowup_bounds(&blown, 0.25, &dirs, 0.01).map_err(|e| anyhow!("{e}"))?;
    let blowup_ok = reports.iter().all(|r| r.all_pass()) && bounds.iter().all(|b| b.pass);
    ok &= blowup_ok;
    Ok((
        json!({
            "scenario": "torus-collapse",
            "rows": rows,
            "blowup_conditions_pass": reports.iter().map(|r| r.all_pass()).collect::<Vec<_>>(),
            "blowup_bounds_pass": bounds.iter().map(|b| b.pass).collect::<Vec<_>>(),
        }),
        ok,
    ))
}

fn check_sphere(indices: &[u32]) -> Result<(serde_json::Value, bool)> {
    let point = point_triple();
    let mut rows = Vec::new();
    let mut ok = true;
    let mut last = f64::INFINITY;
    for &i in indices {
        let s = collapsing_sphere(i, 1, 16);
        let r = equivariant_gh(&s.triple, &point);
        let mesh = s.triple.space.d(0, 1);
        let bound = core::f64::consts::PI / f64::from(i) + mesh;
        let row_ok = r.upper <= bound + 1e-6 && r.upper <= last + 1e-6;
        ok &= row_ok;
        last = r.upper;
        rows.push(json!({
            "index": i,
            "eps": r.upper,
            "bound": bound,
            "mode": if matches!(r.mode, GhMode::Exact) { "exact" } else { "bounds" },
            "ok": row_ok,
        }));
    }
    Ok((json!({"scenario": "collapsing-sphere", "rows": rows}), ok))
}

fn cmd_borsuk(args: BorsukArgs, out: &Option<PathBuf>) -> Result<i32> {
    let mut rb = ReportBuilder::new(args.seed);
    if let Some(path) = &args.map_file {
        rb.add_input(path)?;
        let text = std::fs::read_to_string(path)?;
        let sample: OddSampleJson = serde_json::from_str(&text)?;
        let ambient = sample.triangulation.vertices.first().map_or(0, Vec::len);
        if ambient < 2 || sample.triangulation.vertices.is_empty() {
            bail!("triangulation must have vertices in dimension at least 2");
        }
        if ambient - 1 < sample.k {
            bail!(
                "the sphere dimension {} is below the value dimension {}; the hypothesis needs n > k",
                ambient - 1,
                sample.k
            );
        }
        let tri = SymmetricTriangulation {
            ambient,
            vertices: sample.triangulation.vertices.clone(),
            simplices: sample.triangulation.simplices.clone(),
            antipode: sample.triangulation.antipode.clone(),
        };
        if !tri.validate() {
            bail!("triangulation fails the boundary/symmetry audit");
        }
        let odd = OddMapSample::new(&tri, sample.values).map_err(|e| anyhow!("bad sample: {e}"))?;
        let (row, pass) = solve_one(&tri, &odd, 0);
        let results = json!({
            "rows": [row],
            "image_audit": format!("{:?}", certify_no_small_image(&tri, &odd, 1.0)),
        });
        let rep = rb.finish(results, pass);
        emit(out, &rep)?;
        return Ok(if pass { 0 } else { 1 });
    }
    if !args.random {
        bail!("either --map-file or --random is required");
    }
    if !(2..=4).contains(&args.n) {
        bail!("ambient dimension must be 2, 3 or 4");
    }
    if args.n - 1 < args.k {
        bail!(
            "the sphere dimension {} is below the value dimension {}; the hypothesis needs n > k",
            args.n - 1,
            args.k
        );
    }
    let tri = SymmetricTriangulation::build(args.n, args.subdiv).map_err(|e| anyhow!("{e}"))?;
    let seeds: Vec<u64> = (0..args.batch as u64).map(|d| args.seed + d).collect();
    let cap = report::thread_cap().max(1);
    let mut rows = Vec::with_capacity(seeds.len());
    let mut ok = true;
    for chunk in seeds.chunks(cap) {
        let outputs: Vec<(serde_json::Value, bool)> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&seed| {
                    let tri = &tri;
                    let k = args.k;
                    scope.spawn(move || {
                        let sample = OddMapSample::random(tri, k, seed);
                        solve_one(tri, &sample, seed)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("solver thread")).collect()
        });
        for (row, pass) in outputs {
            ok &= pass;
            rows.push(row);
        }
    }
    let results = json!({
        "n": args.n,
        "k": args.k,
        "subdiv": args.subdiv,
        "mesh": tri.mesh(),
        "rows": rows,
    });
    let rep = rb.finish(results, ok);
    emit(out, &rep)?;
    Ok(if ok { 0 } else { 1 })
}

fn solve_one(
    tri: &SymmetricTriangulation,
    sample: &OddMapSample,
    seed: u64,
) -> (serde_json::Value, bool) {
    let (eps, delta) = continuity_modulus(tri, sample);
    match find_near_zero(tri, sample) {
        Ok(w) => {
            let pass = w.value_norm <= 1e-9 && w.nearest_vertex_value_norm <= 2.0 * eps + 1e-12;
            (
                json!({
                    "seed": seed,
                    "eps_est": eps,
                    "delta_est": delta,
                    "witness": {
                        "x0": w.point,
                        "value": w.value,
                        "simplex": w.simplex,
                        "value_norm": w.value_norm,
                        "nearest_vertex": w.nearest_vertex,
                        "nearest_vertex_value_norm": w.nearest_vertex_value_norm,
                    },
                    "ok": pass,
                }),
                pass,
            )
        }
        Err(e) => (json!({"seed": seed, "error": e.to_string(), "ok": false}), false),
    }
}

fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("sweep must be lo:hi:steps");
    }
    let lo: f64 = parts[0].parse()?;
    let hi: f64 = parts[1].parse()?;
    let steps: usize = parts[2].parse()?;
    if steps < 1 || hi < lo {
        bail!("bad sweep range");
    }
    Ok((0..steps)
        .map(|j| if steps == 1 { lo } else { lo + (hi - lo) * j as f64 / (steps - 1) as f64 })
        .collect())
}

fn write_csv(
    dir: &Option<PathBuf>,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let Some(dir) = dir else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_norms(args: NormsArgs, out: &Option<PathBuf>) -> Result<i32> {
    let rb = ReportBuilder::new(args.seed);
    let sweep = parse_sweep(&args.r_sweep)?;
    let results = match args.scenario.as_str() {
        "hexagon" => norms_hexagon(&args, &sweep)?,
        "s1-arc" => norms_circle(&args, &sweep)?,
        "r2" | "t2" | "so3" => norms_algebra(&args, &sweep)?,
        "cyclic-tower" => norms_tower(&args)?,
        other => bail!("unknown norms scenario {other}"),
    };
    let rep = rb.finish(results, true);
    emit(out, &rep)?;
    Ok(0)
}

fn norms_hexagon(args: &NormsArgs, sweep: &[f64]) -> Result<serde_json::Value> {
    let map = hexagon_approximation(args.index);
    let mut norm_rows = Vec::new();
    let mut zero_sets = Vec::new();
    for &r in sweep {
        // Neighborhood = ball of radius r in the basepoint metric of the
        // table group.
        let a = SymSet::from_iter(
            map.source
                .elements()
                .map_err(|e| anyhow!("{e}"))?
                .into_iter()
                .filter(|&e| map.source.dist_to_id(e) < r),
        );
        for e in map.source.elements().map_err(|e| anyhow!("{e}"))? {
            norm_rows.push(vec![
                format!("{r}"),
                format!("{:?}", e),
                format!("{}", escape_norm(&map.source, &a, e)),
            ]);
        }
        let z = zero_set(&map.source, &a).map_err(|e| anyhow!("{e}"))?;
        zero_sets.push(json!({
            "r": r,
            "order": z.members.len(),
            "is_subgroup": z.is_subgroup,
        }));
    }
    write_csv(&args.csv, "norms.csv", &["r", "element", "escape_norm"], &norm_rows)?;
    Ok(json!({"scenario": "hexagon", "zero_sets": zero_sets}))
}

fn norms_circle(args: &NormsArgs, sweep: &[f64]) -> Result<serde_json::Value> {
    let m = egh_core::group::ModelGroup::Torus { radii: vec![1.0] };
    let mut rows = Vec::new();
    let mut limsup = Vec::new();
    for &r in sweep {
        let set = TargetSet::Ball { radius: r, closed: false };
        let n = 24 * i64::from(args.index.max(1));
        for k in 1..n.min(24) {
            let angle = 2.0 * core::f64::consts::PI * k as f64 / n as f64;
            let g = MElem::Coords(vec![angle]);
            let norm = escape_norm_model(&m, &set, &g, DEFAULT_M_CAP);
            rows.push(vec![format!("{r}"), format!("{angle}"), format!("{norm}")]);
        }
        let ms: Vec<u32> = (1..=100).collect();
        let rep = check_limsup_formula(&m, &set, &[1.0], &ms, 0.001, 50.0, DEFAULT_M_CAP);
        limsup.push(json!({
            "r": r,
            "algebra_norm": rep.algebra_norm,
            "max_error": rep.max_error,
            "chains_ok": rep.lower_chain_ok && rep.upper_chain_ok,
        }));
    }
    write_csv(&args.csv, "norms.csv", &["r", "angle", "escape_norm"], &rows)?;
    Ok(json!({"scenario": "s1-arc", "limsup": limsup}))
}

fn norms_algebra(args: &NormsArgs, sweep: &[f64]) -> Result<serde_json::Value> {
    let (model, _) = match args.scenario.as_str() {
        "r2" => scenarios::algebra_r2(),
        "t2" => scenarios::algebra_t2(),
        _ => scenarios::algebra_so3(),
    };
    let dim = model.dim();
    let dirs = scenarios::fixed_directions(dim, 24, args.seed);
    let mut tau_rows = Vec::new();
    let mut word_rows = Vec::new();
    let mut summary = Vec::new();
    for &r in sweep {
        let set = TargetSet::Ball { radius: r, closed: false };
        for d in &dirs {
            let (tau, n) = tau_and_algebra_norm(&model, &set, d, 0.01, 1e4);
            tau_rows.push(vec![
                format!("{r}"),
                format!("{d:?}"),
                tau.value().map_or("inf".into(), |t| format!("{t}")),
                format!("{n}"),
            ]);
        }
        // Sampled two-letter words of ball elements for the subadditivity
        // ratio.
        let words: Vec<Vec<MElem>> = dirs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let t = 0.1 + 0.05 * (i % 5) as f64;
                let v: Vec<f64> = d.iter().map(|x| x * t * r).collect();
                vec![model.exp(&v), model.exp(&v)]
            })
            .collect();
        let est = estimate_gleason_constant_model(&model, &set, &words, DEFAULT_M_CAP);
        for (i, w) in words.iter().enumerate() {
            word_rows.push(vec![format!("{r}"), format!("{i}"), format!("{}", w.len())]);
        }
        let c0 = est.c0.max(1.0);
        let hull = convex_hull_norm(&model, &set, &dirs, 0.01, 1e4);
        let sandwich_ok = match &hull {
            Ok(ev) => dirs.iter().all(|d| {
                let v: Vec<f64> = d.iter().map(|x| x * 0.37 * r).collect();
                let vn = tau_and_algebra_norm(&model, &set, &v, 0.005, 1e4).1;
                match ev.gauge(&v) {
                    Some(g) => vn <= g + 1e-6 && g <= 2.0 * c0 * vn + 1e-6,
                    None => false,
                }
            }),
            Err(_) => false,
        };
        summary.push(json!({
            "r": r,
            "c0_estimate": est.c0,
            "zero_denominator_violations": est.violations.len(),
            "sandwich_ok": sandwich_ok,
        }));
    }
    write_csv(&args.csv, "tau.csv", &["r", "direction", "tau", "algebra_norm"], &tau_rows)?;
    write_csv(&args.csv, "words.csv", &["r", "word", "length"], &word_rows)?;
    Ok(json!({"scenario": args.scenario, "sweep": summary}))
}

fn norms_tower(args: &NormsArgs) -> Result<serde_json::Value> {
    let rep = tower_instability(2, args.index.max(3));
    Ok(json!({
        "scenario": "cyclic-tower",
        "levels": rep.levels.iter().map(|l| json!({
            "delta": l.delta,
            "order": l.members.len(),
        })).collect::<Vec<_>>(),
        "no_stable_maximum": rep.unstable,
    }))
}

fn cmd_scenario(args: ScenarioArgs, out: &Option<PathBuf>) -> Result<i32> {
    let ScenarioAction::Export { name, index, dir } = args.action;
    let rb = ReportBuilder::new(DEFAULT_SEED);
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    let save_triple = |t: &Triple, file: &str, written: &mut Vec<String>| -> Result<()> {
        let path = dir.join(file);
        write_json(&path, &TripleJson::from_core(t))?;
        written.push(path.display().to_string());
        Ok(())
    };
    match name.as_str() {
        "hexagon" => {
            let s = hexagon_graph(index);
            save_triple(&s.triple, &format!("hexagon-{index}.triple.json"), &mut written)?;
            let map = hexagon_approximation(index);
            let path = dir.join(format!("hexagon-{index}.map.json"));
            write_json(&path, &MapJson::from_core(&map))?;
            written.push(path.display().to_string());
        }
        "collapsing-sphere" => {
            let s = collapsing_sphere(index, 1, 16);
            save_triple(&s.triple, &format!("sphere-{index}.triple.json"), &mut written)?;
        }
        "ray" => {
            save_triple(
                &scenarios::truncated_ray(index as usize),
                &format!("ray-{index}.triple.json"),
                &mut written,
            )?;
        }
        "point" => {
            save_triple(&point_triple(), "point.triple.json", &mut written)?;
        }
        "cyclic-tower" => {
            let map = cyclic_tower(2, index);
            let path = dir.join(format!("tower-2-{index}.map.json"));
            write_json(&path, &MapJson::from_core(&map))?;
            written.push(path.display().to_string());
        }
        "torus-collapse" => {
            let s = torus_collapse(index.max(2), 16);
            save_triple(&s.triple, &format!("torus-{index}.triple.json"), &mut written)?;
            let path = dir.join(format!("torus-{index}.map.json"));
            write_json(&path, &MapJson::from_core(&s.map))?;
            written.push(path.display().to_string());
        }
        other if other.starts_with("counterexample-") => {
            let which = match other {
                "counterexample-i" => Condition::I,
                "counterexample-ii" => Condition::II,
                "counterexample-iii" => Condition::III,
                "counterexample-iv" => Condition::IV,
                "counterexample-v" => Condition::V,
                _ => bail!("unknown counterexample {other}"),
            };
            let map = counterexample(which, index);
            let path = dir.join(format!("{other}-{index}.map.json"));
            write_json(&path, &MapJson::from_core(&map))?;
            written.push(path.display().to_string());
        }
        other => bail!("unknown scenario {other}"),
    }
    let rep = rb.finish(json!({"written": written}), true);
    emit(out, &rep)?;
    Ok(0)
}
