//! Command-line front end: each subcommand builds a map, runs one
//! experiment and writes its CSV/JSON artifacts to the output directory.

mod repro;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::cones::{check_cone_invariance, ConeField, ConeKind};
use crate::entropy::{
    bowen_inequality_check, certify_jump, coverage_csv, estimate_entropy, estimate_on_sample,
    fiber_entropy, transitivity_scan, CertifyParams, EntropyEstimate, EntropyParams,
};
use crate::error::{Error, Result};
use crate::maps::{resolve, MapConfig, MapModel};
use crate::semiconj::{solve_franks, CenterFrame, ClassSearch, SolverParams};
use crate::torus::{SampleGrid, TorusPoint};

pub use repro::{run_repro, ReproRow, ReproSettings};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "toral",
    version,
    about = "Entropy, semi-conjugacy and cone experiments on torus maps"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Named map (cat, paper-t4, mane-t2-default, t4-example-default)
    #[arg(long, global = true)]
    pub map: Option<String>,
    /// JSON map description; overrides --map
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts
    #[arg(
        long,
        global = true,
        env = "TORAL_OUT_DIR",
        default_value = "toral-out"
    )]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads, 0 for one per core
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy and spectrum of the linear part
    LinearEntropy,
    /// Bowen count table and entropy estimate
    Estimate(EstimateArgs),
    /// Solve for the semi-conjugacy displacement on a grid
    Semiconj(SemiconjArgs),
    /// Entropy of a sampled preimage class h⁻¹(x)
    Fiber(FiberArgs),
    /// Lower-bound certificate for the entropy jump
    Certify(CertifyArgs),
    /// Cone invariance certificate
    Cones(ConesArgs),
    /// Orbit coverage of dyadic boxes
    ScanTransitivity(ScanArgs),
    /// Run every acceptance experiment and write a summary table
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Region {
    /// Uniform sample of the whole torus
    Torus,
    /// Grid on the center plane over the horseshoe (T⁴ example only)
    ChartPlane,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Descending scales; defaults depend on the region
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Region::Torus)]
    pub region: Region,
    /// Uniform sample size for the torus region
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Grid points per side for the chart-plane region
    #[arg(long, default_value_t = 150)]
    pub plane_points: usize,
}

#[derive(Debug, Args)]
pub struct SemiconjArgs {
    /// Nodes per axis; defaults to 512 on T² and 16 on T⁴
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct FiberArgs {
    /// Point x of the class h⁻¹(x), comma separated; defaults to h(0)
    #[arg(long, value_delimiter = ',')]
    pub point: Vec<f64>,
    /// Center of the candidate search; defaults to the origin
    #[arg(long, value_delimiter = ',')]
    pub search_center: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.04, 0.02, 0.01, 0.005])]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub search_half_width: f64,
    #[arg(long, default_value_t = 401)]
    pub search_points: usize,
    /// Also estimate h(f) on this many uniform points and check Bowen's inequality
    #[arg(long)]
    pub bowen_samples: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    pub slack: f64,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Isotopy time of the horseshoe being checked
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    #[arg(long, default_value_t = 4000)]
    pub points: usize,
    #[arg(long, default_value_t = 64)]
    pub directions: usize,
    #[arg(long, default_value_t = 1.0)]
    pub aperture: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConeArg {
    Unstable,
    Stable,
}

#[derive(Debug, Args)]
pub struct ConesArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 64)]
    pub directions: usize,
    #[arg(long, default_value_t = 1.0)]
    pub aperture: f64,
    #[arg(long, value_enum, default_value_t = ConeArg::Unstable)]
    pub kind: ConeArg,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 10_000_000)]
    pub iterations: u64,
    /// Boxes of side 2^-bits
    #[arg(long, default_value_t = 3)]
    pub bits: u32,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// Reduced sample sizes for a fast smoke run
    #[arg(long)]
    pub quick: bool,
}

/// What a command leaves behind: the JSON printed on stdout and the files
/// written.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub summary: serde_json::Value,
    pub files: Vec<PathBuf>,
}

/// Parse, run and map errors to exit codes (0, 2, 3).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(out) => {
            use std::io::Write;
            let text = serde_json::to_string_pretty(&out.summary).expect("serializable");
            // a closed pipe on stdout is not a failure of the command
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            0
        }
        Err(e) => {
            let diag = json!({ "schema_version": SCHEMA_VERSION, "error": e.to_string(), "exit_code": e.exit_code() });
            eprintln!("{diag}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    if g.threads > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(g.threads)
            .build_global();
    }
    match &cli.command {
        Command::LinearEntropy => linear_entropy_cmd(g),
        Command::Estimate(a) => estimate_cmd(g, a),
        Command::Semiconj(a) => semiconj_cmd(g, a),
        Command::Fiber(a) => fiber_cmd(g, a),
        Command::Certify(a) => certify_cmd(g, a),
        Command::Cones(a) => cones_cmd(g, a),
        Command::ScanTransitivity(a) => scan_cmd(g, a),
        Command::Repro(a) => {
            let settings = if a.quick {
                ReproSettings::quick()
            } else {
                ReproSettings::default()
            };
            let rows = run_repro(&settings, g.seed)?;
            let files = write_repro(&g.out, &rows)?;
            let passed = rows.iter().filter(|r| r.passed).count();
            let summary = json!({
                "schema_version": SCHEMA_VERSION,
                "passed": passed,
                "total": rows.len(),
                "rows": rows,
            });
            if passed < rows.len() {
                return Err(Error::Numerical(format!(
                    "{} of {} checks failed; see {}",
                    rows.len() - passed,
                    rows.len(),
                    files[0].display()
                )));
            }
            Ok(Outcome { summary, files })
        }
    }
}

fn load(g: &GlobalArgs) -> Result<(MapConfig, MapModel)> {
    let cfg = resolve(g.map.as_deref(), g.config.as_deref())?;
    let model = cfg.build()?;
    Ok((cfg, model))
}

fn map_name(g: &GlobalArgs) -> String {
    match (&g.config, &g.map) {
        (Some(p), _) => p.display().to_string(),
        (None, Some(n)) => n.clone(),
        (None, None) => String::new(),
    }
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(name);
    std::fs::write(&p, text)?;
    Ok(p)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf> {
    write_text(dir, name, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn point_arg(v: &[f64], d: usize, what: &str) -> Result<Option<TorusPoint>> {
    if v.is_empty() {
        return Ok(None);
    }
    if v.len() != d {
        return Err(Error::Config(format!(
            "{what} needs {d} coordinates, got {}",
            v.len()
        )));
    }
    Ok(Some(TorusPoint::wrapped(v)))
}

fn linear_entropy_cmd(g: &GlobalArgs) -> Result<Outcome> {
    let (cfg, _) = load(g)?;
    let a = match &cfg {
        MapConfig::Linear { matrix, .. } => matrix.clone(),
        _ => cfg.build()?.linear_part().clone(),
    };
    let entropy = a.entropy()?;
    let eigenvalues: Vec<[f64; 2]> = a.eigenvalues().iter().map(|l| [l.re, l.im]).collect();
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "map": map_name(g),
        "matrix": a.rows(),
        "eigenvalues": eigenvalues,
        "entropy": entropy,
    });
    Ok(Outcome {
        summary,
        files: Vec::new(),
    })
}

fn estimate_cmd(g: &GlobalArgs, a: &EstimateArgs) -> Result<Outcome> {
    let (_, model) = load(g)?;
    let f = model.torus_map();
    if a.n_min == 0 || a.n_min > a.n_max {
        return Err(Error::Config(format!(
            "bad n-range {}..={}",
            a.n_min, a.n_max
        )));
    }
    let default_eps = match a.region {
        Region::Torus => EntropyParams::default().epsilons,
        Region::ChartPlane => vec![0.016, 0.008, 0.004, 0.002],
    };
    let params = EntropyParams {
        ns: (a.n_min..=a.n_max).collect(),
        epsilons: if a.eps.is_empty() {
            default_eps
        } else {
            a.eps.clone()
        },
        ..EntropyParams::default()
    };
    let est = match a.region {
        Region::Torus => {
            estimate_entropy(f, &SampleGrid::uniform(f.dim(), a.samples, g.seed), &params)?
        }
        Region::ChartPlane => {
            let MapModel::T4(ex) = &model else {
                return Err(Error::Config(
                    "the chart-plane region needs a T⁴ example map".into(),
                ));
            };
            let [r0, r1] = ex.isotopy().rectangles();
            let q = [
                r0.x0.min(r1.x0),
                r0.x1.max(r1.x1),
                r0.y0.min(r1.y0),
                r0.y1.max(r1.y1),
            ];
            let coords: Vec<f64> = ex
                .center_plane_grid(q, a.plane_points)
                .iter()
                .flat_map(|p| p.coords().to_vec())
                .collect();
            estimate_on_sample(f, &coords, &params)?
        }
    };
    let files = vec![
        write_text(&g.out, "estimate.csv", &est.table.to_csv_string())?,
        write_json(&g.out, "estimate.json", &est)?,
    ];
    Ok(Outcome {
        summary: estimate_summary(g, &est),
        files,
    })
}

fn estimate_summary(g: &GlobalArgs, est: &EntropyEstimate) -> serde_json::Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "map": map_name(g),
        "value": est.value,
        "band": est.band,
        "best_eps": est.best_eps,
        "sandwich_violations": est.table.sandwich_violations().len(),
    })
}

fn solver_grid(d: usize, grid: Option<usize>) -> Vec<usize> {
    let n = grid.unwrap_or(if d <= 2 { 512 } else { 16 });
    vec![n; d]
}

fn semiconj_cmd(g: &GlobalArgs, a: &SemiconjArgs) -> Result<Outcome> {
    let (_, model) = load(g)?;
    let f = model.torus_map();
    let params = SolverParams {
        max_iter: a.max_iter,
        tol: a.tol,
        ..SolverParams::default()
    };
    let sol = solve_franks(f, &solver_grid(f.dim(), a.grid), &params)?;
    sol.field.save(&g.out, "semiconj", &map_name(g))?;
    let mut hist = String::from("iteration,residual\n");
    for (i, r) in sol.field.history.iter().enumerate() {
        hist.push_str(&format!("{},{}\n", i + 1, r));
    }
    let files = vec![
        g.out.join("semiconj.bin"),
        g.out.join("semiconj.json"),
        write_text(&g.out, "semiconj_history.csv", &hist)?,
    ];
    let report = sol.field.report(&map_name(g));
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "map": report.map,
        "residual": report.residual,
        "iterations": report.iterations,
        "converged": report.converged,
        "sup_norm": report.sup_norm,
    });
    if !sol.field.converged {
        return Err(Error::Numerical(format!(
            "solver stopped at residual {:e} after {} iterations",
            sol.field.residual, sol.field.iterations
        )));
    }
    Ok(Outcome { summary, files })
}

fn fiber_cmd(g: &GlobalArgs, a: &FiberArgs) -> Result<Outcome> {
    let (_, model) = load(g)?;
    let f = model.torus_map();
    let d = f.dim();
    let sol = solve_franks(f, &solver_grid(d, a.grid), &SolverParams::default())?;
    let center =
        point_arg(&a.search_center, d, "--search-center")?.unwrap_or_else(|| TorusPoint::origin(d));
    let x = match point_arg(&a.point, d, "--point")? {
        Some(x) => x,
        None => sol.evaluate_h(&center)?,
    };
    let search = ClassSearch {
        center_half_width: a.search_half_width,
        center_points: a.search_points,
        ..ClassSearch::default()
    };
    let cands = search.candidates(&center, CenterFrame::for_model(&model).as_ref());
    let params = EntropyParams {
        ns: (1..=a.n_max).collect(),
        epsilons: a.eps.clone(),
        ..EntropyParams::default()
    };
    let fe = fiber_entropy(&sol, &x, &cands, a.tol, &params)?;
    let mut bound = String::from("n,eps,log_count,log_bound,holds\n");
    for r in &fe.interval_bound {
        bound.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n, r.eps, r.log_count, r.log_bound, r.holds
        ));
    }
    let bowen = match a.bowen_samples {
        Some(n) => {
            let est = estimate_entropy(
                f,
                &SampleGrid::uniform(d, n, g.seed),
                &EntropyParams::default(),
            )?;
            Some(bowen_inequality_check(
                est.value,
                f.linear_part().entropy()?,
                &[fe.estimate.value],
                a.slack,
            ))
        }
        None => None,
    };
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "map": map_name(g),
        "point": x.coords(),
        "members": fe.class.members.len(),
        "diameter": fe.class.diameter,
        "length_bound": fe.length_bound,
        "fiber_rate": fe.estimate.value,
        "interval_bound_holds": fe.interval_bound_holds(),
        "bowen": bowen,
    });
    let files = vec![
        write_text(&g.out, "fiber.csv", &fe.estimate.table.to_csv_string())?,
        write_text(&g.out, "fiber_bound.csv", &bound)?,
        write_json(
            &g.out,
            "fiber.json",
            &json!({ "summary": summary, "estimate": fe.estimate, "class": fe.class }),
        )?,
    ];
    Ok(Outcome { summary, files })
}

fn certify_cmd(g: &GlobalArgs, a: &CertifyArgs) -> Result<Outcome> {
    let (_, model) = load(g)?;
    let params = CertifyParams {
        t: a.t,
        points: a.points,
        directions: a.directions,
        aperture: a.aperture,
        seed: g.seed,
        ..CertifyParams::default()
    };
    let cert = certify_jump(&model, &params)?;
    let files = vec![write_json(&g.out, "certificate.json", &cert)?];
    Ok(Outcome {
        summary: serde_json::to_value(&cert)?,
        files,
    })
}

/// Sample points for cone checks: half in the perturbation chart and half
/// uniform for the constructed maps, all uniform otherwise.
pub fn cone_sample(model: &MapModel, samples: usize, seed: u64) -> Vec<TorusPoint> {
    let d = model.torus_map().dim();
    match model {
        MapModel::T4(ex) => {
            let mut pts = ex.sample_chart_points(samples / 2, seed);
            pts.extend(
                SampleGrid::uniform(d, samples - samples / 2, seed.wrapping_add(1)).points(),
            );
            pts
        }
        _ => SampleGrid::uniform(d, samples, seed).points(),
    }
}

fn cones_cmd(g: &GlobalArgs, a: &ConesArgs) -> Result<Outcome> {
    let (_, model) = load(g)?;
    let kind = match a.kind {
        ConeArg::Unstable => ConeKind::Unstable,
        ConeArg::Stable => ConeKind::Stable,
    };
    let cones = ConeField::for_model(&model, kind, a.aperture)?;
    let pts = cone_sample(&model, a.samples, g.seed);
    let cert = check_cone_invariance(model.torus_map(), &cones, &pts, a.directions, g.seed)?;
    let mut hist = String::from("lo,hi,count\n");
    for b in &cert.histogram {
        hist.push_str(&format!("{},{},{}\n", b.lo, b.hi, b.count));
    }
    let files = vec![
        write_json(&g.out, "cones.json", &cert)?,
        write_text(&g.out, "cones_histogram.csv", &hist)?,
    ];
    Ok(Outcome {
        summary: serde_json::to_value(&cert)?,
        files,
    })
}

fn scan_cmd(g: &GlobalArgs, a: &ScanArgs) -> Result<Outcome> {
    let (_, model) = load(g)?;
    let f = model.torus_map();
    let x0 = SampleGrid::uniform(f.dim(), 1, g.seed).points().remove(0);
    let curve = transitivity_scan(f, &x0, a.iterations, a.bits)?;
    let last = *curve.last().expect("at least one checkpoint");
    let files = vec![write_text(&g.out, "coverage.csv", &coverage_csv(&curve))?];
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "map": map_name(g),
        "x0": x0.coords(),
        "iterations": last.iterations,
        "visited": last.visited,
        "fraction": last.fraction,
    });
    Ok(Outcome { summary, files })
}

fn write_repro(dir: &Path, rows: &[ReproRow]) -> Result<Vec<PathBuf>> {
    let mut csv = String::from("criterion,name,passed,value,target\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.criterion, r.name, r.passed, r.value, r.target
        ));
    }
    Ok(vec![
        write_text(dir, "repro.csv", &csv)?,
        write_json(dir, "repro.json", &rows)?,
    ])
}
