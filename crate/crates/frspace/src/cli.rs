//! Command-line interface: verification suites, pointwise evaluation,
//! classification grids, and geodesic integration.
//!
//! Exit codes: 0 on success, 1 when a check fails, 2 on usage errors.

use crate::error::{Error, Result};
use crate::fields;
use crate::jets::PointJet;
use crate::landsberg::{self, ProbeConfig};
use crate::metric;
use crate::spray;
use crate::verify::{self, Suite, TolProfile, VerifyConfig};
use crate::cartan;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "frspace",
    version,
    about = "Evaluate and verify the regularized Finsleroid metric family"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SuiteArg {
    Metric,
    Cartan,
    Spray,
    Landsberg,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Metric => Suite::Metric,
            SuiteArg::Cartan => Suite::Cartan,
            SuiteArg::Spray => Suite::Spray,
            SuiteArg::Landsberg => Suite::Landsberg,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TolProfileArg {
    Default,
    Strict,
}

impl From<TolProfileArg> for TolProfile {
    fn from(p: TolProfileArg) -> TolProfile {
        match p {
            TolProfileArg::Default => TolProfile::Default,
            TolProfileArg::Strict => TolProfile::Strict,
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Space dimension (N >= 2).
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Random states per check.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Master seed; all sampling is derived from it.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "default")]
    pub tol_profile: TolProfileArg,
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    /// Report file (JSON); stdout summary is printed either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for the check pool.
    #[arg(long, env = "FRSPACE_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Field definition file (requires --x).
    #[arg(long, conflicts_with = "jet")]
    pub field: Option<PathBuf>,
    /// Jet file with the point data.
    #[arg(long)]
    pub jet: Option<PathBuf>,
    /// Evaluation point, comma-separated (with --field).
    #[arg(long)]
    pub x: Option<String>,
    /// Tangent vector, comma-separated.
    #[arg(long)]
    pub y: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TheoremsArgs {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Number of jet seeds per grid cell family.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Proportionality constants, comma-separated.
    #[arg(long, default_value = "0,0.2,0.5,-0.4")]
    pub k_grid: String,
    /// Charge values, comma-separated.
    #[arg(long, default_value = "0,0.8,1.4,-1.0")]
    pub g_grid: String,
    /// Axis norms, comma-separated.
    #[arg(long, default_value = "0.3,0.5,0.7,0.9")]
    pub c_grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "FRSPACE_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GeodesicArgs {
    #[arg(long)]
    pub field: PathBuf,
    /// Start point, comma-separated.
    #[arg(long)]
    pub x0: String,
    /// Start velocity, comma-separated.
    #[arg(long)]
    pub y0: String,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Trajectory CSV output.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run identity suites over random jets and write a JSON report.
    Verify(VerifyArgs),
    /// Evaluate all tensors at one (point, tangent) state.
    Eval(EvalArgs),
    /// Run the Berwald/Landsberg classification grids.
    Theorems(TheoremsArgs),
    /// Integrate a geodesic on a field and write the trajectory CSV.
    Geodesic(GeodesicArgs),
}

/// Everything evaluated at one state, serialized with full precision.
#[derive(Serialize)]
struct EvalReport {
    dim: usize,
    x: Option<Vec<f64>>,
    y: Vec<f64>,
    c: f64,
    g: f64,
    k: f64,
    j: f64,
    scalars: ScalarBlock,
    y_low: Vec<f64>,
    metric_tensor: Vec<Vec<f64>>,
    metric_inverse: Vec<Vec<f64>>,
    angular_tensor: Vec<Vec<f64>>,
    det_metric: f64,
    cartan_tensor: Vec<Vec<Vec<f64>>>,
    cartan_trace: Vec<f64>,
    shape_scalar_x: f64,
    cartan_norm: f64,
    main_scalar: Option<f64>,
    spray: Vec<f64>,
    charge_terms: Vec<f64>,
    bdot: f64,
    covariant_db: Vec<f64>,
    adot: Vec<Vec<Vec<f64>>>,
    berwald_verdict: String,
}

#[derive(Serialize)]
struct ScalarBlock {
    h: f64,
    gq: f64,
    b_form: f64,
    l: f64,
    f: f64,
    nu: f64,
    eta: f64,
    mbar: f64,
}

fn parse_vector(text: &str, what: &str) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> = text
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<f64>())
        .collect();
    vals.map_err(|e| Error::Invalid(format!("cannot parse {what} '{text}': {e}")))
}

fn mat_to_vec(m: &ndarray::Array2<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn tensor3_to_vec(t: &ndarray::Array3<f64>) -> Vec<Vec<Vec<f64>>> {
    let (a, b, c) = t.dim();
    (0..a)
        .map(|i| {
            (0..b)
                .map(|j| (0..c).map(|k| t[(i, j, k)]).collect())
                .collect()
        })
        .collect()
}

fn write_or_print<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{}", text),
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let cfg = VerifyConfig {
        dim: args.dim,
        samples: args.samples,
        seed: args.seed,
        profile: args.tol_profile.into(),
        jobs: args.jobs,
    };
    let report = verify::run_suite(args.suite.into(), &cfg)?;
    for cell in &report.cells {
        println!(
            "{} {:<40} residual {:.3e}  tol {:.1e}  ({} samples)",
            if cell.pass { "PASS" } else { "FAIL" },
            cell.check_id,
            cell.max_residual,
            cell.tolerance,
            cell.samples
        );
    }
    println!(
        "suite {}: {}",
        report.suite,
        if report.pass { "PASS" } else { "FAIL" }
    );
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report.pass)
}

fn eval_state(jet: &PointJet, x: Option<Vec<f64>>, y: &[f64]) -> Result<EvalReport> {
    let (k, j, sc) = metric::metric_k(jet, y)?;
    let ev = metric::metric_tensor(jet, y)?;
    let ce = cartan::CartanEval::evaluate(jet, y)?;
    let out = spray::spray(jet, y)?;
    let bdot = spray::dot_b(jet, y)?;
    let db = spray::covariant_db(jet, y)?;
    let adot = landsberg::dot_a_numeric(jet, y)?;
    let verdict = landsberg::berwald_verdict(jet)?;
    Ok(EvalReport {
        dim: jet.dim(),
        x,
        y: y.to_vec(),
        c: jet.c(),
        g: jet.g(),
        k,
        j,
        scalars: ScalarBlock {
            h: sc.h,
            gq: sc.gq,
            b_form: sc.b_form,
            l: sc.l,
            f: sc.f,
            nu: sc.nu,
            eta: sc.eta,
            mbar: sc.mbar,
        },
        y_low: ev.y_low.to_vec(),
        metric_tensor: mat_to_vec(&ev.gmat),
        metric_inverse: mat_to_vec(&ev.ginv),
        angular_tensor: mat_to_vec(&ev.hmat),
        det_metric: ev.det_g,
        cartan_tensor: tensor3_to_vec(&ce.a3),
        cartan_trace: ce.a1.to_vec(),
        shape_scalar_x: ce.x,
        cartan_norm: ce.aa,
        main_scalar: ce.main_scalar,
        spray: out.g.to_vec(),
        charge_terms: out.e.to_vec(),
        bdot,
        covariant_db: db.to_vec(),
        adot: tensor3_to_vec(&adot),
        berwald_verdict: verdict.verdict.to_string(),
    })
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let y = parse_vector(&args.y, "tangent vector")?;
    let (jet, x) = match (&args.field, &args.jet) {
        (Some(field_path), None) => {
            let x_text = args.x.as_ref().ok_or_else(|| {
                Error::Invalid("--x is required when evaluating a field".into())
            })?;
            let x = parse_vector(x_text, "evaluation point")?;
            let field = fields::load_field(field_path)?;
            (field.jet_at(&x)?, Some(x))
        }
        (None, Some(jet_path)) => (PointJet::load(jet_path)?, None),
        _ => {
            return Err(Error::Invalid(
                "exactly one of --field or --jet must be given".into(),
            ))
        }
    };
    let report = eval_state(&jet, x, &y)?;
    write_or_print(&report, &args.out)?;
    if args.out.is_some() {
        println!(
            "K = {:.17e}, verdict {}",
            report.k, report.berwald_verdict
        );
    }
    Ok(())
}

fn cmd_theorems(args: &TheoremsArgs) -> Result<bool> {
    let cfg = ProbeConfig::new(
        args.dim,
        (0..args.seeds).collect(),
        parse_vector(&args.k_grid, "k grid")?,
        parse_vector(&args.g_grid, "g grid")?,
        parse_vector(&args.c_grid, "c grid")?,
    );
    let run = |cfg: &ProbeConfig| landsberg::landsberg_to_berwald_probe(cfg);
    let report = if let Some(jobs) = args.jobs {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Invalid(format!("worker pool: {e}")))?;
        pool.install(|| run(&cfg))?
    } else {
        run(&cfg)?
    };
    println!(
        "cells: {}   dual-route residual: {:.3e}   zero-cell norm: {:.3e}   smallest nonzero norm: {:.3e}",
        report.cells.len(),
        report.max_dual_route_residual,
        report.max_zero_cell_norm,
        report.min_nonzero_cell_norm
    );
    let berwald = report
        .cells
        .iter()
        .filter(|c| c.berwald_verdict == "BERWALD")
        .count();
    println!(
        "verdicts: {} BERWALD, {} other; regularization scaling rows: {}",
        berwald,
        report.cells.len() - berwald,
        report.scaling.len()
    );
    println!("probe: {}", if report.pass { "PASS" } else { "FAIL" });
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report.pass)
}

fn cmd_geodesic(args: &GeodesicArgs) -> Result<()> {
    let field = fields::load_field(&args.field)?;
    let x0 = parse_vector(&args.x0, "start point")?;
    let y0 = parse_vector(&args.y0, "start velocity")?;
    let traj = fields::integrate_geodesic(&field, &x0, &y0, args.dt, args.steps)?;
    std::fs::write(&args.out, traj.to_csv())?;
    println!(
        "steps: {}   K drift: {:.3e}   final t: {:.6}",
        traj.points.len() - 1,
        traj.k_drift,
        traj.points.last().map(|p| p.t).unwrap_or(0.0)
    );
    Ok(())
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Verify(args) => cmd_verify(args).map(|pass| if pass { 0 } else { 1 }),
        Command::Eval(args) => cmd_eval(args).map(|_| 0),
        Command::Theorems(args) => cmd_theorems(args).map(|pass| if pass { 0 } else { 1 }),
        Command::Geodesic(args) => cmd_geodesic(args).map(|_| 0),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Invalid(_) | Error::DimensionTooSmall(_) | Error::BadRange { .. } => 2,
                _ => 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_parsing_accepts_commas_and_spaces() {
        assert_eq!(parse_vector("1,2.5,-3", "t").unwrap(), vec![1.0, 2.5, -3.0]);
        assert_eq!(parse_vector("1 2.5 -3", "t").unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(parse_vector("1,zz", "t").is_err());
    }

    #[test]
    fn cli_parses_verify_flags() {
        let cli = Cli::try_parse_from([
            "frspace", "verify", "--dim", "4", "--samples", "50", "--seed", "7", "--suite",
            "metric", "--tol-profile", "strict",
        ])
        .unwrap();
        match cli.command {
            Command::Verify(args) => {
                assert_eq!(args.dim, 4);
                assert_eq!(args.samples, 50);
                assert_eq!(args.seed, 7);
            }
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn missing_tangent_vector_is_a_usage_error() {
        let err = Cli::try_parse_from(["frspace", "eval", "--jet", "jet.json"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
