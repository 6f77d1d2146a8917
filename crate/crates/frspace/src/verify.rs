//! Seeded verification suites with machine-readable reports.
//!
//! Every suite cell checks one identity over freshly sampled jets and tangent
//! vectors, comparing an algebraic closed form against an independently
//! differentiated route (or an exact reduction). Sampling is derived from the
//! master seed per (cell, sample) pair, so reports are reproducible across
//! runs and across worker counts.

use crate::cartan;
use crate::dual::{Dual, Scalar};
use crate::error::Result;
use crate::geom::{self, Geom};
use crate::jets::{self, PointJet};
use crate::landsberg;
use crate::linalg;
use crate::metric;
use crate::riemannian;
use crate::rng::{derive_seed, stream_rng};
use crate::spray;
use ndarray::{Array1, Array2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Which identity family to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Metric,
    Cartan,
    Spray,
    Landsberg,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Metric => "metric",
            Suite::Cartan => "cartan",
            Suite::Spray => "spray",
            Suite::Landsberg => "landsberg",
            Suite::All => "all",
        }
    }
}

/// Tolerance profile. The strict profile tightens each tolerance to the
/// geometric mean with double precision, floored at 1e-14.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TolProfile {
    Default,
    Strict,
}

impl TolProfile {
    pub fn name(self) -> &'static str {
        match self {
            TolProfile::Default => "default",
            TolProfile::Strict => "strict",
        }
    }

    pub fn apply(self, tol: f64) -> f64 {
        match self {
            TolProfile::Default => tol,
            TolProfile::Strict => (tol * 1e-16).sqrt().max(1e-14),
        }
    }
}

/// One identity check outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckCell {
    pub check_id: String,
    /// Plain statement of the identity being checked.
    pub formula: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub schema_version: u32,
    pub version: String,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol_profile: String,
    pub timestamp: u64,
    pub cells: Vec<CheckCell>,
    pub pass: bool,
}

impl VerificationReport {
    /// Report content with the timestamp zeroed, for determinism comparisons.
    pub fn normalized(&self) -> VerificationReport {
        let mut r = self.clone();
        r.timestamp = 0;
        r
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub profile: TolProfile,
    pub jobs: Option<usize>,
}

type CheckFn = fn(&VerifyConfig, u64) -> Result<(f64, usize)>;

struct CheckDef {
    id: &'static str,
    formula: &'static str,
    tol: f64,
    run: CheckFn,
}

// ---------------------------------------------------------------------------
// sampling helpers

const FULL_RANGE_C: (f64, f64) = (0.2, 0.9);
const FULL_RANGE_G: (f64, f64) = (-1.8, 1.8);

fn sample_jet(cfg: &VerifyConfig, tag: u64, i: usize) -> Result<PointJet> {
    jets::random_jet(cfg.dim, derive_seed(cfg.seed, tag, i as u64), FULL_RANGE_C, FULL_RANGE_G)
}

fn zero_charge_jet(cfg: &VerifyConfig, tag: u64, i: usize) -> Result<PointJet> {
    let base = sample_jet(cfg, tag, i)?;
    jets::build_point_jet(
        cfg.dim,
        base.a().clone(),
        base.da().clone(),
        base.b().clone(),
        base.db().clone(),
        0.0,
        Array1::zeros(cfg.dim),
    )
}

fn sample_tangent(cfg: &VerifyConfig, tag: u64, i: usize, dim: usize) -> Vec<f64> {
    let mut rng = stream_rng(derive_seed(cfg.seed, tag ^ 0x5941, i as u64), 1);
    loop {
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if y.iter().map(|t| t * t).sum::<f64>() > 0.05 {
            return y;
        }
    }
}

fn candidate_k(cfg: &VerifyConfig, tag: u64, i: usize) -> f64 {
    let mut rng = stream_rng(derive_seed(cfg.seed, tag ^ 0x4b4b, i as u64), 2);
    let mag: f64 = rng.random_range(0.15..1.0);
    if rng.random::<bool>() {
        mag
    } else {
        -mag
    }
}

fn candidate_jet(cfg: &VerifyConfig, tag: u64, i: usize, k: f64) -> Result<PointJet> {
    let mut rng = stream_rng(derive_seed(cfg.seed, tag ^ 0x6367, i as u64), 3);
    let c = rng.random_range(0.2..0.9);
    let mag: f64 = rng.random_range(0.3..1.7);
    let g = if rng.random::<bool>() { mag } else { -mag };
    jets::landsberg_candidate_jet_with(cfg.dim, derive_seed(cfg.seed, tag, i as u64), k, c, g)
}

fn max_abs3(t: &ndarray::Array3<f64>) -> f64 {
    t.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn max_abs4(t: &ndarray::Array4<f64>) -> f64 {
    t.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn riemannian_quadratic(jet: &PointJet, y: &[f64]) -> Array1<f64> {
    let gamma = riemannian::christoffel(jet);
    let n = jet.dim();
    Array1::from_shape_fn(n, |i| {
        let mut t = 0.0;
        for m in 0..n {
            for nn in 0..n {
                t += gamma[(i, m, nn)] * y[m] * y[nn];
            }
        }
        t
    })
}

// ---------------------------------------------------------------------------
// metric suite

fn check_pythagorean(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (b_form, l) = metric::characteristic_form(&jet, &y)?;
        let (h, _) = metric::charge_functions(jet.g())?;
        let ts = jets::TangentState::new(&jet, &y)?;
        worst = worst.max((l * l + h * h * ts.b * ts.b - b_form).abs() / b_form);
    }
    Ok((worst, cfg.samples))
}

fn check_determinant(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let ev = metric::metric_tensor(&jet, &y)?;
        let (k, _, sc) = metric::metric_k(&jet, &y)?;
        let ts = jets::TangentState::new(&jet, &y)?;
        let det_a = linalg::determinant(jet.a());
        let predicted = sc.nu / ts.q * (k * k / sc.b_form).powi(jet.dim() as i32) * det_a;
        worst = worst.max((ev.det_g / predicted - 1.0).abs());
        if ev.det_g <= 0.0 {
            worst = worst.max(1.0);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_axis_compression(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let bup = jet.b_up().to_vec();
        let (b_form, _) = metric::characteristic_form(&jet, &bup)?;
        let (_, _, sc) = metric::metric_k(&jet, &bup)?;
        let c2 = jet.c() * jet.c();
        worst = worst.max((sc.eta * b_form / c2 - 1.0).abs());
    }
    Ok((worst, cfg.samples))
}

fn check_riemannian_reduction(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = zero_charge_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let ev = metric::metric_tensor(&jet, &y)?;
        let scale = linalg::max_abs(jet.a());
        for idx in 0..cfg.dim {
            for j in 0..cfg.dim {
                worst = worst.max((ev.gmat[(idx, j)] - jet.a()[(idx, j)]).abs() / scale);
            }
        }
    }
    Ok((worst, cfg.samples))
}

fn check_homogeneity_k(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (k1, _, _) = metric::metric_k(&jet, &y)?;
        for lambda in [0.5_f64, 2.0, 10.0] {
            let y2: Vec<f64> = y.iter().map(|t| lambda * t).collect();
            let (k2, _, _) = metric::metric_k(&jet, &y2)?;
            worst = worst.max((k2 - lambda * k1).abs() / (lambda * k1));
        }
    }
    Ok((worst, cfg.samples))
}

fn check_homogeneity_metric(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let ev = metric::metric_tensor(&jet, &y)?;
        let scale = linalg::max_abs(&ev.gmat);
        for lambda in [0.5_f64, 2.0, 10.0] {
            let y2: Vec<f64> = y.iter().map(|t| lambda * t).collect();
            let ev2 = metric::metric_tensor(&jet, &y2)?;
            for idx in 0..cfg.dim {
                for j in 0..cfg.dim {
                    worst = worst.max((ev2.gmat[(idx, j)] - ev.gmat[(idx, j)]).abs() / scale);
                }
            }
        }
    }
    Ok((worst, cfg.samples))
}

fn check_lowered_contraction(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let ylow = metric::covariant_y(&jet, &y)?;
        let (k, _, _) = metric::metric_k(&jet, &y)?;
        let contraction: f64 = ylow.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        worst = worst.max((contraction - k * k).abs() / (k * k));
    }
    Ok((worst, cfg.samples))
}

fn check_lowered_gradient(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    // closed covector vs the differentiated half-gradient of K^2
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let ylow = metric::covariant_y(&jet, &y)?;
        let g = Geom::from_jet(&jet);
        let lifted = g.lift();
        let scale = ylow.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for k in 0..cfg.dim {
            let mut yd: Array1<Dual<f64>> =
                Array1::from_vec(y.iter().map(|&t| Dual::constant(t)).collect());
            yd[k] = Dual::seeded(y[k]);
            let tg = geom::tangent(&lifted, yd);
            let sc = geom::scalars(&lifted, &tg);
            let grad_half = sc.k2.du * 0.5;
            worst = worst.max((grad_half - ylow[k]).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_angular_orthogonality(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let ev = metric::metric_tensor(&jet, &y)?;
        let yv = Array1::from_vec(y.clone());
        let hy = ev.hmat.dot(&yv);
        let scale = linalg::max_abs(&ev.hmat) * yv.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for t in hy.iter() {
            worst = worst.max(t.abs() / scale.max(1e-30));
        }
    }
    Ok((worst, cfg.samples))
}

fn check_positive_definite(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let ev = metric::metric_tensor(&jet, &y)?;
        let (lo, hi) = linalg::spd_bounds(&ev.gmat);
        worst = worst.max((-lo / hi).max(0.0));
        if hi <= 0.0 {
            worst = worst.max(1.0);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_charge_scalar(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let ad = metric::g_derivative_scalar(&jet, &y)?;
        let closed = metric::g_derivative_scalar_closed(&jet, &y)?;
        worst = worst.max((ad - closed).abs() / (1.0 + ad.abs()));
    }
    Ok((worst, cfg.samples))
}

fn check_nu_positive(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (_, _, sc) = metric::metric_k(&jet, &y)?;
        worst = worst.max((-sc.nu).max(0.0));
    }
    Ok((worst, cfg.samples))
}

fn metric_checks() -> Vec<CheckDef> {
    vec![
        CheckDef {
            id: "metric.pythagorean_form",
            formula: "L^2 + h^2 b^2 = B",
            tol: 1e-13,
            run: check_pythagorean,
        },
        CheckDef {
            id: "metric.determinant_identity",
            formula: "det(g_ij) = (nu/q) (K^2/B)^N det(a_ij)",
            tol: 1e-10,
            run: check_determinant,
        },
        CheckDef {
            id: "metric.axis_compression",
            formula: "eta * B = c^2 at y = b^i",
            tol: 1e-13,
            run: check_axis_compression,
        },
        CheckDef {
            id: "metric.riemannian_reduction",
            formula: "g_ij = a_ij when the charge vanishes identically",
            tol: 1e-12,
            run: check_riemannian_reduction,
        },
        CheckDef {
            id: "metric.homogeneity_k",
            formula: "K(x, lambda y) = lambda K(x, y) for lambda > 0",
            tol: 1e-13,
            run: check_homogeneity_k,
        },
        CheckDef {
            id: "metric.homogeneity_metric",
            formula: "g_ij(x, lambda y) = g_ij(x, y) for lambda > 0",
            tol: 1e-12,
            run: check_homogeneity_metric,
        },
        CheckDef {
            id: "metric.lowered_contraction",
            formula: "y_i y^i = K^2",
            tol: 1e-13,
            run: check_lowered_contraction,
        },
        CheckDef {
            id: "metric.lowered_gradient",
            formula: "y_i = (1/2) dK^2/dy^i (closed form vs differentiated)",
            tol: 1e-12,
            run: check_lowered_gradient,
        },
        CheckDef {
            id: "metric.angular_orthogonality",
            formula: "h_ij y^j = 0",
            tol: 1e-12,
            run: check_angular_orthogonality,
        },
        CheckDef {
            id: "metric.positive_definite",
            formula: "g_ij positive-definite on sampled states",
            tol: 1e-12,
            run: check_positive_definite,
        },
        CheckDef {
            id: "metric.charge_scalar",
            formula: "Mbar differentiated route = closed form",
            tol: 1e-12,
            run: check_charge_scalar,
        },
        CheckDef {
            id: "metric.nu_positive",
            formula: "nu = q + (1 - c^2) g b > 0",
            tol: 1e-15,
            run: check_nu_positive,
        },
    ]
}

// ---------------------------------------------------------------------------
// cartan suite

fn check_cartan_closed_form(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let ad = cartan::cartan_tensor(&jet, &y)?;
        let closed = cartan::cartan_closed_form(&jet, &y)?;
        let scale = max_abs3(&ad).max(1e-30);
        for (idx, v) in ad.indexed_iter() {
            worst = worst.max((v - closed[idx]).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_cartan_trace(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let a3 = cartan::cartan_tensor(&jet, &y)?;
        let ev = metric::metric_tensor(&jet, &y)?;
        let (a1, _) = cartan::cartan_vector(&jet, &y)?;
        let scale = a1
            .iter()
            .fold(1e-30_f64, |m, x| m.max(x.abs()))
            .max(max_abs3(&a3));
        for idx in 0..cfg.dim {
            let mut tr = 0.0;
            for j in 0..cfg.dim {
                for k in 0..cfg.dim {
                    tr += ev.ginv[(j, k)] * a3[(idx, j, k)];
                }
            }
            worst = worst.max((tr - a1[idx]).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_cartan_norm(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (a1, _) = cartan::cartan_vector(&jet, &y)?;
        let ev = metric::metric_tensor(&jet, &y)?;
        let contract = ev.ginv.dot(&a1).dot(&a1);
        let aa = cartan::cartan_norm(&jet, &y)?;
        worst = worst.max((aa - contract).abs() / aa.max(1e-12));
    }
    Ok((worst, cfg.samples))
}

fn check_cartan_orthogonality(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let a3 = cartan::cartan_tensor(&jet, &y)?;
        let scale = max_abs3(&a3).max(1e-30) * y.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for idx in 0..cfg.dim {
            for j in 0..cfg.dim {
                let c: f64 = (0..cfg.dim).map(|k| a3[(idx, j, k)] * y[k]).sum();
                worst = worst.max(c.abs() / scale);
            }
        }
    }
    Ok((worst, cfg.samples))
}

fn check_cartan_symmetry(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let a3 = cartan::cartan_tensor(&jet, &y)?;
        let scale = max_abs3(&a3).max(1e-30);
        for ((idx, j, k), v) in a3.indexed_iter() {
            worst = worst.max((v - a3[(j, idx, k)]).abs() / scale);
            worst = worst.max((v - a3[(idx, k, j)]).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_shape_scalar_bound(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (_, x) = cartan::cartan_vector(&jet, &y)?;
        worst = worst.max(cfg.dim as f64 * x - 1.0);
        if x <= 0.0 {
            worst = worst.max(1.0);
        }
    }
    Ok((worst.max(0.0), cfg.samples))
}

fn check_main_scalar(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    // two-dimensional statement, checked on 2-jets regardless of --dim
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = jets::random_jet(
            2,
            derive_seed(cfg.seed, tag, i as u64),
            FULL_RANGE_C,
            FULL_RANGE_G,
        )?;
        let y = sample_tangent(cfg, tag, i, 2);
        let aa = cartan::cartan_norm(&jet, &y)?;
        if aa < cartan::RIEMANNIAN_AA_THRESHOLD {
            continue;
        }
        let i_scalar = cartan::main_scalar(&jet, &y)?;
        let (a1, _) = cartan::cartan_vector(&jet, &y)?;
        let alpha = a1.mapv(|t| t / aa.sqrt());
        let a3 = cartan::cartan_tensor(&jet, &y)?;
        let scale = max_abs3(&a3).max(1e-30);
        for ((ii, j, k), v) in a3.indexed_iter() {
            let pred = i_scalar * alpha[ii] * alpha[j] * alpha[k];
            worst = worst.max((v - pred).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_cartan_riemannian_zero(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = zero_charge_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let a3 = cartan::cartan_tensor(&jet, &y)?;
        let ev = metric::metric_tensor(&jet, &y)?;
        let (k, _, _) = metric::metric_k(&jet, &y)?;
        let s: f64 = y.iter().map(|t| t * t).sum::<f64>().sqrt();
        let scale = linalg::max_abs(&ev.gmat) * k / s;
        worst = worst.max(max_abs3(&a3) / scale);
    }
    Ok((worst, cfg.samples))
}

fn cartan_checks() -> Vec<CheckDef> {
    vec![
        CheckDef {
            id: "cartan.tensor_closed_form",
            formula: "A_ijk differentiated = X [sum A h - (N+1-1/X) AAA / (A.A)]",
            tol: 1e-9,
            run: check_cartan_closed_form,
        },
        CheckDef {
            id: "cartan.trace_contraction",
            formula: "A_i = g^{jk} A_ijk matches the closed trace vector",
            tol: 1e-9,
            run: check_cartan_trace,
        },
        CheckDef {
            id: "cartan.norm_closed_form",
            formula: "A^i A_i = (g^2/4)(1/X^2)(N+1-1/X)",
            tol: 1e-9,
            run: check_cartan_norm,
        },
        CheckDef {
            id: "cartan.orthogonality",
            formula: "A_ijk y^k = 0",
            tol: 1e-11,
            run: check_cartan_orthogonality,
        },
        CheckDef {
            id: "cartan.symmetry",
            formula: "A_ijk fully symmetric",
            tol: 1e-11,
            run: check_cartan_symmetry,
        },
        CheckDef {
            id: "cartan.shape_scalar_bound",
            formula: "N X < 1 strictly",
            tol: 1e-15,
            run: check_shape_scalar_bound,
        },
        CheckDef {
            id: "cartan.main_scalar_factorization",
            formula: "A_ijk = I alpha_i alpha_j alpha_k in dimension two",
            tol: 1e-9,
            run: check_main_scalar,
        },
        CheckDef {
            id: "cartan.riemannian_zero",
            formula: "A_ijk = 0 when the charge vanishes identically",
            tol: 1e-12,
            run: check_cartan_riemannian_zero,
        },
    ]
}

// ---------------------------------------------------------------------------
// spray suite

fn check_theorem_equivalence(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let closed = spray::spray(&jet, &y)?.g;
        let oracle = spray::spray_oracle(&jet, &y)?;
        let scale = oracle.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for idx in 0..cfg.dim {
            worst = worst.max((closed[idx] - oracle[idx]).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_spray_riemannian(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = zero_charge_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let out = spray::spray(&jet, &y)?;
        let quad = riemannian_quadratic(&jet, &y);
        let scale = quad.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for idx in 0..cfg.dim {
            worst = worst.max((out.g[idx] - quad[idx]).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_spray_berwald(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = candidate_jet(cfg, tag, i, 0.0)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let out = spray::spray(&jet, &y)?;
        let quad = riemannian_quadratic(&jet, &y);
        let scale = quad.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for idx in 0..cfg.dim {
            worst = worst.max((out.g[idx] - quad[idx]).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_axis_contraction(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let out = spray::spray(&jet, &y)?;
        let quad = riemannian_quadratic(&jet, &y);
        let lhs: f64 = (0..cfg.dim).map(|k| jet.b()[k] * (out.g[k] - quad[k])).sum();
        let cs = riemannian::contraction_scalars(&jet, &y);
        let ts = jets::TangentState::new(&jet, &y)?;
        let (_, _, sc) = metric::metric_k(&jet, &y)?;
        let c2 = jet.c() * jet.c();
        let be: f64 = (0..cfg.dim).map(|k| jet.b()[k] * out.e[k]).sum();
        let rhs = jet.g() / sc.nu * cs.ys * (1.0 - c2) * ts.b
            - jet.g() * ts.q * ts.q / sc.nu * cs.sigma
            + be;
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    Ok((worst, cfg.samples))
}

fn check_charge_contraction(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let out = spray::spray(&jet, &y)?;
        let lhs: f64 = (0..cfg.dim).map(|h| jet.b()[h] * out.e[h]).sum();
        let cs = riemannian::contraction_scalars(&jet, &y);
        let ts = jets::TangentState::new(&jet, &y)?;
        let (_, _, sc) = metric::metric_k(&jet, &y)?;
        let mb = sc.mbar;
        let c2 = jet.c() * jet.c();
        let cs2 = c2 * ts.s * ts.s - ts.b * ts.b;
        let rhs = ts.b * mb * cs.yg
            + (ts.q * ts.q / sc.b_form + 0.5 * mb * jet.g()) * cs.yg * cs2 / sc.nu
            - 0.5 * mb * cs.bg * ts.q * sc.b_form / sc.nu;
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    Ok((worst, cfg.samples))
}

fn check_spray_homogeneity(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    let take = cfg.samples.div_euclid(4).max(8).min(cfg.samples);
    for i in 0..take {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (g1, g2, g3) = spray::spray_derivatives(&jet, &y)?;
        let g0 = spray::spray(&jet, &y)?.g;
        for lambda in [0.5_f64, 2.0, 10.0] {
            let y2: Vec<f64> = y.iter().map(|t| lambda * t).collect();
            let h0 = spray::spray(&jet, &y2)?.g;
            let (h1, h2, h3) = spray::spray_derivatives(&jet, &y2)?;
            let s0 = h0.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
            for idx in 0..cfg.dim {
                worst = worst.max((h0[idx] - lambda * lambda * g0[idx]).abs() / s0);
            }
            let s1 = h1.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
            for (idx, v) in h1.indexed_iter() {
                worst = worst.max((v - lambda * g1[idx]).abs() / s1);
            }
            let s2 = h2.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
            for (idx, v) in h2.indexed_iter() {
                worst = worst.max((v - g2[idx]).abs() / s2);
            }
            let s3 = h3.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
            for (idx, v) in h3.indexed_iter() {
                worst = worst.max((v - g3[idx] / lambda).abs() / s3);
            }
        }
    }
    Ok((worst, take))
}

fn check_euler_ladder(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    let take = cfg.samples.div_euclid(2).max(8).min(cfg.samples);
    for i in 0..take {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let g0 = spray::spray(&jet, &y)?.g;
        let (g1, g2, g3) = spray::spray_derivatives(&jet, &y)?;
        let scale = g0.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for idx in 0..cfg.dim {
            let c1: f64 = (0..cfg.dim).map(|k| g1[(idx, k)] * y[k]).sum();
            worst = worst.max((c1 - 2.0 * g0[idx]).abs() / scale);
            for k in 0..cfg.dim {
                let c2: f64 = (0..cfg.dim).map(|m| g2[(idx, k, m)] * y[m]).sum();
                worst = worst.max((c2 - g1[(idx, k)]).abs() / scale);
                for m in 0..cfg.dim {
                    let c3: f64 = (0..cfg.dim).map(|j| g3[(idx, k, m, j)] * y[j]).sum();
                    worst = worst.max(c3.abs() / scale);
                }
            }
        }
    }
    Ok((worst, take))
}

fn check_exact_g1(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (g1, _, _) = spray::spray_derivatives(&jet, &y)?;
        let uc = spray::u_coefficients(&jet, &y)?;
        let cs = riemannian::contraction_scalars(&jet, &y);
        let ts = jets::TangentState::new(&jet, &y)?;
        let (_, _, sc) = metric::metric_k(&jet, &y)?;
        let gamma = riemannian::christoffel(&jet);
        let bup = jet.b_up();
        let scale = g1.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for idx in 0..cfg.dim {
            for k in 0..cfg.dim {
                let mut chris = 0.0;
                for m in 0..cfg.dim {
                    chris += gamma[(idx, k, m)] * y[m];
                }
                let r_up = (if idx == k { 1.0 } else { 0.0 }) - bup[idx] * jet.b()[k];
                let pred = jet.g() * uc.u1[k] * ts.vvec[idx]
                    + jet.g() / sc.nu * cs.ys * r_up
                    + 2.0 * chris;
                worst = worst.max((g1[(idx, k)] - pred).abs() / scale);
            }
        }
    }
    Ok((worst, cfg.samples))
}

fn check_exact_g2(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (_, g2, _) = spray::spray_derivatives(&jet, &y)?;
        let uc = spray::u_coefficients(&jet, &y)?;
        let ts = jets::TangentState::new(&jet, &y)?;
        let gamma = riemannian::christoffel(&jet);
        let bup = jet.b_up();
        let scale = g2.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for idx in 0..cfg.dim {
            for k in 0..cfg.dim {
                let rk = (if idx == k { 1.0 } else { 0.0 }) - bup[idx] * jet.b()[k];
                for m in 0..cfg.dim {
                    let rm = (if idx == m { 1.0 } else { 0.0 }) - bup[idx] * jet.b()[m];
                    let pred = jet.g() * uc.u1[k] * rm
                        + jet.g() * uc.u1[m] * rk
                        + jet.g() * uc.u2[(k, m)] * ts.vvec[idx]
                        + 2.0 * gamma[(idx, k, m)];
                    worst = worst.max((g2[(idx, k, m)] - pred).abs() / scale);
                }
            }
        }
    }
    Ok((worst, cfg.samples))
}

fn check_exact_contractions(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (_, g2, _) = spray::spray_derivatives(&jet, &y)?;
        let uc = spray::u_coefficients(&jet, &y)?;
        let ts = jets::TangentState::new(&jet, &y)?;
        let gamma = riemannian::christoffel(&jet);
        let c2 = jet.c() * jet.c();
        let scale = g2.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for k in 0..cfg.dim {
            for m in 0..cfg.dim {
                let lhs_b: f64 = (0..cfg.dim).map(|idx| jet.b()[idx] * g2[(idx, k, m)]).sum();
                let lhs_u: f64 = (0..cfg.dim).map(|idx| ts.u[idx] * g2[(idx, k, m)]).sum();
                let mut chris_b = 0.0;
                let mut chris_u = 0.0;
                for idx in 0..cfg.dim {
                    chris_b += jet.b()[idx] * gamma[(idx, k, m)];
                    chris_u += ts.u[idx] * gamma[(idx, k, m)];
                }
                let g = jet.g();
                let rhs_b = (1.0 - c2)
                    * (g * uc.u1[k] * jet.b()[m]
                        + g * uc.u1[m] * jet.b()[k]
                        + g * uc.u2[(k, m)] * ts.b)
                    + 2.0 * chris_b;
                let rhs_u = g * uc.u1[k] * ts.v[m]
                    + g * uc.u1[m] * ts.v[k]
                    + g * uc.u2[(k, m)] * ts.q * ts.q
                    + 2.0 * chris_u;
                worst = worst.max((lhs_b - rhs_b).abs() / scale);
                worst = worst.max((lhs_u - rhs_u).abs() / scale);
            }
        }
    }
    Ok((worst, cfg.samples))
}

/// `U_k` at any scalar level, for derivative cross-checks.
fn u1_generic<T: Scalar>(g: &Geom<T>, nabla_b: &Array2<T>, y: &Array1<T>) -> Array1<T> {
    let n = g.n;
    let tg = geom::tangent(g, y.clone());
    let sc = geom::scalars(g, &tg);
    let one = T::one();
    let two = T::from_f64(2.0);
    let s = Array1::from_shape_fn(n, |k| {
        (0..n).fold(T::zero(), |acc, h| acc + y[h] * nabla_b[(h, k)])
    });
    let ys = (0..n).fold(T::zero(), |acc, k| acc + s[k] * y[k]);
    Array1::from_shape_fn(n, |k| {
        let nu_k = tg.v[k] / tg.q + (one - g.c2) * g.g * g.b[k];
        -(nu_k * ys) / (sc.nu * sc.nu) + two * s[k] / sc.nu
    })
}

fn check_u_derivative(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    // U_km against the dual-differentiated U_k
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let uc = spray::u_coefficients(&jet, &y)?;
        let g = Geom::from_jet(&jet);
        let lifted = g.lift();
        let nabla = riemannian::covariant_derivative_b(&jet).mapv(Dual::constant);
        let scale = uc.u2.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for m in 0..cfg.dim {
            let mut yd: Array1<Dual<f64>> =
                Array1::from_vec(y.iter().map(|&t| Dual::constant(t)).collect());
            yd[m] = Dual::seeded(y[m]);
            let u1d = u1_generic(&lifted, &nabla, &yd);
            for k in 0..cfg.dim {
                worst = worst.max((u1d[k].du - uc.u2[(k, m)]).abs() / scale);
            }
        }
    }
    Ok((worst, cfg.samples))
}

fn check_bdot_routes(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let direct = spray::dot_b(&jet, &y)?;
        let definitional = spray::dot_b_definitional(&jet, &y)?;
        worst = worst.max((direct - definitional).abs() / (1.0 + direct.abs()));
    }
    Ok((worst, cfg.samples))
}

fn check_db_routes(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let r1 = spray::covariant_db(&jet, &y)?;
        let r2 = spray::covariant_db_skew_route(&jet, &y)?;
        let scale = r1.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for idx in 0..cfg.dim {
            worst = worst.max((r1[idx] - r2[idx]).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_db_contraction(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = sample_jet(cfg, tag, i)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let dbn = spray::covariant_db(&jet, &y)?;
        let bdot = spray::dot_b(&jet, &y)?;
        let contracted: f64 = dbn.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        worst = worst.max((contracted - bdot).abs() / (1.0 + bdot.abs()));
    }
    Ok((worst, cfg.samples))
}

fn spray_checks() -> Vec<CheckDef> {
    vec![
        CheckDef {
            id: "spray.closed_form_vs_oracle",
            formula: "closed spray coefficients = Finslerian Christoffel contraction",
            tol: 1e-8,
            run: check_theorem_equivalence,
        },
        CheckDef {
            id: "spray.riemannian_reduction",
            formula: "G^i = a^i_{nm} y^n y^m when the charge vanishes identically",
            tol: 1e-12,
            run: check_spray_riemannian,
        },
        CheckDef {
            id: "spray.berwald_reduction",
            formula: "G^i = a^i_{nm} y^n y^m on parallel-axis constant-charge jets",
            tol: 1e-11,
            run: check_spray_berwald,
        },
        CheckDef {
            id: "spray.axis_contraction",
            formula: "b_k (G^k - a-quadratic) = (g/nu)(ys)(1-c^2)b - (g q^2/nu) sigma + b_k E^k",
            tol: 1e-9,
            run: check_axis_contraction,
        },
        CheckDef {
            id: "spray.charge_contraction",
            formula: "b_h E^h = b Mbar (yg) + [(q^2/B) + Mbar g/2](yg)(c^2 S^2 - b^2)/nu - (Mbar/2)(bg) q B/nu",
            tol: 1e-9,
            run: check_charge_contraction,
        },
        CheckDef {
            id: "spray.homogeneity_ladder",
            formula: "G, G1, G2, G3 homogeneous of degrees 2, 1, 0, -1",
            tol: 1e-9,
            run: check_spray_homogeneity,
        },
        CheckDef {
            id: "spray.euler_ladder",
            formula: "G1 y = 2G, G2 y = G1, G3 y = 0",
            tol: 1e-10,
            run: check_euler_ladder,
        },
        CheckDef {
            id: "spray.exact_first_derivative",
            formula: "G^i_k = g U_k v^i + (g/nu)(ys) r^i_k + 2 a^i_{km} y^m on exact-form jets",
            tol: 1e-9,
            run: check_exact_g1,
        },
        CheckDef {
            id: "spray.exact_second_derivative",
            formula: "G^i_km = g U_k r^i_m + g U_m r^i_k + g U_km v^i + 2 a^i_{km} on exact-form jets",
            tol: 1e-9,
            run: check_exact_g2,
        },
        CheckDef {
            id: "spray.exact_contractions",
            formula: "axis and lowered contractions of G^i_km on exact-form jets",
            tol: 1e-9,
            run: check_exact_contractions,
        },
        CheckDef {
            id: "spray.u_derivative",
            formula: "U_km = dU_k/dy^m (closed form vs differentiated)",
            tol: 1e-10,
            run: check_u_derivative,
        },
        CheckDef {
            id: "spray.bdot_routes",
            formula: "bdot closed form = definitional route",
            tol: 1e-11,
            run: check_bdot_routes,
        },
        CheckDef {
            id: "spray.db_routes",
            formula: "Db_n via half spray derivative = skew + bdot-gradient route",
            tol: 1e-10,
            run: check_db_routes,
        },
        CheckDef {
            id: "spray.db_contraction",
            formula: "Db_n y^n = bdot",
            tol: 1e-10,
            run: check_db_contraction,
        },
    ]
}

// ---------------------------------------------------------------------------
// landsberg suite

fn check_b8_b9_b10(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (u1a, u2a, u3a) = landsberg::particular_u(&jet, &y, k_prop)?;
        let (u1b, u2b, u3b) = landsberg::particular_u_raw(&jet, &y, k_prop)?;
        let s1 = u1b.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for idx in 0..cfg.dim {
            worst = worst.max((u1a[idx] - u1b[idx]).abs() / s1);
        }
        let s2 = u2b.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for (idx, v) in u2a.indexed_iter() {
            worst = worst.max((v - u2b[idx]).abs() / s2);
        }
        let s3 = u3b.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for (idx, v) in u3a.indexed_iter() {
            worst = worst.max((v - u3b[idx]).abs() / s3);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_b11_b14(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (g3_closed, yg3_closed) = landsberg::particular_g3(&jet, &y, k_prop)?;
        let (_, _, g3_ad) = spray::spray_derivatives(&jet, &y)?;
        let scale = max_abs4(&g3_ad).max(1e-30);
        for (idx, v) in g3_closed.indexed_iter() {
            worst = worst.max((v - g3_ad[idx]).abs() / scale);
        }
        let ylow = metric::covariant_y(&jet, &y)?;
        let yscale = max_abs3(&yg3_closed).max(1e-30);
        for kk in 0..cfg.dim {
            for m in 0..cfg.dim {
                for j in 0..cfg.dim {
                    let mut s = 0.0;
                    for idx in 0..cfg.dim {
                        s += ylow[idx] * g3_ad[(idx, kk, m, j)];
                    }
                    worst = worst.max((s - yg3_closed[(kk, m, j)]).abs() / yscale);
                }
            }
        }
    }
    Ok((worst, cfg.samples))
}

fn check_b16_b17(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (_, yg3) = landsberg::particular_g3(&jet, &y, k_prop)?;
        let angular = landsberg::particular_yg3_angular(&jet, &y, k_prop)?;
        let yscale = max_abs3(&yg3).max(1e-30);
        for (idx, v) in angular.indexed_iter() {
            worst = worst.max((v - yg3[idx]).abs() / yscale);
        }
        let rep = landsberg::angular_tensor_representation(&jet, &y)?;
        let ev = metric::metric_tensor(&jet, &y)?;
        let hscale = linalg::max_abs(&ev.hmat);
        for idx in 0..cfg.dim {
            for j in 0..cfg.dim {
                worst = worst.max((rep[(idx, j)] - ev.hmat[(idx, j)]).abs() / hscale);
            }
        }
    }
    Ok((worst, cfg.samples))
}

fn check_b18(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let (a1, x) = cartan::cartan_vector(&jet, &y)?;
        let e = cartan::e_covector(&jet, &y)?;
        let (k_fn, _, sc) = metric::metric_k(&jet, &y)?;
        let ts = jets::TangentState::new(&jet, &y)?;
        let coef = -k_fn * jet.g() * ts.q / (2.0 * sc.b_form) / x;
        let scale = a1.iter().fold(1e-30_f64, |m, t| m.max(t.abs()));
        for idx in 0..cfg.dim {
            worst = worst.max((a1[idx] - coef * e[idx]).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_dual_route(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let closed = landsberg::dot_a_closed(&jet, &y, k_prop)?;
        let numeric = landsberg::dot_a_numeric(&jet, &y)?;
        let scale = max_abs3(&numeric).max(max_abs3(&closed.adot));
        if scale < 1e-12 {
            continue;
        }
        for (idx, v) in numeric.indexed_iter() {
            worst = worst.max((v - closed.adot[idx]).abs() / scale);
        }
    }
    Ok((worst, cfg.samples))
}

fn check_zero_cells(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        // parallel-axis (k = 0) cells
        let jet = candidate_jet(cfg, tag, i, 0.0)?;
        worst = worst.max(max_abs3(&landsberg::dot_a_numeric(&jet, &y)?));
        // zero-charge cells
        let mut rng = stream_rng(derive_seed(cfg.seed, tag ^ 0x7a7a, i as u64), 4);
        let c = rng.random_range(0.2..0.9);
        let k_prop = candidate_k(cfg, tag, i);
        let jet = jets::landsberg_candidate_jet_with(
            cfg.dim,
            derive_seed(cfg.seed, tag, i as u64),
            k_prop,
            c,
            0.0,
        )?;
        worst = worst.max(max_abs3(&landsberg::dot_a_numeric(&jet, &y)?));
    }
    Ok((worst, cfg.samples))
}

fn check_berwald_zero(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    // parallel-axis constant-charge jets keep the numeric route at zero
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let jet = candidate_jet(cfg, tag, i, 0.0)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        worst = worst.max(max_abs3(&landsberg::dot_a_numeric(&jet, &y)?));
    }
    Ok((worst, cfg.samples))
}

fn check_nonzero_cells(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut min_norm = f64::INFINITY;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        min_norm = min_norm.min(max_abs3(&landsberg::dot_a_numeric(&jet, &y)?));
    }
    // residual 0 when every nonzero-parameter cell kept a nonzero tensor
    let worst = if min_norm > 1e-10 { 0.0 } else { 1.0 };
    Ok((worst, cfg.samples))
}

fn check_m1_sign(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let closed = landsberg::dot_a_closed(&jet, &y, k_prop)?;
        worst = worst.max((closed.m1 * jet.g().signum()).max(0.0));
    }
    Ok((worst, cfg.samples))
}

fn check_adot_structure(cfg: &VerifyConfig, tag: u64) -> Result<(f64, usize)> {
    let mut worst = 0.0_f64;
    for i in 0..cfg.samples {
        let k_prop = candidate_k(cfg, tag, i);
        let jet = candidate_jet(cfg, tag, i, k_prop)?;
        let y = sample_tangent(cfg, tag, i, cfg.dim);
        let adot = landsberg::dot_a_numeric(&jet, &y)?;
        let scale = max_abs3(&adot).max(1e-30);
        for ((kk, m, j), v) in adot.indexed_iter() {
            worst = worst.max((v - adot[(m, kk, j)]).abs() / scale);
            worst = worst.max((v - adot[(kk, j, m)]).abs() / scale);
        }
        for kk in 0..cfg.dim {
            for m in 0..cfg.dim {
                let c: f64 = (0..cfg.dim).map(|j| adot[(kk, m, j)] * y[j]).sum();
                worst = worst.max(c.abs() / scale);
            }
        }
    }
    Ok((worst, cfg.samples))
}

fn landsberg_checks() -> Vec<CheckDef> {
    vec![
        CheckDef {
            id: "landsberg.u_chain",
            formula: "axis-basis U_k, U_km, U_kmj = raw derivative expressions",
            tol: 1e-8,
            run: check_b8_b9_b10,
        },
        CheckDef {
            id: "landsberg.third_derivative_closed_form",
            formula: "family G^i_kmj and y_i G^i_kmj closed forms = differentiated spray",
            tol: 1e-8,
            run: check_b11_b14,
        },
        CheckDef {
            id: "landsberg.angular_forms",
            formula: "angular re-expression of y_i G^i_kmj and h_ij = (K^2/B)(eta + (q^2/B) e e)",
            tol: 1e-8,
            run: check_b16_b17,
        },
        CheckDef {
            id: "landsberg.trace_vector_axis_form",
            formula: "A_i = -(K g q/(2B))(1/X) e_i",
            tol: 1e-8,
            run: check_b18,
        },
        CheckDef {
            id: "landsberg.dual_route",
            formula: "Adot closed form (1-c^2) k (m1 A + m2 AAA) = -(1/4) y_i G^i_kmj",
            tol: 1e-7,
            run: check_dual_route,
        },
        CheckDef {
            id: "landsberg.zero_cells",
            formula: "Adot = 0 when k = 0 or the charge vanishes",
            tol: 1e-10,
            run: check_zero_cells,
        },
        CheckDef {
            id: "landsberg.berwald_zero",
            formula: "Adot = 0 on parallel-axis constant-charge jets",
            tol: 1e-11,
            run: check_berwald_zero,
        },
        CheckDef {
            id: "landsberg.nonzero_cells",
            formula: "Adot != 0 whenever k != 0 and g != 0 (indicator residual)",
            tol: 0.5,
            run: check_nonzero_cells,
        },
        CheckDef {
            id: "landsberg.m1_sign",
            formula: "sign(m1) = -sign(g)",
            tol: 1e-15,
            run: check_m1_sign,
        },
        CheckDef {
            id: "landsberg.adot_structure",
            formula: "Adot fully symmetric and orthogonal to y",
            tol: 1e-10,
            run: check_adot_structure,
        },
    ]
}

// ---------------------------------------------------------------------------
// runner

fn suite_checks(suite: Suite) -> Vec<CheckDef> {
    match suite {
        Suite::Metric => metric_checks(),
        Suite::Cartan => cartan_checks(),
        Suite::Spray => spray_checks(),
        Suite::Landsberg => landsberg_checks(),
        Suite::All => {
            let mut v = metric_checks();
            v.extend(cartan_checks());
            v.extend(spray_checks());
            v.extend(landsberg_checks());
            v
        }
    }
}

fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn run_cells(cfg: &VerifyConfig, checks: &[CheckDef]) -> Vec<CheckCell> {
    checks
        .par_iter()
        .enumerate()
        .map(|(idx, def)| {
            let tol = cfg.profile.apply(def.tol);
            let (max_residual, samples) = match (def.run)(cfg, idx as u64 + 1) {
                Ok(pair) => pair,
                Err(e) => {
                    eprintln!("check {} failed to run: {}", def.id, e);
                    (f64::INFINITY, 0)
                }
            };
            CheckCell {
                check_id: def.id.to_string(),
                formula: def.formula.to_string(),
                samples,
                max_residual,
                tolerance: tol,
                pass: max_residual <= tol,
            }
        })
        .collect()
}

/// Run one suite and assemble the report. Worker count affects scheduling
/// only; sampling and assembly order are fixed by the configuration.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<VerificationReport> {
    if cfg.dim < 2 {
        return Err(crate::Error::DimensionTooSmall(cfg.dim));
    }
    let checks = suite_checks(suite);
    let cells = if let Some(jobs) = cfg.jobs {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| crate::Error::Invalid(format!("worker pool: {e}")))?;
        pool.install(|| run_cells(cfg, &checks))
    } else {
        run_cells(cfg, &checks)
    };
    let pass = cells.iter().all(|c| c.pass);
    Ok(VerificationReport {
        suite: suite.name().to_string(),
        schema_version: REPORT_SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        dim: cfg.dim,
        samples: cfg.samples,
        seed: cfg.seed,
        tol_profile: cfg.profile.name().to_string(),
        timestamp: unix_timestamp(),
        cells,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> VerifyConfig {
        VerifyConfig {
            dim: 3,
            samples: 6,
            seed: 42,
            profile: TolProfile::Default,
            jobs: Some(2),
        }
    }

    fn assert_all_pass(report: &VerificationReport) {
        for cell in &report.cells {
            assert!(
                cell.pass,
                "{}: residual {} > tol {}",
                cell.check_id, cell.max_residual, cell.tolerance
            );
        }
        assert!(report.pass);
    }

    #[test]
    fn metric_suite_passes_at_small_scale() {
        assert_all_pass(&run_suite(Suite::Metric, &small_cfg()).unwrap());
    }

    #[test]
    fn cartan_suite_passes_at_small_scale() {
        assert_all_pass(&run_suite(Suite::Cartan, &small_cfg()).unwrap());
    }

    #[test]
    fn spray_suite_passes_at_small_scale() {
        assert_all_pass(&run_suite(Suite::Spray, &small_cfg()).unwrap());
    }

    #[test]
    fn landsberg_suite_passes_at_small_scale() {
        assert_all_pass(&run_suite(Suite::Landsberg, &small_cfg()).unwrap());
    }

    #[test]
    fn reports_are_deterministic_across_worker_counts() {
        let mut cfg = small_cfg();
        let r1 = run_suite(Suite::Metric, &cfg).unwrap();
        cfg.jobs = Some(1);
        let r2 = run_suite(Suite::Metric, &cfg).unwrap();
        cfg.jobs = Some(4);
        let r3 = run_suite(Suite::Metric, &cfg).unwrap();
        let n1 = serde_json::to_string(&r1.normalized()).unwrap();
        let n2 = serde_json::to_string(&r2.normalized()).unwrap();
        let n3 = serde_json::to_string(&r3.normalized()).unwrap();
        assert_eq!(n1, n2);
        assert_eq!(n1, n3);
    }

    #[test]
    fn strict_profile_tightens_tolerances() {
        assert_eq!(TolProfile::Default.apply(1e-9), 1e-9);
        let strict = TolProfile::Strict.apply(1e-9);
        assert!(strict < 1e-11 && strict > 1e-13, "strict = {}", strict);
        assert_eq!(TolProfile::Strict.apply(1e-13), 1e-14);
    }

    #[test]
    fn rejects_dimension_below_two() {
        let mut cfg = small_cfg();
        cfg.dim = 1;
        assert!(run_suite(Suite::Metric, &cfg).is_err());
    }
}
