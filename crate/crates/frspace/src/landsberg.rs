//! The proportional-covariant-derivative family and the Landsberg-to-Berwald
//! demonstration.
//!
//! For jets with constant charge and `nabla_i b_j = k r_ij`, the derivative
//! of the Cartan tensor along the spray has the closed form
//! `Adot = (1-c^2) k (m1 A_kmj + m2 A_k A_m A_j)`, so it can vanish
//! identically only when `k = 0` (Berwald) or the charge vanishes
//! (Riemannian). The numeric route `Adot = -(1/4) y_i G^i_kmj` works for any
//! jet and is the second leg of the dual-route check.

use crate::cartan;
use crate::error::{Error, Result};
use crate::geom::{self, Geom};
use crate::jets::{self, PointJet};
use crate::linalg;
use crate::metric;
use crate::riemannian;
use crate::rng::{derive_seed, stream_rng};
use crate::spray::{self, SprayData};
use ndarray::{Array1, Array2, Array3, Array4};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Tolerance for the family precondition check.
const PRECONDITION_TOL: f64 = 1e-10;

fn tensor3_max_abs(t: &Array3<f64>) -> f64 {
    t.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Verify constant charge and `nabla_i b_j = k r_ij` within tolerance.
fn check_particular(jet: &PointJet, k: f64) -> Result<()> {
    let dgmax = jet.dg().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if dgmax > 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "charge gradient must vanish, max |dg| = {dgmax:.3e}"
        )));
    }
    let nb = riemannian::covariant_derivative_b(jet);
    let n = jet.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let r = jet.a()[(i, j)] - jet.b()[i] * jet.b()[j];
            worst = worst.max((nb[(i, j)] - k * r).abs());
        }
    }
    if worst > PRECONDITION_TOL {
        return Err(Error::PreconditionViolated(format!(
            "covariant axis derivative deviates from k r_ij by {worst:.3e}"
        )));
    }
    Ok(())
}

struct ParticularState {
    n: usize,
    g: f64,
    c2: f64,
    b: f64,
    q: f64,
    q2: f64,
    nu: f64,
    k_fn: f64,
    b_form: f64,
    /// `v_k`.
    v: Array1<f64>,
    /// `v^i`.
    vup: Array1<f64>,
    /// `e_k = (b/q^2) v_k - b_k`.
    e: Array1<f64>,
    /// `nu_k`.
    nu_k: Array1<f64>,
    /// `r_km`.
    r: Array2<f64>,
    /// `eta_km = r_km - v_k v_m / q^2`.
    eta: Array2<f64>,
    /// `eta^i_j = a^{ih} eta_hj`.
    eta_up: Array2<f64>,
    /// Axis covector.
    b_low: Array1<f64>,
}

fn particular_state(jet: &PointJet, y: &[f64]) -> Result<ParticularState> {
    if y.len() != jet.dim() {
        return Err(Error::ShapeMismatch {
            what: "y",
            expected: format!("dim {}", jet.dim()),
            got: format!("{}", y.len()),
        });
    }
    if y.iter().all(|&t| t == 0.0) {
        return Err(Error::ZeroVector);
    }
    let g = Geom::from_jet(jet);
    let tg = geom::tangent(&g, Array1::from_vec(y.to_vec()));
    let sc = geom::scalars(&g, &tg);
    let n = jet.dim();
    let one_c2 = 1.0 - g.c2;
    let e = Array1::from_shape_fn(n, |kk| tg.b / tg.q2 * tg.v[kk] - g.b[kk]);
    let nu_k = Array1::from_shape_fn(n, |kk| tg.v[kk] / tg.q + one_c2 * g.g * g.b[kk]);
    let r = Array2::from_shape_fn((n, n), |(i, j)| g.a[(i, j)] - g.b[i] * g.b[j]);
    let eta = Array2::from_shape_fn((n, n), |(kk, m)| r[(kk, m)] - tg.v[kk] * tg.v[m] / tg.q2);
    let eta_up = g.ainv.dot(&eta);
    Ok(ParticularState {
        n,
        g: g.g,
        c2: g.c2,
        b: tg.b,
        q: tg.q,
        q2: tg.q2,
        nu: sc.nu,
        k_fn: sc.k,
        b_form: sc.b_form,
        v: tg.v.clone(),
        vup: tg.vup.clone(),
        e,
        nu_k,
        r,
        eta,
        eta_up,
        b_low: g.b.clone(),
    })
}

fn sym_te<F>(n: usize, t: &Array2<f64>, x: &Array1<f64>, mut write: F)
where
    F: FnMut(usize, usize, usize, f64),
{
    for k in 0..n {
        for m in 0..n {
            for j in 0..n {
                write(k, m, j, t[(k, j)] * x[m] + t[(m, j)] * x[k] + t[(m, k)] * x[j]);
            }
        }
    }
}

/// `U_k`, `U_km`, `U_kmj` in the axis-aligned basis.
///
/// `U_k = k q^2 (2nu - q)/(nu^2 b) e_k + k q^2/(nu b) b_k` requires a nonzero
/// scalar `b`; the raw route has no such restriction.
pub fn particular_u(
    jet: &PointJet,
    y: &[f64],
    k: f64,
) -> Result<(Array1<f64>, Array2<f64>, Array3<f64>)> {
    check_particular(jet, k)?;
    let st = particular_state(jet, y)?;
    if st.b.abs() < 1e-12 * st.q {
        return Err(Error::PreconditionViolated(
            "the axis-aligned representation needs b != 0; use the raw route on the transverse plane".into(),
        ));
    }
    let n = st.n;
    let one_c2 = 1.0 - st.c2;
    let u1 = Array1::from_shape_fn(n, |kk| {
        k * st.q2 * (2.0 * st.nu - st.q) / (st.nu * st.nu * st.b) * st.e[kk]
            + k * st.q2 / (st.nu * st.b) * st.b_low[kk]
    });
    let ee_coef = 2.0 * k * one_c2 * one_c2 * st.g * st.g * st.q2 / (st.nu * st.nu * st.nu);
    let u2 = Array2::from_shape_fn((n, n), |(kk, m)| {
        k * (2.0 * st.nu - st.q) / (st.nu * st.nu) * st.eta[(kk, m)] + ee_coef * st.e[kk] * st.e[m]
    });
    let mut u3 = Array3::zeros((n, n, n));
    // -(1/q^2)(v_k U_mj + v_m U_kj + v_j U_km)
    for kk in 0..n {
        for m in 0..n {
            for j in 0..n {
                u3[(kk, m, j)] = -(st.v[kk] * u2[(m, j)] + st.v[m] * u2[(kk, j)] + st.v[j] * u2[(kk, m)])
                    / st.q2;
            }
        }
    }
    let eta_e_coef = 2.0 * k * one_c2 * one_c2 * st.g * st.g * st.b / (st.nu * st.nu * st.nu);
    sym_te(n, &st.eta, &st.e, |kk, m, j, s| {
        u3[(kk, m, j)] += eta_e_coef * s;
    });
    let eee_coef =
        6.0 * k * one_c2 * one_c2 * one_c2 * st.g * st.g * st.g * st.q2 / (st.nu * st.nu * st.nu * st.nu);
    for kk in 0..n {
        for m in 0..n {
            for j in 0..n {
                u3[(kk, m, j)] += eee_coef * st.e[kk] * st.e[m] * st.e[j];
            }
        }
    }
    Ok((u1, u2, u3))
}

/// The same coefficients from the direct derivative expressions, valid for
/// any tangent vector (no axis-aligned basis change).
pub fn particular_u_raw(
    jet: &PointJet,
    y: &[f64],
    k: f64,
) -> Result<(Array1<f64>, Array2<f64>, Array3<f64>)> {
    check_particular(jet, k)?;
    let st = particular_state(jet, y)?;
    let n = st.n;
    let (nu, q, q2) = (st.nu, st.q, st.q2);
    let u1 = Array1::from_shape_fn(n, |kk| -k * q2 / (nu * nu) * st.nu_k[kk] + 2.0 * k / nu * st.v[kk]);
    let u2 = Array2::from_shape_fn((n, n), |(kk, m)| {
        2.0 * k * q2 / (nu * nu * nu) * st.nu_k[kk] * st.nu_k[m]
            - 2.0 * k / (nu * nu) * (st.nu_k[kk] * st.v[m] + st.nu_k[m] * st.v[kk])
            - k * q / (nu * nu) * st.eta[(kk, m)]
            + 2.0 * k / nu * st.r[(m, kk)]
    });
    let mut u3 = Array3::zeros((n, n, n));
    for kk in 0..n {
        for m in 0..n {
            for j in 0..n {
                let nnn = st.nu_k[kk] * st.nu_k[m] * st.nu_k[j];
                let nnv = st.nu_k[kk] * st.nu_k[m] * st.v[j]
                    + st.nu_k[j] * st.nu_k[m] * st.v[kk]
                    + st.nu_k[kk] * st.nu_k[j] * st.v[m];
                let eta_nu = st.nu_k[m] * st.eta[(kk, j)]
                    + st.nu_k[kk] * st.eta[(m, j)]
                    + st.nu_k[j] * st.eta[(kk, m)];
                let r_nu =
                    st.nu_k[m] * st.r[(kk, j)] + st.nu_k[kk] * st.r[(m, j)] + st.nu_k[j] * st.r[(kk, m)];
                let eta_v = st.eta[(kk, m)] * st.v[j] + st.eta[(j, m)] * st.v[kk] + st.eta[(kk, j)] * st.v[m];
                u3[(kk, m, j)] = -6.0 * k * q2 / (nu * nu * nu * nu) * nnn
                    + 4.0 * k / (nu * nu * nu) * nnv
                    + 2.0 * k * q / (nu * nu * nu) * eta_nu
                    - 2.0 * k / (nu * nu) * r_nu
                    - k / (q * nu * nu) * eta_v;
            }
        }
    }
    Ok((u1, u2, u3))
}

/// Third derivative coefficients `G^i_kmj` of the family and the lowered
/// contraction `y_i G^i_kmj`, both in closed form.
pub fn particular_g3(jet: &PointJet, y: &[f64], k: f64) -> Result<(Array4<f64>, Array3<f64>)> {
    check_particular(jet, k)?;
    let st = particular_state(jet, y)?;
    let (_, u2, _) = particular_u(jet, y, k)?;
    let n = st.n;
    let one_c2 = 1.0 - st.c2;
    let g = st.g;
    let mut g3 = Array4::zeros((n, n, n, n));
    let eta_e_coef = 2.0 * k * one_c2 * one_c2 * g * g * st.b / (st.nu * st.nu * st.nu);
    let eee_coef =
        6.0 * k * one_c2 * one_c2 * one_c2 * g * g * g * st.q2 / (st.nu * st.nu * st.nu * st.nu);
    for i in 0..n {
        for kk in 0..n {
            for m in 0..n {
                for j in 0..n {
                    let sym_u = u2[(kk, j)] * st.eta_up[(i, m)]
                        + u2[(m, j)] * st.eta_up[(i, kk)]
                        + u2[(kk, m)] * st.eta_up[(i, j)];
                    let eta_e = st.eta[(kk, j)] * st.e[m]
                        + st.eta[(m, j)] * st.e[kk]
                        + st.eta[(m, kk)] * st.e[j];
                    let eee = st.e[kk] * st.e[m] * st.e[j];
                    g3[(i, kk, m, j)] =
                        g * sym_u + g * (eta_e_coef * eta_e + eee_coef * eee) * st.vup[i];
                }
            }
        }
    }
    let y_coef = -one_c2 * k * g * g * st.q2 / (st.nu * st.nu) * (st.k_fn * st.k_fn / st.b_form);
    let mut yg3 = Array3::zeros((n, n, n));
    sym_te(n, &st.eta, &st.e, |kk, m, j, s| {
        yg3[(kk, m, j)] = y_coef * s;
    });
    Ok((g3, yg3))
}

/// The lowered contraction re-expressed through the angular tensor:
/// first term without the conformal factor, the cubic term with it.
pub fn particular_yg3_angular(jet: &PointJet, y: &[f64], k: f64) -> Result<Array3<f64>> {
    check_particular(jet, k)?;
    let st = particular_state(jet, y)?;
    let ev = metric::metric_tensor(jet, y)?;
    let n = st.n;
    let one_c2 = 1.0 - st.c2;
    let g = st.g;
    let ratio = st.k_fn * st.k_fn / st.b_form;
    let lead = -one_c2 * k * g * g * st.q2 / (st.nu * st.nu);
    let cubic = one_c2 * k * 3.0 * g * g * st.q2 * st.q2 / (st.b_form * st.nu * st.nu) * ratio;
    let mut out = Array3::zeros((n, n, n));
    sym_te(n, &ev.hmat, &st.e, |kk, m, j, s| {
        out[(kk, m, j)] = lead * s;
    });
    for kk in 0..n {
        for m in 0..n {
            for j in 0..n {
                out[(kk, m, j)] += cubic * st.e[kk] * st.e[m] * st.e[j];
            }
        }
    }
    Ok(out)
}

/// Angular tensor representation specific to the family state:
/// `h_ij = (K^2/B)(eta_ij + (q^2/B) e_i e_j)`.
pub fn angular_tensor_representation(jet: &PointJet, y: &[f64]) -> Result<Array2<f64>> {
    let st = particular_state(jet, y)?;
    let n = st.n;
    let ratio = st.k_fn * st.k_fn / st.b_form;
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        ratio * (st.eta[(i, j)] + st.q2 / st.b_form * st.e[i] * st.e[j])
    }))
}

/// Closed-form derivative of the Cartan tensor along the spray for the
/// family, with the scalars `m1` and `m2`.
#[derive(Clone, Debug)]
pub struct LandsbergClosed {
    /// `m1 = -g q B / (2 K nu^2)`; sign opposite to the charge.
    pub m1: f64,
    /// `m2 = -2 m1 X (N + 1 - 1/X) / (A^h A_h)`.
    pub m2: f64,
    /// `m1 A_kmj + m2 A_k A_m A_j`.
    pub base: Array3<f64>,
    /// `Adot = (1-c^2) k (m1 A_kmj + m2 A_k A_m A_j)`.
    pub adot: Array3<f64>,
}

/// Evaluate the closed route. In the Riemannian-degenerate case the result is
/// the zero tensor (with `m2` set to zero since the norm division is void).
pub fn dot_a_closed(jet: &PointJet, y: &[f64], k: f64) -> Result<LandsbergClosed> {
    check_particular(jet, k)?;
    let st = particular_state(jet, y)?;
    let n = st.n;
    let m1 = -st.g * st.q * st.b_form / (2.0 * st.k_fn * st.nu * st.nu);
    let aa = cartan::cartan_norm(jet, y)?;
    if aa < cartan::RIEMANNIAN_AA_THRESHOLD {
        return Ok(LandsbergClosed {
            m1,
            m2: 0.0,
            base: Array3::zeros((n, n, n)),
            adot: Array3::zeros((n, n, n)),
        });
    }
    let a3 = cartan::cartan_tensor(jet, y)?;
    let (a1, x) = cartan::cartan_vector(jet, y)?;
    let inv_x = 1.0 / x;
    let m2 = -2.0 * m1 * x * (n as f64 + 1.0 - inv_x) / aa;
    let mut base = Array3::zeros((n, n, n));
    for kk in 0..n {
        for m in 0..n {
            for j in 0..n {
                base[(kk, m, j)] = m1 * a3[(kk, m, j)] + m2 * a1[kk] * a1[m] * a1[j];
            }
        }
    }
    let factor = (1.0 - st.c2) * k;
    let adot = base.mapv(|t| factor * t);
    Ok(LandsbergClosed { m1, m2, base, adot })
}

/// Numeric route, valid for any jet: `Adot_kmj = -(1/4) y_i G^i_kmj` with the
/// third spray derivatives computed by exact differentiation.
pub fn dot_a_numeric(jet: &PointJet, y: &[f64]) -> Result<Array3<f64>> {
    if y.len() != jet.dim() {
        return Err(Error::ShapeMismatch {
            what: "y",
            expected: format!("dim {}", jet.dim()),
            got: format!("{}", y.len()),
        });
    }
    if y.iter().all(|&t| t == 0.0) {
        return Err(Error::ZeroVector);
    }
    let n = jet.dim();
    let yv = Array1::from_vec(y.to_vec());
    let sd = SprayData::from_jet(jet);
    let g3 = spray::spray_d3(&sd, &yv)?;
    let ylow = metric::covariant_y(jet, y)?;
    let mut out = Array3::zeros((n, n, n));
    for kk in 0..n {
        for m in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += ylow[i] * g3[(i, kk, m, j)];
                }
                out[(kk, m, j)] = -0.25 * s;
            }
        }
    }
    Ok(out)
}

/// Classification of a jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BerwaldVerdict {
    /// Zero charge with zero gradient: the structure is Riemannian.
    Riemannian,
    /// Constant nonzero charge and parallel axis.
    Berwald,
    NotBerwald,
}

impl std::fmt::Display for BerwaldVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BerwaldVerdict::Riemannian => write!(f, "RIEMANNIAN"),
            BerwaldVerdict::Berwald => write!(f, "BERWALD"),
            BerwaldVerdict::NotBerwald => write!(f, "NOT_BERWALD"),
        }
    }
}

/// Report of the pointwise Berwald classification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BerwaldReport {
    pub verdict: BerwaldVerdict,
    pub charge: f64,
    pub charge_constant: bool,
    /// `max |nabla_i b_j|`.
    pub max_nabla_b: f64,
    /// Max over sampled tangent vectors of `|bdot|`.
    pub max_abs_bdot: f64,
    /// Max over sampled tangent vectors of the deviation of the spray from
    /// the Riemannian Christoffel contraction, scaled.
    pub max_spray_deviation: f64,
    /// Number of tangent samples used.
    pub samples: usize,
    /// Whether (bdot = 0 and constant nonzero charge) agreed with the
    /// Berwald classification over the samples.
    pub bdot_criterion_consistent: bool,
}

const VERDICT_TOL: f64 = 1e-10;

/// Classify a jet and check the bdot-based criterion against it.
pub fn berwald_verdict(jet: &PointJet) -> Result<BerwaldReport> {
    let nb = riemannian::covariant_derivative_b(jet);
    let max_nabla_b = linalg::max_abs(&nb);
    let charge_constant = jet.charge_constant();
    let riemannian_flag = charge_constant && jet.g() == 0.0;
    let berwald_flag = charge_constant && max_nabla_b <= VERDICT_TOL;
    let verdict = if riemannian_flag {
        BerwaldVerdict::Riemannian
    } else if berwald_flag {
        BerwaldVerdict::Berwald
    } else {
        BerwaldVerdict::NotBerwald
    };
    let n = jet.dim();
    let samples = 32;
    let mut rng = stream_rng(0xB33F_CAFE, 0);
    let gamma = riemannian::christoffel(jet);
    let mut max_abs_bdot = 0.0_f64;
    let mut max_spray_deviation = 0.0_f64;
    for _ in 0..samples {
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if y.iter().map(|t| t * t).sum::<f64>() < 0.05 {
            continue;
        }
        max_abs_bdot = max_abs_bdot.max(spray::dot_b(jet, &y)?.abs());
        let g_out = spray::spray(jet, &y)?.g;
        let mut dev = 0.0_f64;
        let mut scale = 1.0_f64;
        for i in 0..n {
            let mut quad = 0.0;
            for m in 0..n {
                for nn in 0..n {
                    quad += gamma[(i, m, nn)] * y[m] * y[nn];
                }
            }
            dev = dev.max((g_out[i] - quad).abs());
            scale = scale.max(quad.abs()).max(g_out[i].abs());
        }
        max_spray_deviation = max_spray_deviation.max(dev / scale);
    }
    // the bdot criterion singles out the non-Riemannian Berwald case
    let bdot_side = max_abs_bdot <= VERDICT_TOL && charge_constant && jet.g() != 0.0;
    let berwald_side = verdict == BerwaldVerdict::Berwald;
    let bdot_criterion_consistent = bdot_side == berwald_side;
    Ok(BerwaldReport {
        verdict,
        charge: jet.g(),
        charge_constant,
        max_nabla_b,
        max_abs_bdot,
        max_spray_deviation,
        samples,
        bdot_criterion_consistent,
    })
}

/// Grid configuration for the Landsberg-to-Berwald probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub dim: usize,
    pub seeds: Vec<u64>,
    pub k_values: Vec<f64>,
    pub g_values: Vec<f64>,
    pub c_values: Vec<f64>,
    pub samples_per_cell: usize,
}

impl ProbeConfig {
    pub fn new(dim: usize, seeds: Vec<u64>, k_values: Vec<f64>, g_values: Vec<f64>, c_values: Vec<f64>) -> Self {
        ProbeConfig {
            dim,
            seeds,
            k_values,
            g_values,
            c_values,
            samples_per_cell: 4,
        }
    }
}

/// One grid cell of the probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeCell {
    pub seed: u64,
    pub dim: usize,
    pub k: f64,
    pub g: f64,
    pub c: f64,
    /// Max over tangent samples of the sup-norm of the numeric route.
    pub norm_adot: f64,
    /// Norm ratio closed/numeric, 1.0 when both vanish.
    pub ratio_closed_numeric: f64,
    /// Max relative deviation between the two routes.
    pub dual_route_residual: f64,
    /// Max over the direction sweep of |Adot| / |A_ijk|.
    pub landsberg_ratio: f64,
    /// Whether the sweep found the derivative identically vanishing.
    pub landsberg_vanishing: bool,
    pub berwald_verdict: String,
}

/// Number of direction samples behind a vanishing verdict.
pub const LANDSBERG_DIRECTIONS: usize = 32;
/// Scaled threshold for the vanishing verdict.
pub const LANDSBERG_RATIO_TOL: f64 = 1e-9;

/// Desk-scale test of the identical vanishing of the Cartan-tensor
/// derivative: sweep quasi-uniform directions and compare `|Adot|`
/// against `|A_ijk|` pointwise. Returns (vanishing, max ratio).
pub fn landsberg_vanishing(jet: &PointJet) -> Result<(bool, f64)> {
    let n = jet.dim();
    let mut rng = stream_rng(0x1a5d_beef, 0);
    let mut max_ratio = 0.0_f64;
    let mut sampled = 0usize;
    while sampled < LANDSBERG_DIRECTIONS {
        let mut y: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let norm: f64 = y.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        for t in y.iter_mut() {
            *t /= norm;
        }
        sampled += 1;
        let adot_norm = tensor3_max_abs(&dot_a_numeric(jet, &y)?);
        let a3_norm = tensor3_max_abs(&cartan::cartan_tensor(jet, &y)?);
        let ratio = if a3_norm > 1e-12 {
            adot_norm / a3_norm
        } else if adot_norm <= 1e-10 {
            // degenerate (Riemannian-like) state: both tensors vanish
            0.0
        } else {
            f64::INFINITY
        };
        max_ratio = max_ratio.max(ratio);
    }
    Ok((max_ratio <= LANDSBERG_RATIO_TOL, max_ratio))
}

/// One row of the regularization-factor scaling table: the normalized
/// deviation `lambda = |Adot|/|m1 A + m2 AAA|` measured at each `c`, compared
/// against the factor `(1-c^2)` relative to the first grid value. The state
/// is held comparable across `c` by reusing the jet seed (same metric, same
/// derivative draw, same axis direction rescaled) and the same tangent
/// samples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingRow {
    pub seed: u64,
    pub k: f64,
    pub g: f64,
    pub c: f64,
    pub lambda: f64,
    pub measured_ratio: f64,
    pub expected_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeReport {
    pub config: ProbeConfig,
    pub cells: Vec<ProbeCell>,
    pub scaling: Vec<ScalingRow>,
    pub max_dual_route_residual: f64,
    /// Largest numeric norm among cells that must vanish (k = 0 or g = 0).
    pub max_zero_cell_norm: f64,
    /// Smallest numeric norm among cells that must not vanish.
    pub min_nonzero_cell_norm: f64,
    pub pass: bool,
}

fn probe_tangents(dim: usize, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(derive_seed(seed, 7, 0), 2);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if y.iter().map(|t| t * t).sum::<f64>() > 0.05 {
            out.push(y);
        }
    }
    out
}

fn probe_cell(cfg: &ProbeConfig, seed: u64, k: f64, g: f64, c: f64) -> Result<(ProbeCell, f64)> {
    let jet = jets::landsberg_candidate_jet_with(cfg.dim, seed, k, c, g)?;
    let tangents = probe_tangents(cfg.dim, seed, cfg.samples_per_cell);
    let mut norm_adot = 0.0_f64;
    let mut ratio = 1.0_f64;
    let mut residual = 0.0_f64;
    let mut lambda_acc = 0.0_f64;
    let mut lambda_n = 0usize;
    for y in &tangents {
        let numeric = dot_a_numeric(&jet, y)?;
        let closed = dot_a_closed(&jet, y, k)?;
        let nn = tensor3_max_abs(&numeric);
        let nc = tensor3_max_abs(&closed.adot);
        norm_adot = norm_adot.max(nn);
        let r = if nn.max(nc) < 1e-14 { 1.0 } else { nc / nn };
        if (r - 1.0).abs() > (ratio - 1.0).abs() {
            ratio = r;
        }
        let mut dev = 0.0_f64;
        for (idx, v) in numeric.indexed_iter() {
            dev = dev.max((v - closed.adot[idx]).abs());
        }
        let denom = nn.max(nc);
        // both routes agreeing on a vanishing tensor is exact agreement; the
        // zero-cell norm criterion covers those cells separately
        if denom > 1e-12 {
            residual = residual.max(dev / denom);
        }
        let base_norm = tensor3_max_abs(&closed.base);
        if base_norm > 1e-14 {
            lambda_acc += nn / base_norm;
            lambda_n += 1;
        }
    }
    let verdict = berwald_verdict(&jet)?.verdict.to_string();
    let (landsberg_flag, landsberg_ratio) = landsberg_vanishing(&jet)?;
    let lambda = if lambda_n > 0 {
        lambda_acc / lambda_n as f64
    } else {
        0.0
    };
    Ok((
        ProbeCell {
            seed,
            dim: cfg.dim,
            k,
            g,
            c,
            norm_adot,
            ratio_closed_numeric: ratio,
            dual_route_residual: residual,
            landsberg_ratio,
            landsberg_vanishing: landsberg_flag,
            berwald_verdict: verdict,
        },
        lambda,
    ))
}

/// Run the probe over the full (seed, k, g, c) grid. Cells are independent
/// and evaluated in parallel; assembly order is the deterministic grid order.
pub fn landsberg_to_berwald_probe(cfg: &ProbeConfig) -> Result<ProbeReport> {
    let mut grid = Vec::new();
    for &seed in &cfg.seeds {
        for &k in &cfg.k_values {
            for &g in &cfg.g_values {
                for &c in &cfg.c_values {
                    grid.push((seed, k, g, c));
                }
            }
        }
    }
    let results: Vec<Result<(ProbeCell, f64)>> = grid
        .par_iter()
        .map(|&(seed, k, g, c)| probe_cell(cfg, seed, k, g, c))
        .collect();
    let mut cells = Vec::with_capacity(results.len());
    let mut lambdas = std::collections::HashMap::new();
    for r in results {
        let (cell, lambda) = r?;
        lambdas.insert(
            (cell.seed, cell.k.to_bits(), cell.g.to_bits(), cell.c.to_bits()),
            lambda,
        );
        cells.push(cell);
    }

    // scaling table across c at fixed (seed, k, g), nonzero cells only
    let mut scaling = Vec::new();
    if let Some(&c0) = cfg.c_values.first() {
        for &seed in &cfg.seeds {
            for &k in &cfg.k_values {
                for &g in &cfg.g_values {
                    if k == 0.0 || g == 0.0 {
                        continue;
                    }
                    let l0 = lambdas[&(seed, k.to_bits(), g.to_bits(), c0.to_bits())];
                    if l0 <= 0.0 {
                        continue;
                    }
                    for &c in &cfg.c_values {
                        let l = lambdas[&(seed, k.to_bits(), g.to_bits(), c.to_bits())];
                        scaling.push(ScalingRow {
                            seed,
                            k,
                            g,
                            c,
                            lambda: l,
                            measured_ratio: l / l0,
                            expected_ratio: (1.0 - c * c) / (1.0 - c0 * c0),
                        });
                    }
                }
            }
        }
    }

    let mut max_dual = 0.0_f64;
    let mut max_zero = 0.0_f64;
    let mut min_nonzero = f64::INFINITY;
    let mut pattern_ok = true;
    for cell in &cells {
        max_dual = max_dual.max(cell.dual_route_residual);
        let should_vanish = cell.k == 0.0 || cell.g == 0.0;
        if should_vanish {
            max_zero = max_zero.max(cell.norm_adot);
        } else {
            min_nonzero = min_nonzero.min(cell.norm_adot);
        }
        // the direction-sweep vanishing verdict must single out exactly the
        // Berwald (k = 0) and Riemannian (g = 0) cells
        if cell.landsberg_vanishing != should_vanish {
            pattern_ok = false;
        }
    }
    let pass = max_dual <= 1e-7 && max_zero <= 1e-10 && min_nonzero > 1e-10 && pattern_ok;
    Ok(ProbeReport {
        config: cfg.clone(),
        cells,
        scaling,
        max_dual_route_residual: max_dual,
        max_zero_cell_norm: max_zero,
        min_nonzero_cell_norm: min_nonzero,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{berwald_jet, landsberg_candidate_jet, landsberg_candidate_jet_with, random_jet};

    fn sample_y(dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 5);
        loop {
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            if y.iter().map(|t| t * t).sum::<f64>() > 0.05 {
                return y;
            }
        }
    }

    #[test]
    fn u_routes_agree() {
        let k = 0.45;
        let jet = landsberg_candidate_jet(3, 5, k).unwrap();
        let y = sample_y(3, 5);
        let (u1a, u2a, u3a) = particular_u(&jet, &y, k).unwrap();
        let (u1b, u2b, u3b) = particular_u_raw(&jet, &y, k).unwrap();
        let s1 = u1b.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            assert!((u1a[i] - u1b[i]).abs() < 1e-12 * s1);
        }
        let s2 = u2b.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for idx in 0..9 {
            let (i, j) = (idx / 3, idx % 3);
            assert!((u2a[(i, j)] - u2b[(i, j)]).abs() < 1e-12 * s2);
        }
        let s3 = u3b.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for ((i, j, l), v) in u3a.indexed_iter() {
            assert!((v - u3b[(i, j, l)]).abs() < 1e-11 * s3);
        }
    }

    #[test]
    fn u_vanishes_for_parallel_axis() {
        let jet = berwald_jet(3, 9).unwrap();
        let y = sample_y(3, 9);
        let (u1, u2, u3) = particular_u(&jet, &y, 0.0).unwrap();
        assert!(u1.iter().all(|t| t.abs() < 1e-14));
        assert!(u2.iter().all(|t| t.abs() < 1e-14));
        assert!(u3.iter().all(|t| t.abs() < 1e-14));
    }

    #[test]
    fn u_derivative_consistency_via_finite_differences() {
        let k = -0.3;
        let jet = landsberg_candidate_jet(3, 13, k).unwrap();
        let y = sample_y(3, 13);
        let (_, u2, u3) = particular_u(&jet, &y, k).unwrap();
        let h = 1e-6;
        for j in 0..3 {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[j] += h;
            ym[j] -= h;
            let (u1p, u2p, _) = particular_u(&jet, &yp, k).unwrap();
            let (u1m, u2m, _) = particular_u(&jet, &ym, k).unwrap();
            for kk in 0..3 {
                let fd = (u1p[kk] - u1m[kk]) / (2.0 * h);
                assert!(
                    (u2[(kk, j)] - fd).abs() < 1e-7 * (1.0 + fd.abs()),
                    "U2({},{})",
                    kk,
                    j
                );
                for m in 0..3 {
                    let fd3 = (u2p[(kk, m)] - u2m[(kk, m)]) / (2.0 * h);
                    assert!(
                        (u3[(kk, m, j)] - fd3).abs() < 2e-6 * (1.0 + fd3.abs()),
                        "U3({},{},{}) closed {} vs fd {}",
                        kk,
                        m,
                        j,
                        u3[(kk, m, j)],
                        fd3
                    );
                }
            }
        }
    }

    #[test]
    fn g3_closed_form_matches_differentiated_spray() {
        let k = 0.37;
        let jet = landsberg_candidate_jet(3, 17, k).unwrap();
        let y = sample_y(3, 17);
        let (g3_closed, yg3_closed) = particular_g3(&jet, &y, k).unwrap();
        let (_, _, g3_ad) = crate::spray::spray_derivatives(&jet, &y).unwrap();
        let scale = g3_ad.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for (idx, v) in g3_closed.indexed_iter() {
            assert!(
                (v - g3_ad[idx]).abs() < 1e-8 * scale,
                "G3 {:?}: closed {} vs ad {}",
                idx,
                v,
                g3_ad[idx]
            );
        }
        // lowered contraction
        let ylow = metric::covariant_y(&jet, &y).unwrap();
        let yscale = yg3_closed.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        for kk in 0..3 {
            for m in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for i in 0..3 {
                        s += ylow[i] * g3_ad[(i, kk, m, j)];
                    }
                    assert!(
                        (s - yg3_closed[(kk, m, j)]).abs() < 1e-8 * yscale,
                        "yG3 ({},{},{})",
                        kk,
                        m,
                        j
                    );
                }
            }
        }
        // angular-tensor re-expression agrees too
        let ang = particular_yg3_angular(&jet, &y, k).unwrap();
        for (idx, v) in ang.indexed_iter() {
            assert!((v - yg3_closed[idx]).abs() < 1e-10 * yscale);
        }
    }

    #[test]
    fn angular_representation_matches_direct_tensor() {
        let jet = landsberg_candidate_jet(4, 19, 0.2).unwrap();
        let y = sample_y(4, 19);
        let rep = angular_tensor_representation(&jet, &y).unwrap();
        let ev = metric::metric_tensor(&jet, &y).unwrap();
        let scale = linalg::max_abs(&ev.hmat);
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (rep[(i, j)] - ev.hmat[(i, j)]).abs() < 1e-10 * scale,
                    "({},{})",
                    i,
                    j
                );
            }
        }
    }

    #[test]
    fn dual_route_derivative_of_cartan_tensor() {
        for (dim, seed, k, c, g) in [
            (2usize, 3u64, 0.4, 0.5, 1.0),
            (3, 4, -0.25, 0.35, -0.8),
            (4, 5, 0.15, 0.7, 1.4),
        ] {
            let jet = landsberg_candidate_jet_with(dim, seed, k, c, g).unwrap();
            let y = sample_y(dim, seed);
            let closed = dot_a_closed(&jet, &y, k).unwrap();
            let numeric = dot_a_numeric(&jet, &y).unwrap();
            let scale = tensor3_max_abs(&numeric).max(1e-30);
            for (idx, v) in numeric.indexed_iter() {
                assert!(
                    (v - closed.adot[idx]).abs() < 1e-7 * scale,
                    "dim {} idx {:?}: numeric {} vs closed {}",
                    dim,
                    idx,
                    v,
                    closed.adot[idx]
                );
            }
            // m1 sign is opposite to the charge
            assert!(closed.m1 * g < 0.0);
        }
    }

    fn zero_charge_jet(dim: usize, seed: u64) -> PointJet {
        let base = random_jet(dim, seed, (0.2, 0.8), (0.0, 0.0)).unwrap();
        jets::build_point_jet(
            dim,
            base.a().clone(),
            base.da().clone(),
            base.b().clone(),
            base.db().clone(),
            0.0,
            Array1::zeros(dim),
        )
        .unwrap()
    }

    #[test]
    fn numeric_route_vanishes_on_berwald_and_riemannian_jets() {
        let jet = berwald_jet(3, 21).unwrap();
        let y = sample_y(3, 21);
        let adot = dot_a_numeric(&jet, &y).unwrap();
        assert!(tensor3_max_abs(&adot) < 1e-11, "{}", tensor3_max_abs(&adot));

        let rjet = zero_charge_jet(3, 22);
        let adot = dot_a_numeric(&rjet, &y).unwrap();
        assert!(tensor3_max_abs(&adot) < 1e-11);
    }

    #[test]
    fn numeric_route_is_symmetric_and_orthogonal() {
        let k = 0.3;
        let jet = landsberg_candidate_jet(3, 23, k).unwrap();
        let y = sample_y(3, 23);
        let adot = dot_a_numeric(&jet, &y).unwrap();
        let scale = tensor3_max_abs(&adot);
        assert!(scale > 1e-10, "family with k != 0 must have nonzero Adot");
        for kk in 0..3 {
            for m in 0..3 {
                for j in 0..3 {
                    assert!((adot[(kk, m, j)] - adot[(m, kk, j)]).abs() < 1e-10 * scale);
                    assert!((adot[(kk, m, j)] - adot[(kk, j, m)]).abs() < 1e-10 * scale);
                }
            }
        }
        for kk in 0..3 {
            for m in 0..3 {
                let mut s = 0.0;
                for j in 0..3 {
                    s += adot[(kk, m, j)] * y[j];
                }
                assert!(s.abs() < 1e-10 * scale, "orthogonality ({},{})", kk, m);
            }
        }
    }

    #[test]
    fn verdicts_on_the_three_families() {
        let report = berwald_verdict(&berwald_jet(3, 31).unwrap()).unwrap();
        assert_eq!(report.verdict, BerwaldVerdict::Berwald);
        assert!(report.max_spray_deviation < 1e-11);
        assert!(report.bdot_criterion_consistent);

        let report = berwald_verdict(&landsberg_candidate_jet(3, 32, 0.5).unwrap()).unwrap();
        assert_eq!(report.verdict, BerwaldVerdict::NotBerwald);
        assert!(report.max_abs_bdot > 1e-6);
        assert!(report.bdot_criterion_consistent);

        let report = berwald_verdict(&zero_charge_jet(3, 33)).unwrap();
        assert_eq!(report.verdict, BerwaldVerdict::Riemannian);
    }

    #[test]
    fn small_probe_grid() {
        let cfg = ProbeConfig {
            dim: 3,
            seeds: vec![1, 2],
            k_values: vec![0.0, 0.2],
            g_values: vec![0.0, 1.0],
            c_values: vec![0.4, 0.6],
            samples_per_cell: 2,
        };
        let report = landsberg_to_berwald_probe(&cfg).unwrap();
        assert!(report.pass, "dual {}, zero {}, nonzero {}",
            report.max_dual_route_residual, report.max_zero_cell_norm, report.min_nonzero_cell_norm);
        assert_eq!(report.cells.len(), 16);
        // scaling rows exist for the (k != 0, g != 0) groups and follow the factor
        assert!(!report.scaling.is_empty());
        for row in &report.scaling {
            assert!(
                (row.measured_ratio - row.expected_ratio).abs() < 1e-6 * row.expected_ratio.max(1.0),
                "measured {} expected {}",
                row.measured_ratio,
                row.expected_ratio
            );
        }
    }
}
