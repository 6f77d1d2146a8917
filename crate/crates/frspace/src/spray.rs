//! Spray coefficients and their y-derivatives.
//!
//! `spray` evaluates the closed form including the charge-gradient terms;
//! `spray_oracle` computes the same coefficients from the Finslerian
//! Christoffel symbols with x-derivatives of the metric tensor obtained by
//! seeding the point data — a fully independent route used as the arbiter.

use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::geom::{self, Geom};
use crate::jets::PointJet;
use crate::linalg;
use crate::riemannian;
use ndarray::{Array1, Array2, Array3, Array4};

/// Constant (jet-level) data entering the spray formula, at any scalar level.
#[derive(Clone, Debug)]
pub(crate) struct SprayData<T: Scalar> {
    pub geom: Geom<T>,
    /// Riemannian Christoffel symbols `a^k_{ij}`.
    pub gamma: Array3<T>,
    /// `nabla_i b_j`.
    pub nabla_b: Array2<T>,
    /// `f_mn`.
    pub f_skew: Array2<T>,
    /// Charge gradient `g_h`.
    pub dg: Array1<T>,
    /// Whether the charge gradient is nonzero (decided at the f64 level).
    pub has_dg: bool,
}

impl SprayData<f64> {
    pub fn from_jet(jet: &PointJet) -> SprayData<f64> {
        let bg = riemannian::background(jet);
        SprayData {
            geom: Geom::from_jet(jet),
            gamma: bg.gamma,
            nabla_b: bg.nabla_b,
            f_skew: bg.f_skew,
            dg: jet.dg().clone(),
            has_dg: !jet.charge_constant(),
        }
    }
}

impl<T: Scalar> SprayData<T> {
    pub fn lift(&self) -> SprayData<Dual<T>> {
        SprayData {
            geom: self.geom.lift(),
            gamma: self.gamma.mapv(Dual::constant),
            nabla_b: self.nabla_b.mapv(Dual::constant),
            f_skew: self.f_skew.mapv(Dual::constant),
            dg: self.dg.mapv(Dual::constant),
            has_dg: self.has_dg,
        }
    }
}

/// Charge-gradient coefficients, with the product of the trace vector and the
/// reciprocal charge cancelled analytically so the formula stays regular at
/// zero charge:
/// `E^i = Mbar (yg) y^i + (K^2 q (yg)/B^2) g^{ih}(q^2 b_h - b v_h)
///        - (1/2) Mbar K^2 g^{ih} g_h`.
pub(crate) fn e_generic<T: Scalar>(sd: &SprayData<T>, y: &Array1<T>) -> Result<Array1<T>> {
    let n = sd.geom.n;
    if !sd.has_dg {
        return Ok(Array1::from_elem(n, T::zero()));
    }
    let tg = geom::tangent(&sd.geom, y.clone());
    let sc = geom::scalars(&sd.geom, &tg);
    let yg = (0..n).fold(T::zero(), |acc, h| acc + sd.dg[h] * y[h]);
    let mb = geom::mbar(&sd.geom, y);
    let gmat = geom::metric_tensor(&sd.geom, y);
    let ginv = linalg::invert(&gmat, "spray charge terms")?;
    let w = Array1::from_shape_fn(n, |h| tg.q2 * sd.geom.b[h] - tg.b * tg.v[h]);
    let half = T::from_f64(0.5);
    let mid_coef = sc.k2 * tg.q * yg / (sc.b_form * sc.b_form);
    Ok(Array1::from_shape_fn(n, |i| {
        let mut mid = T::zero();
        let mut grad = T::zero();
        for h in 0..n {
            mid = mid + ginv[(i, h)] * w[h];
            grad = grad + ginv[(i, h)] * sd.dg[h];
        }
        mb * yg * y[i] + mid_coef * mid - half * mb * sc.k2 * grad
    }))
}

/// Spray coefficients
/// `G^i = (g/nu)(y^j y^h nabla_j b_h + g q b^j f_j) v^i - g q f^i + E^i
///        + a^i_{nm} y^n y^m`.
pub(crate) fn spray_generic<T: Scalar>(
    sd: &SprayData<T>,
    y: &Array1<T>,
) -> Result<(Array1<T>, Array1<T>)> {
    let n = sd.geom.n;
    let tg = geom::tangent(&sd.geom, y.clone());
    let sc = geom::scalars(&sd.geom, &tg);
    // s_k = y^h nabla_h b_k and (ys) = y^k s_k
    let s = Array1::from_shape_fn(n, |k| {
        (0..n).fold(T::zero(), |acc, h| acc + y[h] * sd.nabla_b[(h, k)])
    });
    let ys = (0..n).fold(T::zero(), |acc, k| acc + s[k] * y[k]);
    // f_j = f_jn y^n, f^i = a^{ik} f_k, sigma = b^k f_k
    let f_low = Array1::from_shape_fn(n, |j| {
        (0..n).fold(T::zero(), |acc, m| acc + sd.f_skew[(j, m)] * y[m])
    });
    let f_up = Array1::from_shape_fn(n, |i| {
        (0..n).fold(T::zero(), |acc, k| acc + sd.geom.ainv[(i, k)] * f_low[k])
    });
    let sigma = (0..n).fold(T::zero(), |acc, k| acc + sd.geom.bup[k] * f_low[k]);

    let e = e_generic(sd, y)?;

    let lead = sd.geom.g / sc.nu * (ys + sd.geom.g * tg.q * sigma);
    let gq_term = sd.geom.g * tg.q;
    let g_out = Array1::from_shape_fn(n, |i| {
        let mut quad = T::zero();
        for nn in 0..n {
            for m in 0..n {
                quad = quad + sd.gamma[(i, nn, m)] * y[nn] * y[m];
            }
        }
        lead * tg.vup[i] - gq_term * f_up[i] + e[i] + quad
    });
    Ok((g_out, e))
}

/// Spray output at one (jet, y): the coefficients and the charge-gradient part.
#[derive(Clone, Debug)]
pub struct SprayOutput {
    /// `G^i`.
    pub g: Array1<f64>,
    /// `E^i` (zero when the charge gradient vanishes).
    pub e: Array1<f64>,
}

fn checked_y(jet: &PointJet, y: &[f64]) -> Result<Array1<f64>> {
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
    Ok(Array1::from_vec(y.to_vec()))
}

/// Closed-form spray coefficients.
pub fn spray(jet: &PointJet, y: &[f64]) -> Result<SprayOutput> {
    let yv = checked_y(jet, y)?;
    let sd = SprayData::from_jet(jet);
    let (g, e) = spray_generic(&sd, &yv)?;
    Ok(SprayOutput { g, e })
}

/// Independent spray route: Finslerian Christoffel symbols contracted with y,
/// with `d g_ij / d x^k` obtained by differentiating the whole metric
/// pipeline through the point data.
pub fn spray_oracle(jet: &PointJet, y: &[f64]) -> Result<Array1<f64>> {
    let yv = checked_y(jet, y)?;
    let n = jet.dim();
    let yd = yv.mapv(Dual::constant);
    // dgx[(k,i,j)] = d_k g_ij
    let mut dgx = Array3::zeros((n, n, n));
    for k in 0..n {
        let a_d = Array2::from_shape_fn((n, n), |(i, j)| Dual {
            re: jet.a()[(i, j)],
            du: jet.da()[(k, i, j)],
        });
        let b_d = Array1::from_shape_fn(n, |i| Dual {
            re: jet.b()[i],
            du: jet.db()[(k, i)],
        });
        let g_d = Dual {
            re: jet.g(),
            du: jet.dg()[k],
        };
        let geom_d = Geom::new(a_d, b_d, g_d)?;
        let gm = geom::metric_tensor(&geom_d, &yd);
        for i in 0..n {
            for j in 0..n {
                dgx[(k, i, j)] = gm[(i, j)].du;
            }
        }
    }
    let g0 = Geom::from_jet(jet);
    let gmat = geom::metric_tensor(&g0, &yv);
    let ginv = linalg::invert(&gmat, "spray oracle")?;
    // gamma^i_{nm} y^n y^m = g^{ij} [ y^m y^n d_m g_jn - (1/2) y^n y^m d_j g_nm ]
    let mut rhs = Array1::zeros(n);
    for j in 0..n {
        let mut t = 0.0;
        for m in 0..n {
            for nn in 0..n {
                t += yv[m] * yv[nn] * (dgx[(m, j, nn)] - 0.5 * dgx[(j, nn, m)]);
            }
        }
        rhs[j] = t;
    }
    Ok(ginv.dot(&rhs))
}

fn seeded<T: Scalar>(y: &Array1<T>, k: usize) -> Array1<Dual<T>> {
    let mut yd = y.mapv(Dual::constant);
    yd[k] = Dual::seeded(y[k]);
    yd
}

pub(crate) fn spray_d1<T: Scalar>(sd: &SprayData<T>, y: &Array1<T>) -> Result<Array2<T>> {
    let n = sd.geom.n;
    let sdl = sd.lift();
    let mut g1 = Array2::from_elem((n, n), T::zero());
    for k in 0..n {
        let (g, _) = spray_generic(&sdl, &seeded(y, k))?;
        for i in 0..n {
            g1[(i, k)] = g[i].du;
        }
    }
    Ok(g1)
}

pub(crate) fn spray_d2<T: Scalar>(sd: &SprayData<T>, y: &Array1<T>) -> Result<Array3<T>> {
    let n = sd.geom.n;
    let sdl = sd.lift();
    let sdll = sdl.lift();
    let mut g2 = Array3::from_elem((n, n, n), T::zero());
    for k in 0..n {
        let yk = seeded(y, k);
        for m in k..n {
            let (g, _) = spray_generic(&sdll, &seeded(&yk, m))?;
            for i in 0..n {
                let v = g[i].du.du;
                g2[(i, k, m)] = v;
                g2[(i, m, k)] = v;
            }
        }
    }
    Ok(g2)
}

pub(crate) fn spray_d3<T: Scalar>(sd: &SprayData<T>, y: &Array1<T>) -> Result<Array4<T>> {
    let n = sd.geom.n;
    let sdl = sd.lift();
    let sdll = sdl.lift();
    let sdlll = sdll.lift();
    let mut g3 = Array4::from_elem((n, n, n, n), T::zero());
    for k in 0..n {
        let yk = seeded(y, k);
        for m in k..n {
            let ykm = seeded(&yk, m);
            for j in m..n {
                let (g, _) = spray_generic(&sdlll, &seeded(&ykm, j))?;
                for i in 0..n {
                    let v = g[i].du.du.du;
                    // third partials commute; fill all index orders
                    g3[(i, k, m, j)] = v;
                    g3[(i, k, j, m)] = v;
                    g3[(i, m, k, j)] = v;
                    g3[(i, m, j, k)] = v;
                    g3[(i, j, k, m)] = v;
                    g3[(i, j, m, k)] = v;
                }
            }
        }
    }
    Ok(g3)
}

/// Successive exact y-derivatives of the spray coefficients:
/// `G^i_k`, `G^i_km`, `G^i_kmj`.
pub fn spray_derivatives(
    jet: &PointJet,
    y: &[f64],
) -> Result<(Array2<f64>, Array3<f64>, Array4<f64>)> {
    let yv = checked_y(jet, y)?;
    let sd = SprayData::from_jet(jet);
    Ok((
        spray_d1(&sd, &yv)?,
        spray_d2(&sd, &yv)?,
        spray_d3(&sd, &yv)?,
    ))
}

/// First-derivative coefficients of the exact-form case.
#[derive(Clone, Debug)]
pub struct UCoefficients {
    /// `U_k = -(1/nu^2) nu_k (ys) + (2/nu) s_k`.
    pub u1: Array1<f64>,
    /// `U_km`, the y-derivative of `U_k`.
    pub u2: Array2<f64>,
    /// `eta_km = r_km - v_k v_m / q^2`.
    pub eta2: Array2<f64>,
}

/// Exact-form guard: the skew part of the covariant derivative and the charge
/// gradient must vanish.
fn require_exact_form(jet: &PointJet) -> Result<(Array2<f64>, Array3<f64>)> {
    let bg = riemannian::background(jet);
    let fmax = linalg::max_abs(&bg.f_skew);
    let scale = linalg::max_abs(&bg.nabla_b).max(1.0);
    if fmax > 1e-10 * scale {
        return Err(Error::NotExactForm(fmax));
    }
    let dgmax = jet.dg().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if dgmax > 0.0 {
        return Err(Error::ChargeNotConstant(dgmax));
    }
    Ok((bg.nabla_b, bg.gamma))
}

/// `U_k`, `U_km`, and the transverse projector for exact-form jets.
pub fn u_coefficients(jet: &PointJet, y: &[f64]) -> Result<UCoefficients> {
    let yv = checked_y(jet, y)?;
    let (nabla_b, _) = require_exact_form(jet)?;
    let n = jet.dim();
    let g = Geom::from_jet(jet);
    let tg = geom::tangent(&g, yv.clone());
    let sc = geom::scalars(&g, &tg);
    let s = Array1::from_shape_fn(n, |k| (0..n).map(|h| yv[h] * nabla_b[(h, k)]).sum());
    let ys = s.dot(&yv);
    let one_c2 = 1.0 - g.c2;
    let nu = sc.nu;
    let nu_k = Array1::from_shape_fn(n, |k| tg.v[k] / tg.q + one_c2 * g.g * g.b[k]);
    let r = Array2::from_shape_fn((n, n), |(i, j)| g.a[(i, j)] - g.b[i] * g.b[j]);
    let eta2 = Array2::from_shape_fn((n, n), |(k, m)| r[(k, m)] - tg.v[k] * tg.v[m] / tg.q2);
    let u1 = Array1::from_shape_fn(n, |k| -nu_k[k] * ys / (nu * nu) + 2.0 * s[k] / nu);
    let u2 = Array2::from_shape_fn((n, n), |(k, m)| {
        2.0 * nu_k[k] * nu_k[m] * ys / (nu * nu * nu)
            - 2.0 / (nu * nu) * (nu_k[k] * s[m] + nu_k[m] * s[k])
            - eta2[(k, m)] * ys / (nu * nu * tg.q)
            + 2.0 / nu * nabla_b[(m, k)]
    });
    Ok(UCoefficients { u1, u2, eta2 })
}

/// Derivative of the input 1-form along the spray:
/// `bdot = (q/nu)(ys) + (g q^2/nu) sigma - b_k E^k`.
pub fn dot_b(jet: &PointJet, y: &[f64]) -> Result<f64> {
    let yv = checked_y(jet, y)?;
    let sd = SprayData::from_jet(jet);
    let e = e_generic(&sd, &yv)?;
    let cs = riemannian::contraction_scalars(jet, y);
    let g = Geom::from_jet(jet);
    let tg = geom::tangent(&g, yv);
    let sc = geom::scalars(&g, &tg);
    let be = jet.b().dot(&e);
    Ok(tg.q / sc.nu * cs.ys + jet.g() * tg.q2 / sc.nu * cs.sigma - be)
}

/// Definitional route for the same scalar:
/// `bdot = (ys) - (G^k - a^k_{mn} y^m y^n) b_k`.
pub fn dot_b_definitional(jet: &PointJet, y: &[f64]) -> Result<f64> {
    let yv = checked_y(jet, y)?;
    let sd = SprayData::from_jet(jet);
    let (g_out, _) = spray_generic(&sd, &yv)?;
    let cs = riemannian::contraction_scalars(jet, y);
    let n = jet.dim();
    let mut acc = cs.ys;
    for k in 0..n {
        let mut quad = 0.0;
        for m in 0..n {
            for nn in 0..n {
                quad += sd.gamma[(k, m, nn)] * yv[m] * yv[nn];
            }
        }
        acc -= (g_out[k] - quad) * jet.b()[k];
    }
    Ok(acc)
}

/// Scalar `bdot` as a generic function of y, for differentiation.
fn dot_b_scalar_generic<T: Scalar>(sd: &SprayData<T>, y: &Array1<T>) -> Result<T> {
    let n = sd.geom.n;
    let (g_out, _) = spray_generic(sd, y)?;
    let s = Array1::from_shape_fn(n, |k| {
        (0..n).fold(T::zero(), |acc, h| acc + y[h] * sd.nabla_b[(h, k)])
    });
    let ys = (0..n).fold(T::zero(), |acc, k| acc + s[k] * y[k]);
    let mut acc = ys;
    for k in 0..n {
        let mut quad = T::zero();
        for m in 0..n {
            for nn in 0..n {
                quad = quad + sd.gamma[(k, m, nn)] * y[m] * y[nn];
            }
        }
        acc = acc - (g_out[k] - quad) * sd.geom.b[k];
    }
    Ok(acc)
}

/// Contracted covariant derivative of the axis covector:
/// `Db_n = y^h nabla_h b_n - ((1/2) G^k_n - a^k_{nh} y^h) b_k`.
pub fn covariant_db(jet: &PointJet, y: &[f64]) -> Result<Array1<f64>> {
    let yv = checked_y(jet, y)?;
    let sd = SprayData::from_jet(jet);
    let g1 = spray_d1(&sd, &yv)?;
    let n = jet.dim();
    let mut out = Array1::zeros(n);
    for nn in 0..n {
        let mut t = 0.0;
        for h in 0..n {
            t += yv[h] * sd.nabla_b[(h, nn)];
        }
        for k in 0..n {
            let mut chris = 0.0;
            for h in 0..n {
                chris += sd.gamma[(k, nn, h)] * yv[h];
            }
            t -= (0.5 * g1[(k, nn)] - chris) * jet.b()[k];
        }
        out[nn] = t;
    }
    Ok(out)
}

/// Alternative route through the skew part and the y-gradient of `bdot`:
/// `Db_n = (1/2) y^h (nabla_h b_n - nabla_n b_h) + (1/2) d(bdot)/dy^n`.
pub fn covariant_db_skew_route(jet: &PointJet, y: &[f64]) -> Result<Array1<f64>> {
    let yv = checked_y(jet, y)?;
    let sd = SprayData::from_jet(jet);
    let sdl = sd.lift();
    let n = jet.dim();
    let mut grad = Array1::zeros(n);
    for k in 0..n {
        grad[k] = dot_b_scalar_generic(&sdl, &seeded(&yv, k))?.du;
    }
    let mut out = Array1::zeros(n);
    for nn in 0..n {
        let mut skew = 0.0;
        for h in 0..n {
            skew += yv[h] * (sd.nabla_b[(h, nn)] - sd.nabla_b[(nn, h)]);
        }
        out[nn] = 0.5 * skew + 0.5 * grad[nn];
    }
    Ok(out)
}

/// Full spray evaluation bundle.
#[derive(Clone, Debug)]
pub struct SprayEval {
    pub g: Array1<f64>,
    pub e: Array1<f64>,
    pub g1: Array2<f64>,
    pub g2: Array3<f64>,
    pub g3: Array4<f64>,
    pub bdot: f64,
    pub db_n: Array1<f64>,
}

impl SprayEval {
    pub fn evaluate(jet: &PointJet, y: &[f64]) -> Result<SprayEval> {
        let out = spray(jet, y)?;
        let (g1, g2, g3) = spray_derivatives(jet, y)?;
        let bdot = dot_b(jet, y)?;
        let db_n = covariant_db(jet, y)?;
        Ok(SprayEval {
            g: out.g,
            e: out.e,
            g1,
            g2,
            g3,
            bdot,
            db_n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{berwald_jet, landsberg_candidate_jet, random_jet, TangentState};
    use crate::rng::{derive_seed, stream_rng};
    use rand::Rng;

    fn sample_y(dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 5);
        loop {
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            if y.iter().map(|t| t * t).sum::<f64>() > 0.05 {
                return y;
            }
        }
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

    fn zero_charge_jet(dim: usize, seed: u64) -> PointJet {
        // g = 0 with vanishing gradient: the structure is Riemannian
        let base = random_jet(dim, seed, (0.2, 0.8), (0.0, 0.0)).unwrap();
        crate::jets::build_point_jet(
            dim,
            base.a().clone(),
            base.da().clone(),
            base.b().clone(),
            base.db().clone(),
            0.0,
            ndarray::Array1::zeros(dim),
        )
        .unwrap()
    }

    #[test]
    fn riemannian_charge_reduces_to_christoffel_contraction() {
        let jet = zero_charge_jet(3, 41);
        let y = sample_y(3, 41);
        let out = spray(&jet, &y).unwrap();
        let quad = riemannian_quadratic(&jet, &y);
        let scale = quad.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            assert!((out.g[i] - quad[i]).abs() < 1e-12 * scale);
            assert_eq!(out.e[i], 0.0);
        }
    }

    #[test]
    fn berwald_jets_reduce_to_christoffel_contraction() {
        for seed in 0..5 {
            let jet = berwald_jet(3, seed).unwrap();
            let y = sample_y(3, seed);
            let out = spray(&jet, &y).unwrap();
            let quad = riemannian_quadratic(&jet, &y);
            let scale = quad.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
            for i in 0..3 {
                assert!(
                    (out.g[i] - quad[i]).abs() < 1e-11 * scale,
                    "seed {} component {}: {} vs {}",
                    seed,
                    i,
                    out.g[i],
                    quad[i]
                );
            }
        }
    }

    #[test]
    fn oracle_reduces_to_christoffel_contraction_on_special_jets() {
        // zero charge everywhere
        let jet = zero_charge_jet(3, 42);
        let y = sample_y(3, 42);
        let oracle = spray_oracle(&jet, &y).unwrap();
        let quad = riemannian_quadratic(&jet, &y);
        let scale = quad.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            assert!((oracle[i] - quad[i]).abs() < 1e-11 * scale);
        }
        // parallel axis with constant charge
        let jet = berwald_jet(3, 43).unwrap();
        let oracle = spray_oracle(&jet, &y).unwrap();
        let quad = riemannian_quadratic(&jet, &y);
        let scale = quad.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            assert!((oracle[i] - quad[i]).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn closed_form_matches_oracle_on_generic_jets() {
        let mut worst = 0.0_f64;
        for trial in 0..40u64 {
            let dim = 2 + (trial % 4) as usize;
            let jet = random_jet(dim, derive_seed(97, 1, trial), (0.2, 0.9), (-1.8, 1.8)).unwrap();
            let y = sample_y(dim, derive_seed(97, 2, trial));
            let closed = spray(&jet, &y).unwrap().g;
            let oracle = spray_oracle(&jet, &y).unwrap();
            let scale = oracle.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
            for i in 0..dim {
                worst = worst.max((closed[i] - oracle[i]).abs() / scale);
            }
        }
        assert!(worst < 1e-8, "worst relative residual {}", worst);
    }

    #[test]
    fn spray_is_positively_two_homogeneous() {
        let jet = random_jet(3, 43, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y = sample_y(3, 43);
        let g1 = spray(&jet, &y).unwrap().g;
        for lambda in [0.5, 2.0, 10.0] {
            let y2: Vec<f64> = y.iter().map(|t| lambda * t).collect();
            let g2 = spray(&jet, &y2).unwrap().g;
            let scale = g2.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
            for i in 0..3 {
                assert!(
                    (g2[i] - lambda * lambda * g1[i]).abs() < 1e-10 * scale,
                    "lambda {} component {}",
                    lambda,
                    i
                );
            }
        }
    }

    #[test]
    fn euler_identities_for_the_derivative_ladder() {
        let jet = random_jet(3, 47, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y = sample_y(3, 47);
        let out = spray(&jet, &y).unwrap();
        let (g1, g2, g3) = spray_derivatives(&jet, &y).unwrap();
        let n = 3;
        let scale = out.g.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            let c1: f64 = (0..n).map(|k| g1[(i, k)] * y[k]).sum();
            assert!((c1 - 2.0 * out.g[i]).abs() < 1e-10 * scale, "G1 y = 2G");
            for k in 0..n {
                let c2: f64 = (0..n).map(|m| g2[(i, k, m)] * y[m]).sum();
                assert!((c2 - g1[(i, k)]).abs() < 1e-10 * scale, "G2 y = G1");
                for m in 0..n {
                    let c3: f64 = (0..n).map(|j| g3[(i, k, m, j)] * y[j]).sum();
                    assert!(c3.abs() < 1e-9 * scale, "G3 y = 0, got {}", c3);
                }
            }
        }
    }

    #[test]
    fn contraction_with_axis_covector() {
        // b_k (G^k - a^k_{mn} y^m y^n) =
        //   (g/nu)(ys)(1-c^2) b - (g q^2/nu) sigma + b_k E^k
        let jet = random_jet(4, 53, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y = sample_y(4, 53);
        let out = spray(&jet, &y).unwrap();
        let quad = riemannian_quadratic(&jet, &y);
        let lhs: f64 = (0..4).map(|k| jet.b()[k] * (out.g[k] - quad[k])).sum();
        let cs = riemannian::contraction_scalars(&jet, &y);
        let ts = TangentState::new(&jet, &y).unwrap();
        let (_, _, sc) = crate::metric::metric_k(&jet, &y).unwrap();
        let c2 = jet.c() * jet.c();
        let be: f64 = (0..4).map(|k| jet.b()[k] * out.e[k]).sum();
        let rhs = jet.g() / sc.nu * cs.ys * (1.0 - c2) * ts.b - jet.g() * ts.q * ts.q / sc.nu * cs.sigma + be;
        assert!(
            (lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()),
            "lhs {} rhs {}",
            lhs,
            rhs
        );
    }

    #[test]
    fn charge_gradient_contraction_expansion() {
        // b_h E^h expanded in the gradient scalars; the (bg) coefficient is
        // q B / nu after the inverse-metric contraction collapses
        for trial in 0..10u64 {
            let dim = 2 + (trial % 3) as usize;
            let jet = random_jet(dim, derive_seed(59, 3, trial), (0.2, 0.9), (-1.8, 1.8)).unwrap();
            let y = sample_y(dim, derive_seed(59, 4, trial));
            let out = spray(&jet, &y).unwrap();
            let lhs: f64 = (0..dim).map(|h| jet.b()[h] * out.e[h]).sum();
            let cs = riemannian::contraction_scalars(&jet, &y);
            let ts = TangentState::new(&jet, &y).unwrap();
            let (_, _, sc) = crate::metric::metric_k(&jet, &y).unwrap();
            let mb = sc.mbar;
            let c2 = jet.c() * jet.c();
            let s2 = ts.s * ts.s;
            let cs2 = c2 * s2 - ts.b * ts.b;
            let rhs = ts.b * mb * cs.yg
                + (ts.q * ts.q / sc.b_form + 0.5 * mb * jet.g()) * cs.yg * cs2 / sc.nu
                - 0.5 * mb * cs.bg * ts.q * sc.b_form / sc.nu;
            assert!(
                (lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()),
                "trial {}: lhs {} rhs {}",
                trial,
                lhs,
                rhs
            );
        }
    }

    #[test]
    fn exact_case_closed_derivatives() {
        // jets with exact axis form and constant charge: G1 and G2 match the
        // U-coefficient representation
        let k_prop = 0.4;
        let jet = landsberg_candidate_jet(3, 61, k_prop).unwrap();
        let y = sample_y(3, 61);
        let yv = Array1::from_vec(y.clone());
        let (g1, g2, _) = spray_derivatives(&jet, &y).unwrap();
        let uc = u_coefficients(&jet, &y).unwrap();
        let cs = riemannian::contraction_scalars(&jet, &y);
        let ts = TangentState::new(&jet, &y).unwrap();
        let (_, _, sc) = crate::metric::metric_k(&jet, &y).unwrap();
        let gamma = riemannian::christoffel(&jet);
        let n = 3;
        let g = jet.g();
        let r_up = {
            // r^i_k = a^{ih} r_{hk} = delta - b^i b_k
            let bup = jet.b_up();
            Array2::from_shape_fn((n, n), |(i, k)| {
                (if i == k { 1.0 } else { 0.0 }) - bup[i] * jet.b()[k]
            })
        };
        let vup = &yv - &(&jet.b_up() * ts.b);
        let scale = g1.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            for k in 0..n {
                let mut chris = 0.0;
                for m in 0..n {
                    chris += gamma[(i, k, m)] * y[m];
                }
                let pred = g * uc.u1[k] * vup[i] + g / sc.nu * cs.ys * r_up[(i, k)] + 2.0 * chris;
                assert!(
                    (g1[(i, k)] - pred).abs() < 1e-9 * scale,
                    "G1({},{}) {} vs {}",
                    i,
                    k,
                    g1[(i, k)],
                    pred
                );
                for m in 0..n {
                    let pred2 = g * uc.u1[k] * r_up[(i, m)]
                        + g * uc.u1[m] * r_up[(i, k)]
                        + g * uc.u2[(k, m)] * vup[i]
                        + 2.0 * gamma[(i, k, m)];
                    assert!(
                        (g2[(i, k, m)] - pred2).abs() < 1e-9 * scale,
                        "G2({},{},{})",
                        i,
                        k,
                        m
                    );
                }
            }
        }
    }

    #[test]
    fn exact_case_contraction_identities() {
        let jet = landsberg_candidate_jet(4, 67, -0.6).unwrap();
        let y = sample_y(4, 67);
        let (_, g2, _) = spray_derivatives(&jet, &y).unwrap();
        let uc = u_coefficients(&jet, &y).unwrap();
        let ts = TangentState::new(&jet, &y).unwrap();
        let gamma = riemannian::christoffel(&jet);
        let n = 4;
        let g = jet.g();
        let c2 = jet.c() * jet.c();
        let scale = g2.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for k in 0..n {
            for m in 0..n {
                // with b_i
                let lhs_b: f64 = (0..n).map(|i| jet.b()[i] * g2[(i, k, m)]).sum();
                let mut chris_b = 0.0;
                let mut chris_u = 0.0;
                for i in 0..n {
                    chris_b += jet.b()[i] * gamma[(i, k, m)];
                    chris_u += ts.u[i] * gamma[(i, k, m)];
                }
                let rhs_b = (1.0 - c2)
                    * (g * uc.u1[k] * jet.b()[m] + g * uc.u1[m] * jet.b()[k] + g * uc.u2[(k, m)] * ts.b)
                    + 2.0 * chris_b;
                assert!(
                    (lhs_b - rhs_b).abs() < 1e-9 * scale,
                    "axis contraction ({},{})",
                    k,
                    m
                );
                // with u_i
                let lhs_u: f64 = (0..n).map(|i| ts.u[i] * g2[(i, k, m)]).sum();
                let rhs_u = g * uc.u1[k] * ts.v[m]
                    + g * uc.u1[m] * ts.v[k]
                    + g * uc.u2[(k, m)] * ts.q * ts.q
                    + 2.0 * chris_u;
                assert!(
                    (lhs_u - rhs_u).abs() < 1e-9 * scale,
                    "lowered contraction ({},{})",
                    k,
                    m
                );
            }
        }
    }

    #[test]
    fn u_coefficients_match_their_derivative_route() {
        let jet = landsberg_candidate_jet(3, 71, 0.8).unwrap();
        let y = sample_y(3, 71);
        let uc = u_coefficients(&jet, &y).unwrap();
        // eta annihilates y
        let yv = Array1::from_vec(y.clone());
        let ey = uc.eta2.dot(&yv);
        assert!(ey.iter().all(|t| t.abs() < 1e-12));
        // U_km = dU_k/dy^m by central differences
        let h = 1e-6;
        for m in 0..3 {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[m] += h;
            ym[m] -= h;
            let up = u_coefficients(&jet, &yp).unwrap().u1;
            let um = u_coefficients(&jet, &ym).unwrap().u1;
            for k in 0..3 {
                let fd = (up[k] - um[k]) / (2.0 * h);
                assert!(
                    (uc.u2[(k, m)] - fd).abs() < 1e-7 * (1.0 + fd.abs()),
                    "U2({},{}) {} vs fd {}",
                    k,
                    m,
                    uc.u2[(k, m)],
                    fd
                );
            }
        }
    }

    #[test]
    fn u_coefficients_reject_generic_jets() {
        let jet = random_jet(3, 73, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y = sample_y(3, 73);
        assert!(matches!(
            u_coefficients(&jet, &y),
            Err(Error::NotExactForm(_)) | Err(Error::ChargeNotConstant(_))
        ));
    }

    #[test]
    fn bdot_routes_agree_and_vanish_on_parallel_axis() {
        let jet = random_jet(3, 79, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y = sample_y(3, 79);
        let direct = dot_b(&jet, &y).unwrap();
        let definitional = dot_b_definitional(&jet, &y).unwrap();
        assert!(
            (direct - definitional).abs() < 1e-11 * (1.0 + direct.abs()),
            "{} vs {}",
            direct,
            definitional
        );
        let bjet = berwald_jet(3, 80).unwrap();
        let bdot = dot_b(&bjet, &y).unwrap();
        assert!(bdot.abs() < 1e-11);
    }

    #[test]
    fn covariant_db_routes_agree_and_contract_to_bdot() {
        let jet = random_jet(3, 83, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y = sample_y(3, 83);
        let route1 = covariant_db(&jet, &y).unwrap();
        let route2 = covariant_db_skew_route(&jet, &y).unwrap();
        let scale = route1.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            assert!(
                (route1[i] - route2[i]).abs() < 1e-10 * scale,
                "component {}: {} vs {}",
                i,
                route1[i],
                route2[i]
            );
        }
        let contracted: f64 = route1.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        let bdot = dot_b(&jet, &y).unwrap();
        assert!((contracted - bdot).abs() < 1e-10 * (1.0 + bdot.abs()));
        // parallel axis: Db vanishes identically
        let bjet = berwald_jet(3, 84).unwrap();
        let db = covariant_db(&bjet, &y).unwrap();
        assert!(db.iter().all(|t| t.abs() < 1e-11));
    }
}
