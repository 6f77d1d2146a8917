//! The regularized Finsleroid metric function `K` and first-level metric
//! objects: the characteristic form, the angle factor, the lowered tangent
//! covector, the metric tensor, and the charge-derivative scalar.

use crate::error::{Error, Result};
use crate::geom::{self, Geom};
use crate::jets::PointJet;
use crate::linalg;
use ndarray::{Array1, Array2};

/// Scalar bundle attached to one (jet, y) evaluation of the metric function.
#[derive(Clone, Debug)]
pub struct FinsleroidScalars {
    /// `h = sqrt(1 - g^2/4)`.
    pub h: f64,
    /// `G = g/h`.
    pub gq: f64,
    /// `g/2 + h`.
    pub g_plus: f64,
    /// `g/2 - h`.
    pub g_minus: f64,
    /// Characteristic quadratic form `B = b^2 + g q b + q^2`.
    pub b_form: f64,
    /// `L = q + (g/2) b`.
    pub l: f64,
    /// Angle entering the exponential factor.
    pub f: f64,
    /// `J = exp(-(G/2) f)`.
    pub j: f64,
    /// Metric function value `K = sqrt(B) J`.
    pub k: f64,
    /// `nu = q + (1 - c^2) g b`.
    pub nu: f64,
    /// `eta = 1 / (1 + g c sqrt(1 - c^2))`.
    pub eta: f64,
    /// Charge-derivative scalar defined by `dK/dg = (1/2) Mbar K`.
    pub mbar: f64,
}

/// Evaluation bundle for the metric tensor at one (jet, y).
#[derive(Clone, Debug)]
pub struct MetricEval {
    /// Lowered tangent covector `y_i`.
    pub y_low: Array1<f64>,
    /// Metric tensor `g_ij`.
    pub gmat: Array2<f64>,
    /// Inverse metric `g^{ij}`.
    pub ginv: Array2<f64>,
    /// Angular tensor `h_ij = g_ij - y_i y_j / K^2`.
    pub hmat: Array2<f64>,
    pub det_g: f64,
    /// `nu_k = v_k/q + (1 - c^2) g b_k`.
    pub nu_k: Array1<f64>,
}

/// `h = sqrt(1 - g^2/4)` and `G = g/h`.
pub fn charge_functions(g: f64) -> Result<(f64, f64)> {
    if !(-2.0 < g && g < 2.0) {
        return Err(Error::ChargeOutOfRange { g });
    }
    let h = (1.0 - 0.25 * g * g).sqrt();
    Ok((h, g / h))
}

fn checked_tangent(jet: &PointJet, y: &[f64]) -> Result<(Geom<f64>, geom::Tangent<f64>)> {
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
    Ok((g, tg))
}

/// Characteristic quadratic form `B` and the linear form `L`.
pub fn characteristic_form(jet: &PointJet, y: &[f64]) -> Result<(f64, f64)> {
    let (g, tg) = checked_tangent(jet, y)?;
    let sc = geom::scalars(&g, &tg);
    Ok((sc.b_form, sc.l))
}

/// The angle entering the exponential factor of the metric function.
///
/// Equals `-arctan(G/2) + arctan(L/(h b))` for `b > 0`, the same plus pi for
/// `b < 0`, and the common limit `pi/2 - arctan(G/2)` at `b = 0`.
pub fn angle_f(jet: &PointJet, y: &[f64]) -> Result<f64> {
    let (g, tg) = checked_tangent(jet, y)?;
    let sc = geom::scalars(&g, &tg);
    Ok(sc.f)
}

/// Metric function `K`, exponential factor `J`, and the full scalar bundle.
pub fn metric_k(jet: &PointJet, y: &[f64]) -> Result<(f64, f64, FinsleroidScalars)> {
    let (g, tg) = checked_tangent(jet, y)?;
    let sc = geom::scalars(&g, &tg);
    let c = jet.c();
    let eta = 1.0 / (1.0 + jet.g() * c * (1.0 - c * c).sqrt());
    let mbar = geom::mbar(&g, &tg.y);
    let out = FinsleroidScalars {
        h: g.h,
        gq: g.gq,
        g_plus: 0.5 * g.g + g.h,
        g_minus: 0.5 * g.g - g.h,
        b_form: sc.b_form,
        l: sc.l,
        f: sc.f,
        j: sc.j,
        k: sc.k,
        nu: sc.nu,
        eta,
        mbar,
    };
    Ok((sc.k, sc.j, out))
}

/// Lowered tangent covector `y_i = (u_i + g q b_i) K^2 / B = (1/2) dK^2/dy^i`.
pub fn covariant_y(jet: &PointJet, y: &[f64]) -> Result<Array1<f64>> {
    let (g, tg) = checked_tangent(jet, y)?;
    let sc = geom::scalars(&g, &tg);
    Ok(geom::covariant_y(&g, &tg, &sc))
}

/// Metric tensor with inverse, angular tensor, determinant, and `nu_k`.
pub fn metric_tensor(jet: &PointJet, y: &[f64]) -> Result<MetricEval> {
    let (g, tg) = checked_tangent(jet, y)?;
    let sc = geom::scalars(&g, &tg);
    let y_low = geom::covariant_y(&g, &tg, &sc);
    let gmat = geom::metric_tensor(&g, &tg.y);
    let ginv = linalg::invert(&gmat, "metric tensor")?;
    let n = jet.dim();
    let k2 = sc.k2;
    let hmat = Array2::from_shape_fn((n, n), |(i, j)| gmat[(i, j)] - y_low[i] * y_low[j] / k2);
    let det_g = linalg::determinant(&gmat);
    let one_c2 = 1.0 - g.c2;
    let nu_k = Array1::from_shape_fn(n, |kk| tg.v[kk] / tg.q + one_c2 * g.g * g.b[kk]);
    Ok(MetricEval {
        y_low,
        gmat,
        ginv,
        hmat,
        det_g,
        nu_k,
    })
}

/// Charge-derivative scalar `Mbar = 2 (dK/dg) / K`, by exact differentiation
/// in the charge with position, axis, and tangent data held fixed.
pub fn g_derivative_scalar(jet: &PointJet, y: &[f64]) -> Result<f64> {
    let (g, tg) = checked_tangent(jet, y)?;
    Ok(geom::mbar(&g, &tg.y))
}

/// Value and first three exact directional derivatives of the metric
/// function along `dir`, i.e. of `t -> K(x, y + t dir)` at `t = 0`.
///
/// Produced by triple-nested dual numbers; independent of any finite
/// differencing, so it serves as the reference for smoothness studies.
pub fn k_directional_derivatives(
    jet: &PointJet,
    y: &[f64],
    dir: &[f64],
) -> Result<(f64, f64, f64, f64)> {
    use crate::dual::Dual;
    if dir.len() != jet.dim() {
        return Err(Error::ShapeMismatch {
            what: "dir",
            expected: format!("dim {}", jet.dim()),
            got: format!("{}", dir.len()),
        });
    }
    let (g, tg) = checked_tangent(jet, y)?;
    let g3 = g.lift().lift().lift();
    type D3 = Dual<Dual<Dual<f64>>>;
    let yd: Array1<D3> = Array1::from_shape_fn(jet.dim(), |i| {
        let w = dir[i];
        let inner = Dual {
            re: tg.y[i],
            du: w,
        };
        let mid = Dual {
            re: inner,
            du: Dual::constant(w),
        };
        Dual {
            re: mid,
            du: Dual::constant(Dual::constant(w)),
        }
    });
    let tg3 = geom::tangent(&g3, yd);
    let sc = geom::scalars(&g3, &tg3);
    let k = sc.k;
    Ok((k.re.re.re, k.du.re.re, k.du.du.re, k.du.du.du))
}

/// Closed form of the charge-derivative scalar, used as a cross-check of the
/// differentiated route: `Mbar = qb/B - f/h^3 - G (b(2b+gq)/(4hB) - 1/(2h))`.
pub fn g_derivative_scalar_closed(jet: &PointJet, y: &[f64]) -> Result<f64> {
    let (g, tg) = checked_tangent(jet, y)?;
    let sc = geom::scalars(&g, &tg);
    let (b, q, bf, f, h, gq) = (tg.b, tg.q, sc.b_form, sc.f, g.h, g.gq);
    Ok(q * b / bf - f / (h * h * h) - gq * (b * (2.0 * b + g.g * q) / (4.0 * h * bf) - 1.0 / (2.0 * h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{build_point_jet, random_jet};
    use crate::linalg;
    use crate::rng::{derive_seed, stream_rng};
    use ndarray::{array, Array3};
    use rand::Rng;

    fn flat_jet(b1: f64, g: f64) -> PointJet {
        build_point_jet(
            2,
            array![[1.0, 0.0], [0.0, 1.0]],
            Array3::zeros((2, 2, 2)),
            array![b1, 0.0],
            Array2::zeros((2, 2)),
            g,
            Array1::zeros(2),
        )
        .unwrap()
    }

    #[test]
    fn charge_functions_values_and_bounds() {
        let (h, gq) = charge_functions(0.0).unwrap();
        assert_eq!((h, gq), (1.0, 0.0));
        let (h, gq) = charge_functions(1.0).unwrap();
        assert!((h - 3.0_f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((gq - 2.0 / 3.0_f64.sqrt()).abs() < 1e-15);
        assert!(charge_functions(2.0).is_err());
        assert!(charge_functions(-2.0).is_err());
    }

    #[test]
    fn riemannian_limit_of_b_and_k() {
        // g = 0: B = S^2 and K = S
        let jet = flat_jet(0.5, 0.0);
        let y = [0.3, 0.8];
        let (b_form, _) = characteristic_form(&jet, &y).unwrap();
        let s2 = y[0] * y[0] + y[1] * y[1];
        assert!((b_form - s2).abs() < 1e-15);
        let (k, j, _) = metric_k(&jet, &y).unwrap();
        assert_eq!(j, 1.0);
        assert!((k - s2.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn axis_evaluation_matches_eta_identity() {
        // at y = b^i: eta * B = c^2
        let jet = random_jet(3, 42, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let bup = jet.b_up().to_vec();
        let (b_form, _) = characteristic_form(&jet, &bup).unwrap();
        let (_, _, sc) = metric_k(&jet, &bup).unwrap();
        let c2 = jet.c() * jet.c();
        assert!(
            (sc.eta * b_form / c2 - 1.0).abs() < 1e-13,
            "eta*B = {} vs c^2 = {}",
            sc.eta * b_form,
            c2
        );
    }

    #[test]
    fn pythagorean_identity_for_l() {
        let jet = random_jet(4, 3, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let mut rng = stream_rng(9, 1);
        for _ in 0..100 {
            let y: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            if y.iter().all(|&t| t.abs() < 1e-3) {
                continue;
            }
            let (b_form, l) = characteristic_form(&jet, &y).unwrap();
            let (h, _) = charge_functions(jet.g()).unwrap();
            let ts = crate::jets::TangentState::new(&jet, &y).unwrap();
            let resid = (l * l + h * h * ts.b * ts.b - b_form).abs() / b_form;
            assert!(resid < 1e-13, "residual {}", resid);
        }
    }

    #[test]
    fn angle_is_continuous_across_the_transverse_plane() {
        // approach b = 0 from both sides along a path in y
        let jet = random_jet(3, 8, (0.3, 0.7), (0.5, 1.5)).unwrap();
        let bup = jet.b_up();
        let bup = &bup / bup.dot(jet.b()); // normalized so that b(bup) = 1
        // transverse direction: w with b_i w^i = 0
        let mut w = array![1.0, 0.4, -0.2];
        let bw = jet.b().dot(&w);
        w = &w - &(&bup * bw);
        assert!(jet.b().dot(&w).abs() < 1e-14);
        let mut prev_gap = f64::INFINITY;
        for eps_pow in 3..=9 {
            let eps = 10f64.powi(-eps_pow);
            let plus: Vec<f64> = (0..3).map(|i| w[i] + eps * bup[i]).collect();
            let minus: Vec<f64> = (0..3).map(|i| w[i] - eps * bup[i]).collect();
            let fp = angle_f(&jet, &plus).unwrap();
            let fm = angle_f(&jet, &minus).unwrap();
            let gap = (fp - fm).abs();
            assert!(gap < prev_gap * 1.5 + 1e-12, "gap not shrinking: {}", gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-8, "limit gap {}", prev_gap);
        // explicit value at b = 0
        let f0 = angle_f(&jet, &w.to_vec()).unwrap();
        let (_, gq) = charge_functions(jet.g()).unwrap();
        assert!((f0 - (std::f64::consts::FRAC_PI_2 - (0.5 * gq).atan())).abs() < 1e-14);
    }

    #[test]
    fn metric_function_is_positively_homogeneous() {
        let mut rng = stream_rng(17, 0);
        for trial in 0..100 {
            let dim = 2 + (trial % 4);
            let jet = random_jet(dim, derive_seed(17, 0, trial as u64), (0.2, 0.9), (-1.8, 1.8)).unwrap();
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            if y.iter().all(|&t| t.abs() < 1e-3) {
                continue;
            }
            let (k1, _, _) = metric_k(&jet, &y).unwrap();
            let y2: Vec<f64> = y.iter().map(|t| 2.0 * t).collect();
            let (k2, _, _) = metric_k(&jet, &y2).unwrap();
            assert!((k2 - 2.0 * k1).abs() / (2.0 * k1) < 1e-13);
        }
    }

    #[test]
    fn covariant_y_contraction_and_riemannian_limit() {
        let jet = random_jet(3, 5, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y = [0.7, -0.3, 0.4];
        let ylow = covariant_y(&jet, &y).unwrap();
        let (k, _, _) = metric_k(&jet, &y).unwrap();
        let contraction: f64 = ylow.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        assert!((contraction - k * k).abs() / (k * k) < 1e-13);

        let jet0 = flat_jet(0.5, 0.0);
        let y0 = [0.7, -0.3];
        let ylow0 = covariant_y(&jet0, &y0).unwrap();
        assert!((ylow0[0] - y0[0]).abs() < 1e-15);
        assert!((ylow0[1] - y0[1]).abs() < 1e-15);
    }

    #[test]
    fn covariant_y_matches_half_gradient_of_k_squared() {
        // central finite differences of K^2 as an independent oracle
        let jet = random_jet(3, 23, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y = [0.6, 0.1, -0.9];
        let ylow = covariant_y(&jet, &y).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[i] += h;
            ym[i] -= h;
            let kp = metric_k(&jet, &yp).unwrap().0;
            let km = metric_k(&jet, &ym).unwrap().0;
            let fd = (kp * kp - km * km) / (4.0 * h);
            assert!(
                (ylow[i] - fd).abs() < 1e-8 * (1.0 + ylow[i].abs()),
                "component {}: closed {} vs fd {}",
                i,
                ylow[i],
                fd
            );
        }
    }

    #[test]
    fn metric_tensor_identities() {
        for (dim, seed) in [(2usize, 1u64), (3, 2), (4, 3), (5, 4)] {
            let jet = random_jet(dim, seed, (0.2, 0.9), (-1.8, 1.8)).unwrap();
            let mut rng = stream_rng(seed, 7);
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0) + 0.1).collect();
            let ev = metric_tensor(&jet, &y).unwrap();
            let (k, _, sc) = metric_k(&jet, &y).unwrap();
            let yv = Array1::from_vec(y.clone());
            // g_ij y^i y^j = K^2
            let quad = ev.gmat.dot(&yv).dot(&yv);
            assert!((quad - k * k).abs() / (k * k) < 1e-12);
            // g_ij y^j = y_i
            let lowered = ev.gmat.dot(&yv);
            for i in 0..dim {
                assert!((lowered[i] - ev.y_low[i]).abs() < 1e-11 * (1.0 + ev.y_low[i].abs()));
            }
            // reciprocity
            let id = ev.gmat.dot(&ev.ginv);
            for i in 0..dim {
                for j in 0..dim {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((id[(i, j)] - want).abs() < 1e-11);
                }
            }
            // angular tensor annihilates y
            let hy = ev.hmat.dot(&yv);
            assert!(hy.iter().all(|t| t.abs() < 1e-12 * (1.0 + k)));
            // determinant identity: det g = (nu/q) (K^2/B)^N det a
            let ts = crate::jets::TangentState::new(&jet, &y).unwrap();
            let det_a = linalg::determinant(jet.a());
            let predicted = sc.nu / ts.q * (k * k / sc.b_form).powi(dim as i32) * det_a;
            assert!(
                (ev.det_g / predicted - 1.0).abs() < 1e-10,
                "det ratio {}",
                ev.det_g / predicted
            );
            assert!(ev.det_g > 0.0);
            // positive-definiteness
            assert!(linalg::is_spd(&ev.gmat));
        }
    }

    #[test]
    fn riemannian_limit_of_metric_tensor_is_exact() {
        let jet = random_jet(4, 9, (0.2, 0.9), (0.0, 0.0)).unwrap();
        let y = [0.2, -0.5, 0.8, 0.1];
        let ev = metric_tensor(&jet, &y).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (ev.gmat[(i, j)] - jet.a()[(i, j)]).abs() < 1e-12,
                    "entry ({},{})",
                    i,
                    j
                );
            }
        }
    }

    #[test]
    fn charge_derivative_scalar_routes_agree() {
        let jet = random_jet(3, 31, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y = [0.4, 0.9, -0.2];
        let ad = g_derivative_scalar(&jet, &y).unwrap();
        let closed = g_derivative_scalar_closed(&jet, &y).unwrap();
        assert!((ad - closed).abs() < 1e-12, "ad {} closed {}", ad, closed);
        // 0-homogeneity
        let y2 = [0.4 * 3.0, 0.9 * 3.0, -0.2 * 3.0];
        let ad2 = g_derivative_scalar(&jet, &y2).unwrap();
        assert!((ad - ad2).abs() < 1e-12);
    }

    #[test]
    fn charge_derivative_scalar_matches_finite_differences() {
        // rebuild the jet with a nudged charge and difference the metric
        // function; this oracle is independent of the dual arithmetic
        let dim = 3;
        let base = random_jet(dim, 37, (0.2, 0.9), (0.4, 0.8)).unwrap();
        let y = [0.9, -0.1, 0.5];
        let eps = 1e-6;
        let rebuilt = |g: f64| {
            build_point_jet(
                dim,
                base.a().clone(),
                base.da().clone(),
                base.b().clone(),
                base.db().clone(),
                g,
                base.dg().clone(),
            )
            .unwrap()
        };
        let kp = metric_k(&rebuilt(base.g() + eps), &y).unwrap().0;
        let km = metric_k(&rebuilt(base.g() - eps), &y).unwrap().0;
        let k0 = metric_k(&base, &y).unwrap().0;
        let fd = 2.0 * (kp - km) / (2.0 * eps) / k0;
        let ad = g_derivative_scalar(&base, &y).unwrap();
        assert!((ad - fd).abs() < 1e-7, "ad {} fd {}", ad, fd);
    }

    #[test]
    fn charge_derivative_at_orthogonal_tangent_is_minus_half_pi() {
        // g = 0 and y orthogonal to the axis: Mbar = -pi/2
        let jet = flat_jet(0.5, 0.0);
        let y = [0.0, 1.3];
        let ad = g_derivative_scalar(&jet, &y).unwrap();
        assert!((ad + std::f64::consts::FRAC_PI_2).abs() < 1e-14, "{}", ad);
    }
}
