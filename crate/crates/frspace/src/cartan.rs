//! Cartan tensor and its contractions.
//!
//! The tensor itself is produced by exact differentiation of the metric
//! tensor; the closed forms for the tensor, its trace vector, and the squared
//! norm serve as the cross-checked algebraic route.

use crate::error::{Error, Result};
use crate::geom::{self, Geom};
use crate::jets::PointJet;
use crate::metric;
use ndarray::{Array1, Array3};

/// Below this squared-norm threshold the state is treated as Riemannian
/// degenerate (the closed form divides by the norm).
pub const RIEMANNIAN_AA_THRESHOLD: f64 = 1e-20;

/// Cartan objects at one (jet, y).
#[derive(Clone, Debug)]
pub struct CartanEval {
    /// Fully symmetric `A_ijk`.
    pub a3: Array3<f64>,
    /// Trace `A_i = g^{jk} A_ijk`.
    pub a1: Array1<f64>,
    /// Raised trace `A^i = g^{ij} A_j`.
    pub a1_up: Array1<f64>,
    /// Shape scalar with `1/X = N + (1-c^2) B/(q nu)`.
    pub x: f64,
    /// Squared norm `A^i A_i`.
    pub aa: f64,
    /// Covector `e_k = (b/q^2) v_k - b_k`.
    pub e: Array1<f64>,
    /// Main scalar, defined for N = 2 and nonzero charge.
    pub main_scalar: Option<f64>,
}

fn state(jet: &PointJet, y: &[f64]) -> Result<(Geom<f64>, geom::Tangent<f64>, geom::Scalars<f64>)> {
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
    Ok((g, tg, sc))
}

/// Cartan tensor by exact differentiation of the metric tensor.
pub fn cartan_tensor(jet: &PointJet, y: &[f64]) -> Result<Array3<f64>> {
    let (g, tg, _) = state(jet, y)?;
    Ok(geom::cartan_tensor(&g, &tg.y))
}

/// Trace vector and shape scalar from the closed forms
/// `A_i = (Kg/(2qB)) (1/X) (q^2 b_i - b v_i)` and `1/X = N + (1-c^2) B/(q nu)`.
pub fn cartan_vector(jet: &PointJet, y: &[f64]) -> Result<(Array1<f64>, f64)> {
    let (g, tg, sc) = state(jet, y)?;
    let n = jet.dim() as f64;
    let inv_x = n + (1.0 - g.c2) * sc.b_form / (tg.q * sc.nu);
    let x = 1.0 / inv_x;
    let coef = sc.k * g.g / (2.0 * tg.q * sc.b_form) * inv_x;
    let a1 = Array1::from_shape_fn(jet.dim(), |i| coef * (tg.q2 * g.b[i] - tg.b * tg.v[i]));
    Ok((a1, x))
}

/// Squared norm from the closed form `(g^2/4) (1/X^2) (N + 1 - 1/X)`.
pub fn cartan_norm(jet: &PointJet, y: &[f64]) -> Result<f64> {
    let (g, tg, sc) = state(jet, y)?;
    let n = jet.dim() as f64;
    let inv_x = n + (1.0 - g.c2) * sc.b_form / (tg.q * sc.nu);
    Ok(g.g * g.g / 4.0 * inv_x * inv_x * (n + 1.0 - inv_x))
}

/// Closed form of the Cartan tensor,
/// `A_ijk = X [A_i h_jk + A_j h_ik + A_k h_ij - (N+1-1/X) A_i A_j A_k / (A^h A_h)]`;
/// returns the zero tensor directly in the Riemannian-degenerate case.
pub fn cartan_closed_form(jet: &PointJet, y: &[f64]) -> Result<Array3<f64>> {
    let n = jet.dim();
    let aa = cartan_norm(jet, y)?;
    if aa < RIEMANNIAN_AA_THRESHOLD {
        return Ok(Array3::zeros((n, n, n)));
    }
    let (a1, x) = cartan_vector(jet, y)?;
    let ev = metric::metric_tensor(jet, y)?;
    let inv_x = 1.0 / x;
    let nf = n as f64;
    let mut a3 = Array3::zeros((n, n, n));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let sym = a1[i] * ev.hmat[(j, k)] + a1[j] * ev.hmat[(i, k)] + a1[k] * ev.hmat[(i, j)];
                a3[(i, j, k)] = x * (sym - (nf + 1.0 - inv_x) / aa * a1[i] * a1[j] * a1[k]);
            }
        }
    }
    Ok(a3)
}

/// Covector `e_k = (b/q^2) v_k - b_k`.
pub fn e_covector(jet: &PointJet, y: &[f64]) -> Result<Array1<f64>> {
    let (g, tg, _) = state(jet, y)?;
    Ok(Array1::from_shape_fn(jet.dim(), |k| {
        tg.b / tg.q2 * tg.v[k] - g.b[k]
    }))
}

/// Two-dimensional main scalar `I = sqrt(A^h A_h)`.
pub fn main_scalar(jet: &PointJet, y: &[f64]) -> Result<f64> {
    if jet.dim() != 2 {
        return Err(Error::DimensionNotTwo(jet.dim()));
    }
    Ok(cartan_norm(jet, y)?.sqrt())
}

impl CartanEval {
    pub fn evaluate(jet: &PointJet, y: &[f64]) -> Result<CartanEval> {
        let a3 = cartan_tensor(jet, y)?;
        let (a1, x) = cartan_vector(jet, y)?;
        let aa = cartan_norm(jet, y)?;
        let e = e_covector(jet, y)?;
        let ev = metric::metric_tensor(jet, y)?;
        let a1_up = ev.ginv.dot(&a1);
        let main_scalar = if jet.dim() == 2 && aa >= RIEMANNIAN_AA_THRESHOLD {
            Some(aa.sqrt())
        } else {
            None
        };
        Ok(CartanEval {
            a3,
            a1,
            a1_up,
            x,
            aa,
            e,
            main_scalar,
        })
    }
}

/// Max-abs of a rank-3 tensor, for scaled residuals.
pub fn tensor3_max_abs(t: &Array3<f64>) -> f64 {
    t.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{random_jet, TangentState};
    use crate::rng::stream_rng;
    use rand::Rng;

    fn sample_y(dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 3);
        loop {
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            if y.iter().map(|t| t * t).sum::<f64>() > 0.05 {
                return y;
            }
        }
    }

    #[test]
    fn riemannian_case_vanishes() {
        let jet = random_jet(3, 2, (0.2, 0.9), (0.0, 0.0)).unwrap();
        let y = sample_y(3, 2);
        let a3 = cartan_tensor(&jet, &y).unwrap();
        let scale = {
            let (k, _, _) = crate::metric::metric_k(&jet, &y).unwrap();
            k
        };
        assert!(tensor3_max_abs(&a3) < 1e-12 * scale.max(1.0));
        let (a1, _) = cartan_vector(&jet, &y).unwrap();
        assert!(a1.iter().all(|t| t.abs() < 1e-14));
        assert!(cartan_norm(&jet, &y).unwrap().abs() < 1e-20);
        let closed = cartan_closed_form(&jet, &y).unwrap();
        assert_eq!(tensor3_max_abs(&closed), 0.0);
    }

    #[test]
    fn differentiated_tensor_is_symmetric_and_orthogonal() {
        let jet = random_jet(4, 11, (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y = sample_y(4, 11);
        let a3 = cartan_tensor(&jet, &y).unwrap();
        let scale = tensor3_max_abs(&a3);
        let n = 4;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    assert!((a3[(i, j, k)] - a3[(j, i, k)]).abs() < 1e-11 * scale);
                    assert!((a3[(i, j, k)] - a3[(i, k, j)]).abs() < 1e-11 * scale);
                }
            }
        }
        // Euler identity for the 0-homogeneous metric tensor
        for i in 0..n {
            for j in 0..n {
                let contracted: f64 = (0..n).map(|k| a3[(i, j, k)] * y[k]).sum();
                assert!(contracted.abs() < 1e-11 * scale, "A y != 0: {}", contracted);
            }
        }
    }

    #[test]
    fn closed_form_matches_differentiated_tensor() {
        for (dim, seed) in [(2usize, 1u64), (3, 2), (4, 3), (5, 4)] {
            let jet = random_jet(dim, seed, (0.2, 0.9), (0.3, 1.8)).unwrap();
            let y = sample_y(dim, seed);
            let ad = cartan_tensor(&jet, &y).unwrap();
            let closed = cartan_closed_form(&jet, &y).unwrap();
            let scale = tensor3_max_abs(&ad);
            let mut worst = 0.0_f64;
            for ((i, j, k), v) in ad.indexed_iter() {
                worst = worst.max((v - closed[(i, j, k)]).abs());
            }
            assert!(worst / scale < 1e-9, "dim {}: rel residual {}", dim, worst / scale);
        }
    }

    #[test]
    fn trace_vector_matches_metric_contraction() {
        let jet = random_jet(3, 7, (0.2, 0.9), (-1.8, -0.3)).unwrap();
        let y = sample_y(3, 7);
        let a3 = cartan_tensor(&jet, &y).unwrap();
        let ev = crate::metric::metric_tensor(&jet, &y).unwrap();
        let (a1, x) = cartan_vector(&jet, &y).unwrap();
        assert!(x > 0.0 && x < 1.0 / 3.0);
        let n = 3;
        for i in 0..n {
            let mut tr = 0.0;
            for j in 0..n {
                for k in 0..n {
                    tr += ev.ginv[(j, k)] * a3[(i, j, k)];
                }
            }
            assert!(
                (tr - a1[i]).abs() < 1e-9 * (1.0 + a1[i].abs()),
                "component {}: contraction {} vs closed {}",
                i,
                tr,
                a1[i]
            );
        }
    }

    #[test]
    fn norm_matches_metric_contraction_and_is_homogeneous() {
        let jet = random_jet(4, 19, (0.2, 0.9), (0.3, 1.8)).unwrap();
        let y = sample_y(4, 19);
        let (a1, _) = cartan_vector(&jet, &y).unwrap();
        let ev = crate::metric::metric_tensor(&jet, &y).unwrap();
        let aa_contract = ev.ginv.dot(&a1).dot(&a1);
        let aa = cartan_norm(&jet, &y).unwrap();
        assert!((aa / aa_contract - 1.0).abs() < 1e-9);
        assert!(aa >= 0.0);
        let y2: Vec<f64> = y.iter().map(|t| 0.25 * t).collect();
        let aa2 = cartan_norm(&jet, &y2).unwrap();
        assert!((aa - aa2).abs() < 1e-11 * aa.max(1.0));
    }

    #[test]
    fn trace_vector_e_covector_relation() {
        // A_i = -(K g q / (2B)) (1/X) e_i
        let jet = random_jet(3, 23, (0.2, 0.9), (0.3, 1.8)).unwrap();
        let y = sample_y(3, 23);
        let (a1, x) = cartan_vector(&jet, &y).unwrap();
        let e = e_covector(&jet, &y).unwrap();
        let (k, _, sc) = crate::metric::metric_k(&jet, &y).unwrap();
        let ts = TangentState::new(&jet, &y).unwrap();
        let coef = -k * jet.g() * ts.q / (2.0 * sc.b_form) / x;
        for i in 0..3 {
            assert!(
                (a1[i] - coef * e[i]).abs() < 1e-10 * (1.0 + a1[i].abs()),
                "component {}",
                i
            );
        }
        // e_k y^k = 0
        let ey: f64 = e.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        assert!(ey.abs() < 1e-12);
    }

    #[test]
    fn main_scalar_factorization_in_dimension_two() {
        let jet = random_jet(2, 29, (0.2, 0.9), (0.3, 1.8)).unwrap();
        let y = sample_y(2, 29);
        let i_scalar = main_scalar(&jet, &y).unwrap();
        let aa = cartan_norm(&jet, &y).unwrap();
        assert!((i_scalar - aa.sqrt()).abs() < 1e-14);
        let (a1, _) = cartan_vector(&jet, &y).unwrap();
        let alpha = a1.mapv(|t| t / aa.sqrt());
        let a3 = cartan_tensor(&jet, &y).unwrap();
        let scale = tensor3_max_abs(&a3);
        for ((i, j, k), v) in a3.indexed_iter() {
            let pred = i_scalar * alpha[i] * alpha[j] * alpha[k];
            assert!(
                (v - pred).abs() < 1e-9 * scale,
                "({},{},{}): {} vs {}",
                i,
                j,
                k,
                v,
                pred
            );
        }
    }

    #[test]
    fn main_scalar_requires_dimension_two() {
        let jet = random_jet(3, 31, (0.2, 0.9), (0.3, 1.8)).unwrap();
        let y = sample_y(3, 31);
        assert!(matches!(
            main_scalar(&jet, &y),
            Err(crate::Error::DimensionNotTwo(3))
        ));
    }
}
