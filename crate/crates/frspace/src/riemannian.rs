//! Background Riemannian computations at a jet: Christoffel symbols, the
//! covariant derivative of the axis 1-form, its skew part, and the contraction
//! scalars entering the spray coefficients.

use crate::jets::PointJet;
use ndarray::{Array1, Array2, Array3};

/// Christoffel symbols, covariant derivative of `b`, and the skew form.
#[derive(Clone, Debug)]
pub struct RiemannBackground {
    /// `gamma[(k,i,j)] = a^k_{ij}`, symmetric in (i, j).
    pub gamma: Array3<f64>,
    /// `nabla_b[(i,j)]` = covariant derivative of `b_j` along `x^i`.
    pub nabla_b: Array2<f64>,
    /// `f_skew[(m,n)] = nabla_m b_n - nabla_n b_m`, antisymmetric.
    pub f_skew: Array2<f64>,
    pub ainv: Array2<f64>,
}

/// `a^k_{ij} = (1/2) a^{kn} (d_j a_ni + d_i a_nj - d_n a_ji)` from raw arrays.
pub(crate) fn christoffel_raw(n: usize, ainv: &Array2<f64>, da: &Array3<f64>) -> Array3<f64> {
    let mut gamma = Array3::zeros((n, n, n));
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += ainv[(k, m)] * (da[(j, m, i)] + da[(i, m, j)] - da[(m, j, i)]);
                }
                let v = 0.5 * s;
                gamma[(k, i, j)] = v;
                gamma[(k, j, i)] = v;
            }
        }
    }
    gamma
}

pub fn christoffel(jet: &PointJet) -> Array3<f64> {
    christoffel_raw(jet.dim(), jet.ainv(), jet.da())
}

/// `nabla_i b_j = d_i b_j - b_k a^k_{ij}`.
pub fn covariant_derivative_b(jet: &PointJet) -> Array2<f64> {
    let n = jet.dim();
    let gamma = christoffel(jet);
    let mut nb = jet.db().clone();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                nb[(i, j)] -= jet.b()[k] * gamma[(k, i, j)];
            }
        }
    }
    nb
}

/// Skew form `f_mn` and its raised version `f^i_n = a^{ik} f_kn`.
pub fn skew_form(jet: &PointJet) -> (Array2<f64>, Array2<f64>) {
    let n = jet.dim();
    let nb = covariant_derivative_b(jet);
    let f = Array2::from_shape_fn((n, n), |(m, k)| nb[(m, k)] - nb[(k, m)]);
    let fup = jet.ainv().dot(&f);
    (f, fup)
}

pub fn background(jet: &PointJet) -> RiemannBackground {
    let gamma = christoffel(jet);
    let nabla_b = covariant_derivative_b(jet);
    let n = jet.dim();
    let f_skew = Array2::from_shape_fn((n, n), |(m, k)| nabla_b[(m, k)] - nabla_b[(k, m)]);
    RiemannBackground {
        gamma,
        nabla_b,
        f_skew,
        ainv: jet.ainv().clone(),
    }
}

/// Scalars built from the jet's first derivatives and a tangent vector.
#[derive(Clone, Debug)]
pub struct ContractionScalars {
    /// `s_k = y^h nabla_h b_k`.
    pub s: Array1<f64>,
    /// `(ys) = y^h y^k nabla_h b_k`.
    pub ys: f64,
    /// `sigma = b^k y^n f_kn`.
    pub sigma: f64,
    /// `(yg) = g_h y^h`.
    pub yg: f64,
    /// `(bg) = b^h g_h`.
    pub bg: f64,
}

pub fn contraction_scalars(jet: &PointJet, y: &[f64]) -> ContractionScalars {
    let n = jet.dim();
    let yv = Array1::from_vec(y.to_vec());
    let nb = covariant_derivative_b(jet);
    let s = Array1::from_shape_fn(n, |k| (0..n).map(|h| yv[h] * nb[(h, k)]).sum());
    let ys = s.dot(&yv);
    let (f, _) = skew_form(jet);
    let bup = jet.b_up();
    let mut sigma = 0.0;
    for k in 0..n {
        for m in 0..n {
            sigma += bup[k] * yv[m] * f[(k, m)];
        }
    }
    let yg = jet.dg().dot(&yv);
    let bg = jet.dg().dot(&bup);
    ContractionScalars { s, ys, sigma, yg, bg }
}
