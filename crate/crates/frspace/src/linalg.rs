//! Small dense linear algebra over generic scalars.
//!
//! The metric inverse has to be computed on nested dual numbers, so the
//! elimination routines are hand-rolled and generic over [`Scalar`]; pivots
//! are chosen by the innermost real value. Dimensions here are tiny (N <= 8).

use crate::dual::Scalar;
use crate::error::{Error, Result};
use ndarray::Array2;

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert<T: Scalar>(m: &Array2<T>, context: &'static str) -> Result<Array2<T>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    // augmented [m | I]
    let mut a = vec![vec![T::zero(); 2 * n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = m[(i, j)];
        }
        a[i][n + i] = T::one();
    }
    for col in 0..n {
        let mut p = col;
        let mut best = a[col][col].value().abs();
        for r in col + 1..n {
            let v = a[r][col].value().abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularMatrix { context });
        }
        a.swap(col, p);
        let piv = a[col][col];
        for j in 0..2 * n {
            a[col][j] = a[col][j] / piv;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for j in 0..2 * n {
                    a[r][j] = a[r][j] - f * a[col][j];
                }
            }
        }
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| a[i][n + j]))
}

/// Determinant by LU elimination with partial pivoting.
pub fn determinant<T: Scalar>(m: &Array2<T>) -> T {
    let n = m.nrows();
    let mut a = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = m[(i, j)];
        }
    }
    let mut det = T::one();
    for col in 0..n {
        let mut p = col;
        let mut best = a[col][col].value().abs();
        for r in col + 1..n {
            let v = a[r][col].value().abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return T::zero();
        }
        if p != col {
            a.swap(col, p);
            det = -det;
        }
        let piv = a[col][col];
        det = det * piv;
        for r in col + 1..n {
            let f = a[r][col] / piv;
            for j in col..n {
                a[r][j] = a[r][j] - f * a[col][j];
            }
        }
    }
    det
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method.
pub fn sym_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    // enforce exact symmetry of the working copy
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    for _sweep in 0..64 {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() < 1e-15 * (1.0 + frobenius(&a)) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

/// (lambda_min, lambda_max) of a symmetric matrix.
pub fn spd_bounds(m: &Array2<f64>) -> (f64, f64) {
    let eigs = sym_eigenvalues(m);
    (eigs[0], eigs[eigs.len() - 1])
}

/// Scale-free positive-definiteness test: lambda_min > 1e-10 * lambda_max.
pub fn is_spd(m: &Array2<f64>) -> bool {
    let (lo, hi) = spd_bounds(m);
    hi > 0.0 && lo > 1e-10 * hi
}

pub fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;
    use ndarray::array;

    #[test]
    fn inverse_of_known_matrix() {
        let m = array![[4.0, 1.0], [2.0, 3.0]];
        let inv = invert(&m, "test").unwrap();
        let id = m.dot(&inv);
        assert!((id[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((id[(0, 1)]).abs() < 1e-14);
        assert!((id[(1, 0)]).abs() < 1e-14);
        assert!((id[(1, 1)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_works_on_dual_entries() {
        // d/dt inv([[1+t, 0],[0, 2]]) at t=0 has (0,0) entry -1
        let m = array![
            [Dual::seeded(1.0_f64), Dual::constant(0.0)],
            [Dual::constant(0.0), Dual::constant(2.0)]
        ];
        let inv = invert(&m, "test").unwrap();
        assert!((inv[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((inv[(0, 0)].du + 1.0).abs() < 1e-15);
        assert!((inv[(1, 1)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn determinant_and_eigenvalues() {
        let m = array![[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let d = determinant(&m);
        let eigs = sym_eigenvalues(&m);
        let prod: f64 = eigs.iter().product();
        assert!((d - prod).abs() < 1e-12, "det {} vs eig prod {}", d, prod);
        assert!(is_spd(&m));
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = array![[1.0, 2.0], [2.0, 4.0]];
        assert!(invert(&m, "test").is_err());
        assert!(!is_spd(&m));
    }
}
