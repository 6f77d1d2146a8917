//! Pointwise input data of the space: the 1-jet of the background fields.
//!
//! Every formula implemented in this crate depends on position only through
//! the values and first derivatives of the Riemannian metric `a_ij`, the axis
//! 1-form `b_i`, and the charge `g` at the evaluation point, so a validated
//! [`PointJet`] is the universal input. Builders produce random jets and the
//! special families (parallel axis, proportional covariant derivative) used
//! by the classification harnesses.

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::stream_rng;
use crate::riemannian;
use ndarray::{Array1, Array2, Array3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Values and first x-derivatives of the background fields at one point.
///
/// Immutable after construction; all invariants are enforced by
/// [`build_point_jet`]. Index order of `da` is `[k][i][j]` for the k-th
/// partial of `a_ij`, of `db` is `[k][i]` for the k-th partial of `b_i`.
#[derive(Clone, Debug)]
pub struct PointJet {
    dim: usize,
    a: Array2<f64>,
    da: Array3<f64>,
    b: Array1<f64>,
    db: Array2<f64>,
    g: f64,
    dg: Array1<f64>,
    ainv: Array2<f64>,
    c: f64,
    dc: Array1<f64>,
}

impl PointJet {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }
    pub fn da(&self) -> &Array3<f64> {
        &self.da
    }
    pub fn b(&self) -> &Array1<f64> {
        &self.b
    }
    pub fn db(&self) -> &Array2<f64> {
        &self.db
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn dg(&self) -> &Array1<f64> {
        &self.dg
    }
    /// Inverse of `a`, computed once at validation.
    pub fn ainv(&self) -> &Array2<f64> {
        &self.ainv
    }
    /// Riemannian norm of the axis 1-form.
    pub fn c(&self) -> f64 {
        self.c
    }
    /// Gradient of `c`, derived from the jet.
    pub fn dc(&self) -> &Array1<f64> {
        &self.dc
    }
    /// Raised axis vector `b^i = a^{ij} b_j`.
    pub fn b_up(&self) -> Array1<f64> {
        self.ainv.dot(&self.b)
    }
    /// True when the charge gradient vanishes.
    pub fn charge_constant(&self) -> bool {
        self.dg.iter().all(|&x| x == 0.0)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&JetFile::from(self))?)
    }

    pub fn from_json_str(text: &str) -> Result<PointJet> {
        let raw: JetFile = serde_json::from_str(text)?;
        raw.build()
    }

    pub fn load(path: &std::path::Path) -> Result<PointJet> {
        PointJet::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

/// Serialized jet file: plain nested arrays, row-major.
#[derive(Serialize, Deserialize)]
struct JetFile {
    dim: usize,
    a: Vec<Vec<f64>>,
    da: Vec<Vec<Vec<f64>>>,
    b: Vec<f64>,
    db: Vec<Vec<f64>>,
    g: f64,
    dg: Vec<f64>,
}

impl From<&PointJet> for JetFile {
    fn from(j: &PointJet) -> Self {
        let n = j.dim;
        JetFile {
            dim: n,
            a: (0..n).map(|i| (0..n).map(|k| j.a[(i, k)]).collect()).collect(),
            da: (0..n)
                .map(|k| {
                    (0..n)
                        .map(|i| (0..n).map(|jj| j.da[(k, i, jj)]).collect())
                        .collect()
                })
                .collect(),
            b: j.b.to_vec(),
            db: (0..n).map(|k| (0..n).map(|i| j.db[(k, i)]).collect()).collect(),
            g: j.g,
            dg: j.dg.to_vec(),
        }
    }
}

impl JetFile {
    fn build(&self) -> Result<PointJet> {
        let n = self.dim;
        let shape = |what: &'static str, ok: bool, got: String| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::ShapeMismatch {
                    what,
                    expected: format!("dim {}", n),
                    got,
                })
            }
        };
        shape("a", self.a.len() == n && self.a.iter().all(|r| r.len() == n), format!("{} rows", self.a.len()))?;
        shape(
            "da",
            self.da.len() == n && self.da.iter().all(|m| m.len() == n && m.iter().all(|r| r.len() == n)),
            format!("{} slabs", self.da.len()),
        )?;
        shape("b", self.b.len() == n, format!("len {}", self.b.len()))?;
        shape("db", self.db.len() == n && self.db.iter().all(|r| r.len() == n), format!("{} rows", self.db.len()))?;
        shape("dg", self.dg.len() == n, format!("len {}", self.dg.len()))?;
        let a = Array2::from_shape_fn((n, n), |(i, j)| self.a[i][j]);
        let da = Array3::from_shape_fn((n, n, n), |(k, i, j)| self.da[k][i][j]);
        let b = Array1::from_vec(self.b.clone());
        let db = Array2::from_shape_fn((n, n), |(k, i)| self.db[k][i]);
        let dg = Array1::from_vec(self.dg.clone());
        build_point_jet(n, a, da, b, db, self.g, dg)
    }
}

/// Validate the raw arrays and assemble a [`PointJet`] with the derived
/// quantities `c` and `dc` attached.
pub fn build_point_jet(
    dim: usize,
    a: Array2<f64>,
    da: Array3<f64>,
    b: Array1<f64>,
    db: Array2<f64>,
    g: f64,
    dg: Array1<f64>,
) -> Result<PointJet> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let check_shape = |what: &'static str, ok: bool, got: String| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                what,
                expected: format!("dim {}", dim),
                got,
            })
        }
    };
    check_shape("a", a.dim() == (dim, dim), format!("{:?}", a.dim()))?;
    check_shape("da", da.dim() == (dim, dim, dim), format!("{:?}", da.dim()))?;
    check_shape("b", b.len() == dim, format!("{}", b.len()))?;
    check_shape("db", db.dim() == (dim, dim), format!("{:?}", db.dim()))?;
    check_shape("dg", dg.len() == dim, format!("{}", dg.len()))?;

    let scale_a = linalg::max_abs(&a).max(1.0);
    let mut asym = 0.0_f64;
    for i in 0..dim {
        for j in 0..dim {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if asym > 1e-12 * scale_a {
        return Err(Error::NotSymmetric {
            what: "a",
            max_asym: asym,
        });
    }
    let mut da_asym = 0.0_f64;
    for k in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                da_asym = da_asym.max((da[(k, i, j)] - da[(k, j, i)]).abs());
            }
        }
    }
    if da_asym > 1e-12 * scale_a.max(1.0) {
        return Err(Error::NotSymmetric {
            what: "da",
            max_asym: da_asym,
        });
    }

    let (lo, hi) = linalg::spd_bounds(&a);
    if !(hi > 0.0 && lo > 1e-10 * hi) {
        return Err(Error::NotPositiveDefinite {
            lambda_min: lo,
            lambda_max: hi,
        });
    }

    if !(-2.0 < g && g < 2.0) {
        return Err(Error::ChargeOutOfRange { g });
    }

    let ainv = linalg::invert(&a, "point jet metric")?;
    let bup = ainv.dot(&b);
    let c2 = bup.dot(&b);
    let c = c2.sqrt();
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::NormOutOfRange { c });
    }

    // dc_k = (2 b^j d_k b_j - d_k a_mn b^m b^n) / (2c)
    let mut dc = Array1::zeros(dim);
    for k in 0..dim {
        let mut t = 0.0;
        for j in 0..dim {
            t += 2.0 * bup[j] * db[(k, j)];
        }
        for m in 0..dim {
            for nn in 0..dim {
                t -= da[(k, m, nn)] * bup[m] * bup[nn];
            }
        }
        dc[k] = t / (2.0 * c);
    }

    Ok(PointJet {
        dim,
        a,
        da,
        b,
        db,
        g,
        dg,
        ainv,
        c,
        dc,
    })
}

/// Tangent vector with its derived scalars and covectors at a jet.
#[derive(Clone, Debug)]
pub struct TangentState {
    pub y: Array1<f64>,
    /// Scalar `b = b_i y^i`.
    pub b: f64,
    /// Riemannian norm `S = sqrt(a_ij y^i y^j)`.
    pub s: f64,
    /// Transverse norm `q = sqrt(S^2 - b^2)`.
    pub q: f64,
    /// Lowered vector `u_i = a_ij y^j`.
    pub u: Array1<f64>,
    /// Covector `v_k = u_k - b b_k`.
    pub v: Array1<f64>,
    /// Vector `v^i = y^i - b b^i`.
    pub vvec: Array1<f64>,
    /// Transverse metric `r_ij = a_ij - b_i b_j`.
    pub r: Array2<f64>,
}

impl TangentState {
    pub fn new(jet: &PointJet, y: &[f64]) -> Result<TangentState> {
        let n = jet.dim();
        if y.len() != n {
            return Err(Error::ShapeMismatch {
                what: "y",
                expected: format!("dim {}", n),
                got: format!("{}", y.len()),
            });
        }
        if y.iter().all(|&t| t == 0.0) {
            return Err(Error::ZeroVector);
        }
        let y = Array1::from_vec(y.to_vec());
        let u = jet.a().dot(&y);
        let b = jet.b().dot(&y);
        let s2 = u.dot(&y);
        let s = s2.sqrt();
        let q2 = s2 - b * b;
        debug_assert!(q2 > 0.0, "q^2 must be positive on the slit bundle");
        let q = q2.sqrt();
        let bup = jet.b_up();
        let v = Array1::from_shape_fn(n, |i| u[i] - b * jet.b()[i]);
        let vvec = Array1::from_shape_fn(n, |i| y[i] - b * bup[i]);
        let r = Array2::from_shape_fn((n, n), |(i, j)| jet.a()[(i, j)] - jet.b()[i] * jet.b()[j]);
        Ok(TangentState {
            y,
            b,
            s,
            q,
            u,
            v,
            vvec,
            r,
        })
    }
}

fn check_range(what: &'static str, range: (f64, f64), domain: (f64, f64)) -> Result<()> {
    let (lo, hi) = range;
    if !(lo <= hi && lo > domain.0 && hi < domain.1) {
        return Err(Error::BadRange { what, lo, hi });
    }
    Ok(())
}

fn sample_range<R: Rng>(rng: &mut R, range: (f64, f64)) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.random_range(range.0..range.1)
    }
}

/// Random orthogonal matrix via modified Gram-Schmidt on a Gaussian matrix.
fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Array2<f64> {
    loop {
        let mut q = Array2::from_shape_fn((n, n), |_| rng.sample::<f64, _>(StandardNormal));
        let mut ok = true;
        for col in 0..n {
            for prev in 0..col {
                let dot: f64 = (0..n).map(|i| q[(i, col)] * q[(i, prev)]).sum();
                for i in 0..n {
                    q[(i, col)] -= dot * q[(i, prev)];
                }
            }
            let nrm: f64 = (0..n).map(|i| q[(i, col)] * q[(i, col)]).sum::<f64>().sqrt();
            if nrm < 1e-6 {
                ok = false;
                break;
            }
            for i in 0..n {
                q[(i, col)] /= nrm;
            }
        }
        if ok {
            return q;
        }
    }
}

/// Random SPD matrix with eigenvalues log-uniform in [0.5, 2].
fn random_spd<R: Rng>(rng: &mut R, n: usize) -> Array2<f64> {
    let q = random_orthogonal(rng, n);
    let eigs: Vec<f64> = (0..n)
        .map(|_| (rng.random_range(0.5_f64.ln()..2.0_f64.ln())).exp())
        .collect();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..n {
                s += eigs[k] * q[(k, i)] * q[(k, j)];
            }
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    a
}

/// Covector with target Riemannian norm `c` in the metric `a`.
fn axis_with_norm<R: Rng>(rng: &mut R, ainv: &Array2<f64>, c: f64) -> Array1<f64> {
    let n = ainv.nrows();
    loop {
        let d = Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
        let nrm = ainv.dot(&d).dot(&d).sqrt();
        if nrm > 1e-6 {
            return d * (c / nrm);
        }
    }
}

fn random_symmetric_slab<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Array3<f64> {
    let mut da = Array3::zeros((n, n, n));
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-scale..scale);
                da[(k, i, j)] = v;
                da[(k, j, i)] = v;
            }
        }
    }
    da
}

/// `db` such that the covariant derivative of `b` equals `nabla`, by
/// back-solving `d_i b_j = nabla_ij + b_m Gamma^m_ij`.
fn db_from_nabla(
    n: usize,
    a: &Array2<f64>,
    da: &Array3<f64>,
    b: &Array1<f64>,
    nabla: &Array2<f64>,
) -> Result<Array2<f64>> {
    let ainv = linalg::invert(a, "db back-solve")?;
    let gamma = riemannian::christoffel_raw(n, &ainv, da);
    let mut db = nabla.clone();
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                db[(i, j)] += b[m] * gamma[(m, i, j)];
            }
        }
    }
    Ok(db)
}

/// Deterministic random jet with `c` and `g` in the given ranges.
pub fn random_jet(dim: usize, seed: u64, c_range: (f64, f64), g_range: (f64, f64)) -> Result<PointJet> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    check_range("c_range", c_range, (0.0, 1.0))?;
    check_range("g_range", g_range, (-2.0, 2.0))?;
    let mut rng = stream_rng(seed, 0);
    let a = random_spd(&mut rng, dim);
    let ainv = linalg::invert(&a, "random jet")?;
    let c = sample_range(&mut rng, c_range);
    let b = axis_with_norm(&mut rng, &ainv, c);
    let g = sample_range(&mut rng, g_range);
    let da = random_symmetric_slab(&mut rng, dim, 0.3);
    // covariant derivative chosen freely with bounded entries, then back-solved
    let nabla = Array2::from_shape_fn((dim, dim), |_| rng.random_range(-0.5..0.5));
    let db = db_from_nabla(dim, &a, &da, &b, &nabla)?;
    let dg = Array1::from_shape_fn(dim, |_| rng.random_range(-0.3..0.3));
    build_point_jet(dim, a, da, b, db, g, dg)
}

/// Jet with constant charge and covariant axis derivative exactly `k r_ij`,
/// with explicit `c` and `g`.
pub fn landsberg_candidate_jet_with(
    dim: usize,
    seed: u64,
    k: f64,
    c: f64,
    g: f64,
) -> Result<PointJet> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::BadRange {
            what: "c",
            lo: c,
            hi: c,
        });
    }
    if !(-2.0 < g && g < 2.0) {
        return Err(Error::BadRange {
            what: "g",
            lo: g,
            hi: g,
        });
    }
    let mut rng = stream_rng(seed, 0);
    let a = random_spd(&mut rng, dim);
    let ainv = linalg::invert(&a, "candidate jet")?;
    let b = axis_with_norm(&mut rng, &ainv, c);
    let da = random_symmetric_slab(&mut rng, dim, 0.3);
    let r = Array2::from_shape_fn((dim, dim), |(i, j)| a[(i, j)] - b[i] * b[j]);
    let nabla = r.mapv(|x| k * x);
    let db = db_from_nabla(dim, &a, &da, &b, &nabla)?;
    let dg = Array1::zeros(dim);
    build_point_jet(dim, a, da, b, db, g, dg)
}

/// Jet with constant charge and covariant axis derivative `k r_ij`; `c` and a
/// nonzero `g` are sampled from default ranges.
pub fn landsberg_candidate_jet(dim: usize, seed: u64, k: f64) -> Result<PointJet> {
    let mut rng = stream_rng(seed, 1);
    let c = rng.random_range(0.2..0.8);
    let mag = rng.random_range(0.3..1.5);
    let g = if rng.random::<bool>() { mag } else { -mag };
    landsberg_candidate_jet_with(dim, seed, k, c, g)
}

/// Jet with constant nonzero charge and parallel axis 1-form.
pub fn berwald_jet(dim: usize, seed: u64) -> Result<PointJet> {
    landsberg_candidate_jet(dim, seed, 0.0)
}
