//! Analytic field definitions and the operations built on them: jet
//! extraction by forward-mode differentiation, fixed-step geodesic
//! integration, and box validation.

pub mod expr;

use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::jets::{build_point_jet, PointJet};
use crate::metric;
use crate::spray;
use expr::Expr;
use ndarray::{Array1, Array2, Array3};
use serde::{Deserialize, Serialize};

/// Analytic definition of the background fields over a coordinate box.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    pub dim: usize,
    /// Symmetric expression matrix for `a_ij`.
    pub a: Vec<Vec<Expr>>,
    pub b: Vec<Expr>,
    pub g: Expr,
    pub name: String,
    pub description: String,
}

#[derive(Serialize, Deserialize)]
struct FieldFile {
    dim: usize,
    a: Vec<Vec<String>>,
    b: Vec<String>,
    g: String,
    #[serde(default)]
    name: String,
    #[serde(default)]
    description: String,
}

/// Parse the JSON field format and all contained expressions.
pub fn parse_field(text: &str) -> Result<FieldSpec> {
    let raw: FieldFile = serde_json::from_str(text)?;
    let n = raw.dim;
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if raw.a.len() != n || raw.a.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "metric expression matrix must be {n} x {n}"
        )));
    }
    if raw.b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "axis expression vector must have length {n}"
        )));
    }
    let mut a = Vec::with_capacity(n);
    for (i, row) in raw.a.iter().enumerate() {
        let mut out = Vec::with_capacity(n);
        for (j, text) in row.iter().enumerate() {
            out.push(expr::parse_expr(text, &format!("a[{i}][{j}]"))?);
        }
        a.push(out);
    }
    // symmetry as written: mirrored entries must parse to the same tree
    for i in 0..n {
        for j in i + 1..n {
            if a[i][j] != a[j][i] {
                return Err(Error::AsymmetricMetric { i, j });
            }
        }
    }
    let mut b = Vec::with_capacity(n);
    for (i, text) in raw.b.iter().enumerate() {
        b.push(expr::parse_expr(text, &format!("b[{i}]"))?);
    }
    let g = expr::parse_expr(&raw.g, "g")?;
    let max_dim = a
        .iter()
        .flatten()
        .chain(b.iter())
        .chain(std::iter::once(&g))
        .map(Expr::max_dim)
        .max()
        .unwrap_or(0);
    if max_dim > n {
        return Err(Error::DimensionMismatch(format!(
            "expressions reference x{max_dim} but the field dimension is {n}"
        )));
    }
    Ok(FieldSpec {
        dim: n,
        a,
        b,
        g,
        name: raw.name,
        description: raw.description,
    })
}

pub fn load_field(path: &std::path::Path) -> Result<FieldSpec> {
    parse_field(&std::fs::read_to_string(path)?)
}

impl FieldSpec {
    /// Evaluate the fields and their exact first derivatives at `x` and
    /// assemble a validated jet. One dual pass per coordinate.
    pub fn jet_at(&self, x: &[f64]) -> Result<PointJet> {
        let n = self.dim;
        if x.len() != n {
            return Err(Error::ShapeMismatch {
                what: "x",
                expected: format!("dim {}", n),
                got: format!("{}", x.len()),
            });
        }
        let dom = |what: String, context: &str| Error::Domain {
            what,
            context: context.to_string(),
        };
        let mut a = Array2::zeros((n, n));
        let mut da = Array3::zeros((n, n, n));
        let mut b = Array1::zeros(n);
        let mut db = Array2::zeros((n, n));
        let mut g = 0.0;
        let mut dg = Array1::zeros(n);
        for k in 0..n {
            let xs: Vec<Dual<f64>> = (0..n)
                .map(|i| {
                    if i == k {
                        Dual::seeded(x[i])
                    } else {
                        Dual::constant(x[i])
                    }
                })
                .collect();
            for i in 0..n {
                for j in i..n {
                    let v = self.a[i][j]
                        .eval(&xs)
                        .map_err(|e| dom(e, &format!("a[{i}][{j}]")))?;
                    a[(i, j)] = v.re;
                    a[(j, i)] = v.re;
                    da[(k, i, j)] = v.du;
                    da[(k, j, i)] = v.du;
                }
                let v = self.b[i].eval(&xs).map_err(|e| dom(e, &format!("b[{i}]")))?;
                b[i] = v.re;
                db[(k, i)] = v.du;
            }
            let v = self.g.eval(&xs).map_err(|e| dom(e, "g"))?;
            g = v.re;
            dg[k] = v.du;
        }
        build_point_jet(n, a, da, b, db, g, dg)
    }
}

/// One recorded sample of a trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub k: f64,
}

/// Integrated geodesic with its conservation diagnostic.
#[derive(Clone, Debug)]
pub struct GeodesicTrajectory {
    pub points: Vec<TrajectoryPoint>,
    /// `max |K(x(t), y(t)) - K0| / K0` over the recorded samples.
    pub k_drift: f64,
}

impl GeodesicTrajectory {
    pub fn to_csv(&self) -> String {
        let n = if let Some(p) = self.points.first() {
            p.x.len()
        } else {
            return String::new();
        };
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x{}", i));
        }
        for i in 1..=n {
            out.push_str(&format!(",y{}", i));
        }
        out.push_str(",K\n");
        for p in &self.points {
            out.push_str(&format!("{:.17e}", p.t));
            for v in p.x.iter().chain(p.y.iter()) {
                out.push_str(&format!(",{:.17e}", v));
            }
            out.push_str(&format!(",{:.17e}\n", p.k));
        }
        out
    }
}

/// Drift threshold above which a run is rejected as under-resolved.
pub const K_DRIFT_LIMIT: f64 = 1e-4;

#[derive(Clone, Copy)]
enum SprayKind {
    Full,
    RiemannianOnly,
}

fn acceleration(field: &FieldSpec, x: &[f64], y: &[f64], kind: SprayKind) -> Result<Vec<f64>> {
    let jet = field.jet_at(x)?;
    let n = field.dim;
    match kind {
        SprayKind::Full => {
            let out = spray::spray(&jet, y)?;
            Ok((0..n).map(|i| -out.g[i]).collect())
        }
        SprayKind::RiemannianOnly => {
            let gamma = crate::riemannian::christoffel(&jet);
            Ok((0..n)
                .map(|i| {
                    let mut t = 0.0;
                    for m in 0..n {
                        for nn in 0..n {
                            t += gamma[(i, m, nn)] * y[m] * y[nn];
                        }
                    }
                    -t
                })
                .collect())
        }
    }
}

fn metric_value(field: &FieldSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let jet = field.jet_at(x)?;
    Ok(metric::metric_k(&jet, y)?.0)
}

fn integrate(
    field: &FieldSpec,
    x0: &[f64],
    y0: &[f64],
    dt: f64,
    steps: usize,
    kind: SprayKind,
) -> Result<GeodesicTrajectory> {
    if dt <= 0.0 {
        return Err(Error::Invalid("dt must be positive".into()));
    }
    let n = field.dim;
    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    let k0 = metric_value(field, &x, &y)?;
    let mut points = Vec::with_capacity(steps + 1);
    points.push(TrajectoryPoint {
        t: 0.0,
        x: x.clone(),
        y: y.clone(),
        k: k0,
    });
    let mut k_drift = 0.0_f64;
    let mid_state = |x: &[f64], y: &[f64], kx: &[f64], ky: &[f64], h: f64| {
        (
            (0..n).map(|i| x[i] + h * kx[i]).collect::<Vec<f64>>(),
            (0..n).map(|i| y[i] + h * ky[i]).collect::<Vec<f64>>(),
        )
    };
    for step in 0..steps {
        let t = step as f64 * dt;
        let guard = |e: Error, tt: f64, xs: &[f64], ys: &[f64]| match e {
            Error::Domain { what, context } => Error::DomainMidTrajectory {
                t: tt,
                step,
                message: format!("{what} in {context}"),
                x: xs.to_vec(),
                y: ys.to_vec(),
            },
            other => other,
        };
        // classical 4th-order one-step scheme on (x' = y, y' = -G(x, y))
        let a1 = acceleration(field, &x, &y, kind).map_err(|e| guard(e, t, &x, &y))?;
        let (x2, y2) = mid_state(&x, &y, &y, &a1, 0.5 * dt);
        let a2 = acceleration(field, &x2, &y2, kind).map_err(|e| guard(e, t, &x, &y))?;
        let (x3, y3) = mid_state(&x, &y, &y2, &a2, 0.5 * dt);
        let a3 = acceleration(field, &x3, &y3, kind).map_err(|e| guard(e, t, &x, &y))?;
        let (x4, y4) = mid_state(&x, &y, &y3, &a3, dt);
        let a4 = acceleration(field, &x4, &y4, kind).map_err(|e| guard(e, t, &x, &y))?;
        for i in 0..n {
            x[i] += dt / 6.0 * (y[i] + 2.0 * y2[i] + 2.0 * y3[i] + y4[i]);
            y[i] += dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
        }
        let t_next = (step + 1) as f64 * dt;
        let k = metric_value(field, &x, &y).map_err(|e| guard(e, t_next, &x, &y))?;
        k_drift = k_drift.max(((k - k0) / k0).abs());
        if matches!(kind, SprayKind::Full) && k_drift > K_DRIFT_LIMIT {
            return Err(Error::StepRejected {
                t: t_next,
                drift: k_drift,
                limit: K_DRIFT_LIMIT,
            });
        }
        points.push(TrajectoryPoint {
            t: t_next,
            x: x.clone(),
            y: y.clone(),
            k,
        });
    }
    Ok(GeodesicTrajectory { points, k_drift })
}

/// Integrate the geodesic system `x' = y`, `y' = -G(x, y)` with the classical
/// fixed-step 4th-order scheme, recording the metric-function drift.
pub fn integrate_geodesic(
    field: &FieldSpec,
    x0: &[f64],
    y0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<GeodesicTrajectory> {
    integrate(field, x0, y0, dt, steps, SprayKind::Full)
}

/// Integrate with the background Riemannian spray only; comparison baseline
/// for fields whose full spray reduces to it.
pub fn integrate_riemannian(
    field: &FieldSpec,
    x0: &[f64],
    y0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<GeodesicTrajectory> {
    integrate(field, x0, y0, dt, steps, SprayKind::RiemannianOnly)
}

/// Low-discrepancy box sampler (Kronecker sequence on the box).
#[derive(Clone, Debug)]
pub struct BoxSampler {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub count: usize,
}

impl BoxSampler {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, count: usize) -> Result<BoxSampler> {
        if lo.len() != hi.len() || lo.iter().zip(hi.iter()).any(|(a, b)| a >= b) {
            return Err(Error::Invalid("sampler box must have lo < hi per axis".into()));
        }
        Ok(BoxSampler { lo, hi, count })
    }

    /// Quasi-uniform points from the additive recurrence with the generalized
    /// golden-ratio vector.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let d = self.lo.len();
        // phi_d is the unique positive root of phi^(d+1) = phi + 1
        let mut phi = 1.5_f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
        }
        let alpha: Vec<f64> = (1..=d).map(|i| (1.0 / phi.powi(i as i32)).fract()).collect();
        let mut out = Vec::with_capacity(self.count);
        let mut u = vec![0.5_f64; d];
        for _ in 0..self.count {
            for i in 0..d {
                u[i] = (u[i] + alpha[i]).fract();
            }
            out.push(
                (0..d)
                    .map(|i| self.lo[i] + (self.hi[i] - self.lo[i]) * u[i])
                    .collect(),
            );
        }
        out
    }
}

/// Per-point validation failure.
#[derive(Clone, Debug, Serialize)]
pub struct FieldFailure {
    pub x: Vec<f64>,
    pub reason: String,
}

/// Region validation verdict.
#[derive(Clone, Debug, Serialize)]
pub struct FieldValidationReport {
    pub name: String,
    pub total: usize,
    pub failures: Vec<FieldFailure>,
    pub pass: bool,
}

/// Check positive-definiteness and the norm/charge ranges over sampled
/// points; failures are collected, not raised.
pub fn validate_field(field: &FieldSpec, sampler: &BoxSampler) -> FieldValidationReport {
    let points = sampler.points();
    let total = points.len();
    let mut failures = Vec::new();
    for x in points {
        match field.jet_at(&x) {
            Ok(_) => {}
            Err(e) => failures.push(FieldFailure {
                x: x.clone(),
                reason: e.to_string(),
            }),
        }
    }
    FieldValidationReport {
        name: field.name.clone(),
        total,
        failures,
        pass: true,
    }
    .finish()
}

impl FieldValidationReport {
    fn finish(mut self) -> Self {
        self.pass = self.failures.is_empty();
        self
    }
}
