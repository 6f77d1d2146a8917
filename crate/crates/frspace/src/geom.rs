//! Generic evaluation core shared by the metric, Cartan, and spray modules.
//!
//! Everything here is generic over [`Scalar`] so the same formulas run on
//! plain floats, on y-seeded duals (metric tensor, Cartan tensor, spray
//! derivatives), on x-seeded duals (the spray oracle), and on the g-seeded
//! dual used for the charge derivative of the metric function.

use crate::dual::{Dual, Scalar};
use crate::error::Result;
use crate::jets::PointJet;
use crate::linalg;
use ndarray::{Array1, Array2, Array3};
use std::f64::consts::{FRAC_PI_2, PI};

/// Background data at a point, at any scalar level.
#[derive(Clone, Debug)]
pub(crate) struct Geom<T: Scalar> {
    pub n: usize,
    pub a: Array2<T>,
    pub ainv: Array2<T>,
    /// Axis covector `b_i`.
    pub b: Array1<T>,
    /// Raised axis `b^i`.
    pub bup: Array1<T>,
    /// Squared axis norm `c^2 = a^{ij} b_i b_j`.
    pub c2: T,
    pub g: T,
    /// `h = sqrt(1 - g^2/4)`.
    pub h: T,
    /// `G = g/h`.
    pub gq: T,
}

impl<T: Scalar> Geom<T> {
    /// Build from raw arrays, computing the inverse and derived scalars. Used
    /// with seeded entries for x-differentiation through the point data.
    pub fn new(a: Array2<T>, b: Array1<T>, g: T) -> Result<Self> {
        let n = b.len();
        let ainv = linalg::invert(&a, "background metric")?;
        let bup = Array1::from_shape_fn(n, |i| {
            (0..n).fold(T::zero(), |acc, j| acc + ainv[(i, j)] * b[j])
        });
        let c2 = (0..n).fold(T::zero(), |acc, i| acc + bup[i] * b[i]);
        let quarter = T::from_f64(0.25);
        let h = (T::one() - quarter * g * g).sqrt();
        let gq = g / h;
        Ok(Geom {
            n,
            a,
            ainv,
            b,
            bup,
            c2,
            g,
            h,
            gq,
        })
    }

    /// Lift to the next dual level with every entry constant.
    pub fn lift(&self) -> Geom<Dual<T>> {
        Geom {
            n: self.n,
            a: self.a.mapv(Dual::constant),
            ainv: self.ainv.mapv(Dual::constant),
            b: self.b.mapv(Dual::constant),
            bup: self.bup.mapv(Dual::constant),
            c2: Dual::constant(self.c2),
            g: Dual::constant(self.g),
            h: Dual::constant(self.h),
            gq: Dual::constant(self.gq),
        }
    }

    /// Lift with the charge seeded; the point and axis data stay constant
    /// (in particular `c` does not depend on the charge).
    pub fn lift_seed_g(&self) -> Geom<Dual<T>> {
        let g = Dual::seeded(self.g);
        let quarter: Dual<T> = Scalar::from_f64(0.25);
        let one: Dual<T> = Scalar::one();
        let h = (one - quarter * g * g).sqrt();
        Geom {
            n: self.n,
            a: self.a.mapv(Dual::constant),
            ainv: self.ainv.mapv(Dual::constant),
            b: self.b.mapv(Dual::constant),
            bup: self.bup.mapv(Dual::constant),
            c2: Dual::constant(self.c2),
            g,
            h,
            gq: g / h,
        }
    }
}

impl Geom<f64> {
    /// Reuse the validated jet's cached inverse.
    pub fn from_jet(jet: &PointJet) -> Geom<f64> {
        let g = jet.g();
        let h = (1.0 - 0.25 * g * g).sqrt();
        Geom {
            n: jet.dim(),
            a: jet.a().clone(),
            ainv: jet.ainv().clone(),
            b: jet.b().clone(),
            bup: jet.b_up(),
            c2: jet.c() * jet.c(),
            g,
            h,
            gq: g / h,
        }
    }
}

/// Tangent-level quantities at any scalar level.
#[derive(Clone, Debug)]
pub(crate) struct Tangent<T: Scalar> {
    pub y: Array1<T>,
    pub b: T,
    pub q2: T,
    pub q: T,
    /// `u_i = a_ij y^j`.
    pub u: Array1<T>,
    /// `v_i = u_i - b b_i`.
    pub v: Array1<T>,
    /// `v^i = y^i - b b^i`.
    pub vup: Array1<T>,
}

pub(crate) fn tangent<T: Scalar>(geom: &Geom<T>, y: Array1<T>) -> Tangent<T> {
    let n = geom.n;
    let u = Array1::from_shape_fn(n, |i| {
        (0..n).fold(T::zero(), |acc, j| acc + geom.a[(i, j)] * y[j])
    });
    let b = (0..n).fold(T::zero(), |acc, i| acc + geom.b[i] * y[i]);
    let s2 = (0..n).fold(T::zero(), |acc, i| acc + u[i] * y[i]);
    let q2 = s2 - b * b;
    let q = q2.sqrt();
    let v = Array1::from_shape_fn(n, |i| u[i] - b * geom.b[i]);
    let vup = Array1::from_shape_fn(n, |i| y[i] - b * geom.bup[i]);
    Tangent {
        y,
        b,
        q2,
        q,
        u,
        v,
        vup,
    }
}

/// Metric-function scalars at any scalar level.
#[derive(Clone, Debug)]
pub(crate) struct Scalars<T: Scalar> {
    /// Characteristic quadratic form `B = b^2 + g q b + q^2`.
    pub b_form: T,
    /// `L = q + (g/2) b`.
    pub l: T,
    /// Angle entering the exponential factor.
    pub f: T,
    /// `J = exp(-(G/2) f)`.
    pub j: T,
    pub k2: T,
    pub k: T,
    /// `nu = q + (1 - c^2) g b`.
    pub nu: T,
}

/// Angle of the point (x, t) measured from the positive x-axis, continuous on
/// the plane slit along the negative t-axis, smooth for dual arithmetic.
///
/// The wedge decomposition keeps every arctan argument bounded by one, so
/// nested duals never differentiate through a blow-up:
/// upper wedge `t > |x|`, right wedge `x > 0`, left wedge `x < 0`.
pub(crate) fn slit_angle<T: Scalar>(x: T, t: T) -> T {
    let vx = x.value();
    let vt = t.value();
    if vt > vx.abs() {
        T::from_f64(FRAC_PI_2) - (x / t).atan()
    } else if vx > 0.0 {
        (t / x).atan()
    } else if vx < 0.0 {
        T::from_f64(PI) + (t / x).atan()
    } else {
        unreachable!("slit angle evaluated on the negative t-axis: the transverse norm q is positive on the slit bundle")
    }
}

pub(crate) fn scalars<T: Scalar>(geom: &Geom<T>, tg: &Tangent<T>) -> Scalars<T> {
    let half = T::from_f64(0.5);
    let b_form = tg.b * tg.b + geom.g * tg.q * tg.b + tg.q2;
    let l = tg.q + half * geom.g * tg.b;
    // f = angle(h b, L) - arctan(G/2); branch selection by the sign of b is
    // folded into the slit angle.
    let theta = slit_angle(geom.h * tg.b, l);
    let f = theta - (half * geom.gq).atan();
    let j = (-(half * geom.gq * f)).exp();
    let k2 = b_form * j * j;
    let k = k2.sqrt();
    let one = T::one();
    let nu = tg.q + (one - geom.c2) * geom.g * tg.b;
    Scalars {
        b_form,
        l,
        f,
        j,
        k2,
        k,
        nu,
    }
}

/// Lowered tangent covector `y_i = (u_i + g q b_i) K^2 / B`.
pub(crate) fn covariant_y<T: Scalar>(geom: &Geom<T>, tg: &Tangent<T>, sc: &Scalars<T>) -> Array1<T> {
    let ratio = sc.k2 / sc.b_form;
    Array1::from_shape_fn(geom.n, |i| (tg.u[i] + geom.g * tg.q * geom.b[i]) * ratio)
}

/// Lowered tangent covector from a geometry and plain tangent vector.
pub(crate) fn covariant_y_at<T: Scalar>(geom: &Geom<T>, y: &Array1<T>) -> Array1<T> {
    let tg = tangent(geom, y.clone());
    let sc = scalars(geom, &tg);
    covariant_y(geom, &tg, &sc)
}

/// Metric tensor `g_ij` as the y-derivative of the lowered tangent covector,
/// one dual pass per direction.
pub(crate) fn metric_tensor<T: Scalar>(geom: &Geom<T>, y: &Array1<T>) -> Array2<T> {
    let n = geom.n;
    let lifted = geom.lift();
    let mut gm = Array2::from_elem((n, n), T::zero());
    for j in 0..n {
        let mut yd = y.mapv(Dual::constant);
        yd[j] = Dual::seeded(y[j]);
        let ylow = covariant_y_at(&lifted, &yd);
        for i in 0..n {
            gm[(i, j)] = ylow[i].du;
        }
    }
    gm
}

/// Cartan tensor `A_ijk = (K/2) d g_ij / d y^k` by one more dual level.
pub(crate) fn cartan_tensor<T: Scalar>(geom: &Geom<T>, y: &Array1<T>) -> Array3<T> {
    let n = geom.n;
    let tg = tangent(geom, y.clone());
    let sc = scalars(geom, &tg);
    let half_k = T::from_f64(0.5) * sc.k;
    let lifted = geom.lift();
    let mut a3 = Array3::from_elem((n, n, n), T::zero());
    for k in 0..n {
        let mut yd = y.mapv(Dual::constant);
        yd[k] = Dual::seeded(y[k]);
        let gm = metric_tensor(&lifted, &yd);
        for i in 0..n {
            for j in 0..n {
                a3[(i, j, k)] = half_k * gm[(i, j)].du;
            }
        }
    }
    a3
}

/// Charge-derivative scalar defined by `dK/dg = (1/2) Mbar K`, via one dual
/// pass in the charge with the point, axis, and tangent data held fixed.
pub(crate) fn mbar<T: Scalar>(geom: &Geom<T>, y: &Array1<T>) -> T {
    let gd = geom.lift_seed_g();
    let yd = y.mapv(Dual::constant);
    let tg = tangent(&gd, yd);
    let sc = scalars(&gd, &tg);
    let two = T::from_f64(2.0);
    two * sc.k.du / sc.k.re
}
