//! Forward-mode automatic differentiation on nested dual numbers.
//!
//! Every tensor of the metric family is an exact algebraic expression in the
//! tangent vector, the charge, and the point data, so derivatives of any order
//! are obtained by nesting [`Dual`] levels: `Dual<f64>` carries one first
//! derivative, `Dual<Dual<f64>>` one mixed second derivative, and so on. The
//! whole evaluation pipeline is generic over [`Scalar`] so the same code path
//! produces values and derivatives.

use ndarray::{Array1, Array2, Array3};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic interface shared by `f64` and nested [`Dual`] numbers.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    /// Innermost real part, used for branch selection and pivoting.
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn atan(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Integer power by binary exponentiation; keeps derivatives exact and
    /// works for negative bases.
    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return Self::one() / self.powi(-n);
        }
        let mut acc = Self::one();
        let mut base = self;
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn atan(self) -> Self {
        f64::atan(self)
    }
}

/// First-order dual number over any [`Scalar`].
#[derive(Clone, Copy, Debug)]
pub struct Dual<T: Scalar> {
    pub re: T,
    pub du: T,
}

impl<T: Scalar> Dual<T> {
    #[inline]
    pub fn constant(re: T) -> Self {
        Dual { re, du: T::zero() }
    }
    /// Value with unit derivative: the seed for one differentiation direction.
    #[inline]
    pub fn seeded(re: T) -> Self {
        Dual { re, du: T::one() }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual {
            re: self.re + o.re,
            du: self.du + o.du,
        }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual {
            re: self.re - o.re,
            du: self.du - o.du,
        }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual {
            re: self.re * o.re,
            du: self.re * o.du + self.du * o.re,
        }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual {
            re: q,
            du: (self.du - q * o.du) / o.re,
        }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual {
            re: -self.re,
            du: -self.du,
        }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dual::constant(T::from_f64(x))
    }
    #[inline]
    fn value(self) -> f64 {
        self.re.value()
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual {
            re: s,
            du: self.du / (s + s),
        }
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual {
            re: e,
            du: self.du * e,
        }
    }
    #[inline]
    fn ln(self) -> Self {
        Dual {
            re: self.re.ln(),
            du: self.du / self.re,
        }
    }
    #[inline]
    fn sin(self) -> Self {
        Dual {
            re: self.re.sin(),
            du: self.du * self.re.cos(),
        }
    }
    #[inline]
    fn cos(self) -> Self {
        Dual {
            re: self.re.cos(),
            du: -(self.du * self.re.sin()),
        }
    }
    #[inline]
    fn atan(self) -> Self {
        Dual {
            re: self.re.atan(),
            du: self.du / (T::one() + self.re * self.re),
        }
    }
}

/// Lift a vector to the next dual level as constants.
pub fn lift1<T: Scalar>(v: &Array1<T>) -> Array1<Dual<T>> {
    v.mapv(Dual::constant)
}

pub fn lift2<T: Scalar>(m: &Array2<T>) -> Array2<Dual<T>> {
    m.mapv(Dual::constant)
}

pub fn lift3<T: Scalar>(t: &Array3<T>) -> Array3<Dual<T>> {
    t.mapv(Dual::constant)
}

/// Embed f64 data into any scalar level as constants.
pub fn embed1<T: Scalar>(v: &Array1<f64>) -> Array1<T> {
    v.mapv(T::from_f64)
}

pub fn embed2<T: Scalar>(m: &Array2<f64>) -> Array2<T> {
    m.mapv(T::from_f64)
}

pub fn embed3<T: Scalar>(t: &Array3<f64>) -> Array3<T> {
    t.mapv(T::from_f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(re: f64, du: f64) -> Dual<f64> {
        Dual { re, du }
    }

    #[test]
    fn first_derivatives_of_elementary_functions() {
        let x = Dual::seeded(0.7_f64);
        assert!((x.sqrt().du - 0.5 / 0.7_f64.sqrt()).abs() < 1e-15);
        assert!((x.exp().du - 0.7_f64.exp()).abs() < 1e-15);
        assert!((x.ln().du - 1.0 / 0.7).abs() < 1e-15);
        assert!((x.sin().du - 0.7_f64.cos()).abs() < 1e-15);
        assert!((x.cos().du + 0.7_f64.sin()).abs() < 1e-15);
        assert!((x.atan().du - 1.0 / (1.0 + 0.49)).abs() < 1e-15);
    }

    #[test]
    fn quotient_rule() {
        let x = d(1.3, 1.0);
        let y = d(-0.4, 0.0);
        let q = x / y;
        assert!((q.re - 1.3 / -0.4).abs() < 1e-15);
        assert!((q.du - 1.0 / -0.4).abs() < 1e-15);
    }

    #[test]
    fn nested_duals_give_second_derivative() {
        // f(x) = x^3, f''(0.9) = 6 * 0.9
        let x: Dual<Dual<f64>> = Dual {
            re: Dual::seeded(0.9),
            du: Dual::constant(1.0),
        };
        let y = x * x * x;
        assert!((y.du.du - 6.0 * 0.9).abs() < 1e-14);
    }

    #[test]
    fn powi_matches_repeated_multiplication_and_negative_exponents() {
        let x = Dual::seeded(1.7_f64);
        let p = x.powi(5);
        assert!((p.re - 1.7_f64.powi(5)).abs() < 1e-12);
        assert!((p.du - 5.0 * 1.7_f64.powi(4)).abs() < 1e-12);
        let q = x.powi(-2);
        assert!((q.du + 2.0 * 1.7_f64.powi(-3)).abs() < 1e-14);
    }

    #[test]
    fn third_derivative_of_atan_chain() {
        // f(x) = atan(x^2); hand differentiation gives
        // f''' = (24x^7 - 40x^3)/(1+x^4)^3
        let x0 = 0.6_f64;
        type D3 = Dual<Dual<Dual<f64>>>;
        let mut x: D3 = Scalar::from_f64(x0);
        x.du = Scalar::one();
        x.re.du = Scalar::one();
        x.re.re.du = 1.0;
        let f = (x * x).atan();
        let denom = (1.0 + x0.powi(4)).powi(3);
        let exact = (24.0 * x0.powi(7) - 40.0 * x0.powi(3)) / denom;
        assert!(
            (f.du.du.du - exact).abs() < 1e-13,
            "ad {} vs exact {}",
            f.du.du.du,
            exact
        );
    }
}
