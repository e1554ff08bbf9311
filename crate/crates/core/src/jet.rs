//! Forward-mode jets truncated at second order.
//!
//! [`Jet2`] carries a function of one variable with its first two
//! derivatives. [`HyperJet`] carries a function of `N` variables with its
//! gradient and Hessian; the geometry module evaluates metric components on
//! hyperjets to get exact metric derivatives for Christoffel symbols and
//! curvature.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::Serialize;

use crate::scalar::{Field, Scalar};

/// Value with first and second derivative along one variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jet2<S> {
    pub value: S,
    pub d1: S,
    pub d2: S,
}

impl<S: Scalar> Jet2<S> {
    pub fn new(value: S, d1: S, d2: S) -> Self {
        Self { value, d1, d2 }
    }

    /// The independent variable itself at `at`.
    pub fn variable(at: S) -> Self {
        Self::new(at, S::one(), S::zero())
    }

    pub fn constant(value: S) -> Self {
        Self::new(value, S::zero(), S::zero())
    }

    /// Apply a univariate function given its value and first two derivatives
    /// at `self.value`.
    #[inline]
    pub fn compose(self, f0: S, f1: S, f2: S) -> Self {
        Self::new(f0, f1 * self.d1, f2 * self.d1 * self.d1 + f1 * self.d2)
    }

    pub fn recip(self) -> Self {
        let inv = S::one() / self.value;
        self.compose(inv, -inv * inv, S::constant(2.0) * inv * inv * inv)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    pub fn map<T>(self, f: impl Fn(S) -> T) -> Jet2<T> {
        Jet2 {
            value: f(self.value),
            d1: f(self.d1),
            d2: f(self.d2),
        }
    }

    /// Lift onto a multivariate jet: `self` describes f(u) as a function of
    /// `u`, and `u` is the inner hyperjet.
    pub fn lift<const N: usize>(&self, u: &HyperJet<S, N>) -> HyperJet<S, N> {
        u.compose(self.value, self.d1, self.d2)
    }
}

impl<S: Scalar> Add for Jet2<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl<S: Scalar> Sub for Jet2<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl<S: Scalar> Mul for Jet2<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + S::constant(2.0) * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

impl<S: Scalar> Div for Jet2<S> {
    type Output = Self;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<S: Scalar> Neg for Jet2<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.value, -self.d1, -self.d2)
    }
}

impl<S: Scalar> Field for Jet2<S> {
    fn constant(v: f64) -> Self {
        Jet2::constant(S::constant(v))
    }
}

/// Value, gradient and Hessian of a function of `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperJet<S, const N: usize> {
    pub value: S,
    pub grad: [S; N],
    pub hess: [[S; N]; N],
}

impl<S: Scalar, const N: usize> HyperJet<S, N> {
    pub fn constant(value: S) -> Self {
        Self {
            value,
            grad: [S::zero(); N],
            hess: [[S::zero(); N]; N],
        }
    }

    /// Coordinate function number `index` evaluated at `value`.
    pub fn seed(value: S, index: usize) -> Self {
        let mut j = Self::constant(value);
        j.grad[index] = S::one();
        j
    }

    #[inline]
    pub fn compose(&self, f0: S, f1: S, f2: S) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..N {
            out.grad[i] = f1 * self.grad[i];
            for j in 0..N {
                out.hess[i][j] = f2 * self.grad[i] * self.grad[j] + f1 * self.hess[i][j];
            }
        }
        out
    }

    pub fn recip(&self) -> Self {
        let inv = S::one() / self.value;
        self.compose(inv, -inv * inv, S::constant(2.0) * inv * inv * inv)
    }

    pub fn scale(&self, k: S) -> Self {
        let mut out = *self;
        out.value *= k;
        for i in 0..N {
            out.grad[i] *= k;
            for j in 0..N {
                out.hess[i][j] *= k;
            }
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> HyperJet<T, N> {
        let mut out = HyperJet::<T, N>::constant(f(self.value));
        for i in 0..N {
            out.grad[i] = f(self.grad[i]);
            for j in 0..N {
                out.hess[i][j] = f(self.hess[i][j]);
            }
        }
        out
    }
}

impl<S: Scalar, const N: usize> Add for HyperJet<S, N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.value += o.value;
        for i in 0..N {
            self.grad[i] += o.grad[i];
            for j in 0..N {
                self.hess[i][j] += o.hess[i][j];
            }
        }
        self
    }
}

impl<S: Scalar, const N: usize> Sub for HyperJet<S, N> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<S: Scalar, const N: usize> Neg for HyperJet<S, N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-S::one())
    }
}

impl<S: Scalar, const N: usize> Mul for HyperJet<S, N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.value * o.value);
        for i in 0..N {
            out.grad[i] = self.grad[i] * o.value + self.value * o.grad[i];
            for j in 0..N {
                out.hess[i][j] = self.hess[i][j] * o.value
                    + self.value * o.hess[i][j]
                    + self.grad[i] * o.grad[j]
                    + o.grad[i] * self.grad[j];
            }
        }
        out
    }
}

impl<S: Scalar, const N: usize> Div for HyperJet<S, N> {
    type Output = Self;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<S: Scalar, const N: usize> Field for HyperJet<S, N> {
    fn constant(v: f64) -> Self {
        HyperJet::constant(S::constant(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn jet_product_and_quotient_rules() {
        // f = x^2 / (1 + x) at x = 2: f = 4/3, f' = (x^2 + 2x)/(1+x)^2 = 8/9,
        // f'' = 2/(1+x)^3 = 2/27.
        let x = Jet2::variable(2.0);
        let f = x * x / (Jet2::constant(1.0) + x);
        assert!((f.value - 4.0 / 3.0).abs() < 1e-15);
        assert!((f.d1 - 8.0 / 9.0).abs() < 1e-15);
        assert!((f.d2 - 2.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn hyperjet_mixed_partials() {
        // f(a, b) = a^2 b / (a + b) at (1, 2).
        let a = HyperJet::<f64, 2>::seed(1.0, 0);
        let b = HyperJet::<f64, 2>::seed(2.0, 1);
        let f = a * a * b / (a + b);
        let fa = |a: f64, b: f64| a * a * b / (a + b);
        let h = 1e-4;
        let d_ab =
            (fa(1.0 + h, 2.0 + h) - fa(1.0 + h, 2.0 - h) - fa(1.0 - h, 2.0 + h) + fa(1.0 - h, 2.0 - h)) / (4.0 * h * h);
        assert!((f.value - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.hess[0][1] - d_ab).abs() < 1e-6);
        assert!((f.hess[0][1] - f.hess[1][0]).abs() < 1e-15);
    }

    #[test]
    fn lift_applies_chain_rule_in_complex_arithmetic() {
        // h(z) = z^2 composed with z = x + i y; d/dy h = 2 i z, d2/dy2 = -2.
        let z0 = Complex64::new(0.5, -0.25);
        let h = Jet2::new(z0 * z0, z0 * 2.0, Complex64::new(2.0, 0.0));
        let mut z = HyperJet::<Complex64, 2>::constant(z0);
        z.grad = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let lifted = h.lift(&z);
        assert!((lifted.grad[1] - Complex64::new(0.0, 2.0) * z0).norm() < 1e-15);
        assert!((lifted.hess[1][1] + Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }
}
