//! Scalar abstraction shared by the real and holomorphic code paths.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Field operations needed by metric formulas. Implemented by plain scalars
/// and by the jet types, so one formula serves both values and derivatives.
pub trait Field:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;

    fn square(self) -> Self {
        self * self
    }
}

/// A real or complex number with the elementary functions used by the
/// expression evaluator. Complex functions use principal branches.
pub trait Scalar: Field + PartialEq + AddAssign + SubAssign + MulAssign + Send + Sync + 'static {
    const IS_COMPLEX: bool;

    fn zero() -> Self {
        Self::constant(0.0)
    }
    fn one() -> Self {
        Self::constant(1.0)
    }
    fn from_complex(c: Complex64) -> Option<Self>;
    fn to_complex(self) -> Complex64;
    fn modulus(self) -> f64;
    fn re(self) -> f64;
    fn is_finite(self) -> bool;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;

    fn powi(self, n: i32) -> Self {
        let mut acc = Self::one();
        let mut base = self;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        if n < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }
}

impl Field for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_complex(c: Complex64) -> Option<Self> {
        (c.im == 0.0).then_some(c.re)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn re(self) -> f64 {
        self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

impl Field for Complex64 {
    #[inline]
    fn constant(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn from_complex(c: Complex64) -> Option<Self> {
        Some(c)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn sinh(self) -> Self {
        Complex64::sinh(self)
    }
    fn cosh(self) -> Self {
        Complex64::cosh(self)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        Complex64::powf(self, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_handles_negative_exponents() {
        assert_eq!(Scalar::powi(2.0f64, -2), 0.25);
        let z = Complex64::new(0.0, 1.0);
        assert!((Scalar::powi(z, 4) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
