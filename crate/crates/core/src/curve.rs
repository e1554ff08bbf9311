//! Scalar functions along a real parameter, with derivatives taken with
//! respect to the chart variable (`x`, or `z` along a complex path).

use std::sync::Arc;

use num_complex::Complex64;

/// One evaluation of a [`CurveFunction`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    /// Chart variable at the parameter value (`x` or `z`).
    pub point: Complex64,
    /// Derivative of the chart variable with respect to the parameter.
    pub dpoint: Complex64,
    pub value: Complex64,
    /// Derivative with respect to the chart variable.
    pub d1: Complex64,
    /// Second derivative, where the representation provides one.
    pub d2: Option<Complex64>,
}

pub trait CurveFunction: Send + Sync {
    /// Closed parameter interval on which the function is defined.
    fn domain(&self) -> (f64, f64);

    fn eval(&self, t: f64) -> Option<CurveSample>;

    fn contains(&self, t: f64) -> bool {
        let (a, b) = self.domain();
        t >= a && t <= b
    }
}

pub type SharedCurve = Arc<dyn CurveFunction>;

/// Adapter for closures, mostly for analytic test functions.
pub struct ClosureCurve<F> {
    lo: f64,
    hi: f64,
    f: F,
}

impl<F> ClosureCurve<F>
where
    F: Fn(f64) -> Option<CurveSample> + Send + Sync,
{
    pub fn new(lo: f64, hi: f64, f: F) -> Self {
        Self { lo, hi, f }
    }
}

impl<F> CurveFunction for ClosureCurve<F>
where
    F: Fn(f64) -> Option<CurveSample> + Send + Sync,
{
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn eval(&self, t: f64) -> Option<CurveSample> {
        if !self.contains(t) {
            return None;
        }
        (self.f)(t)
    }
}

/// Real-variable function given by value and two derivatives.
pub fn real_function<F>(lo: f64, hi: f64, f: F) -> ClosureCurve<impl Fn(f64) -> Option<CurveSample> + Send + Sync>
where
    F: Fn(f64) -> (Complex64, Complex64, Complex64) + Send + Sync,
{
    ClosureCurve::new(lo, hi, move |x| {
        let (value, d1, d2) = f(x);
        Some(CurveSample {
            point: x.into(),
            dpoint: 1.0.into(),
            value,
            d1,
            d2: Some(d2),
        })
    })
}

/// Uniform grid of `n + 1` parameter values over `[a, b]`.
pub fn grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
}
