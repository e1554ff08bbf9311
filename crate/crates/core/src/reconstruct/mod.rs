//! Logarithmic derivatives and solution bases of `u'' + h u = 0` rebuilt
//! from explicit-form geodesics, and the converse Riccati checks.
//!
//! For a geodesic `q` with `D = h − q²` (hyperbolic, complex) the two
//! logarithmic derivatives are
//! `Θ_top, Θ_bot = q(q' ∓ L)/D` with `L = sqrt(D² + q'²)`.
//! For (anti-)de Sitter, with `D = h + q²`,
//! `Θ_top, Θ_bot = −q(q' ± iR)/D` with `R = sqrt(D² − q'²)`.
//! Both solve `Θ' + Θ² + h = 0` exactly when `q` is a geodesic, and the
//! basis is `u = exp ∫ Θ`.

mod basis;
mod branch;
mod invert;
mod paths;
mod riccati;
mod theta;

use num_complex::Complex64;
use thiserror::Error;

use crate::curve::CurveFunction;
use crate::expr::{ExprError, Expression, Mode};
use crate::geodesics::GeodesicError;
use crate::geometry::GeometryError;
use crate::jet::Jet2;
use crate::quadrature::QuadratureError;

pub use basis::{reconstruct_basis, BasisCheck, SolutionBasis, WronskianRecord};
pub use branch::{RootTrack, ZERO_RADICAND};
pub use invert::{invert_to_geodesic, InversionSource};
pub use paths::{path_independence_check, PathIndependence};
pub use riccati::{riccati_curve, riccati_solution_is_geodesic, RiccatiGeodesicReport, SignMode};
pub use theta::{degeneracy_probe, theta_from_geodesic, velocity_norm, DegeneracyReport, ThetaPair, VelocityNorm};

/// Geodesic residual above which [`reconstruct_basis`] refuses the input.
pub const RESIDUAL_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconstructError {
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("denominator of Θ vanishes at parameter {0}")]
    DenominatorVanishes(f64),
    #[error("geodesic residual {0:e} is too large; the curve is not a geodesic")]
    ResidualTooLarge(f64),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(#[from] QuadratureError),
    #[error("solution vanishes at parameter {0}")]
    ZeroCrossingOfU(f64),
    #[error("radicand negative at parameter {0}; not a geodesic of this family")]
    NegativeRadicand(f64),
    #[error("Riccati residual {0:e} above tolerance")]
    RiccatiResidualTooLarge(f64),
    #[error("path leaves the support: {0}")]
    PathLeavesSupport(String),
    #[error("parameter {0} outside the support")]
    OutsideSupport(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl From<GeometryError> for ReconstructError {
    fn from(e: GeometryError) -> Self {
        ReconstructError::Geodesic(e.into())
    }
}

/// `h` with two derivatives at a chart point; real expressions read the
/// real part.
pub(crate) fn h_at(h: &Expression, p: Complex64) -> Result<Jet2<Complex64>, ExprError> {
    match h.mode() {
        Mode::Real => Ok(h.jet(p.re)?.map(Complex64::from)),
        Mode::Complex => h.jet(p),
    }
}

/// `u'' + h u` at parameter `t`.
pub fn ode_residual(h: &Expression, u: &dyn CurveFunction, t: f64) -> Result<Complex64, ReconstructError> {
    let s = u.eval(t).ok_or(ReconstructError::OutsideSupport(t))?;
    let d2 = s.d2.ok_or(GeodesicError::NoSecondDerivative(t))?;
    Ok(d2 + h_at(h, s.point)?.value * s.value)
}

/// `Θ' + Θ² + h` at parameter `t`.
pub fn riccati_residual(h: &Expression, theta: &dyn CurveFunction, t: f64) -> Result<Complex64, ReconstructError> {
    let s = theta.eval(t).ok_or(ReconstructError::OutsideSupport(t))?;
    Ok(s.d1 + s.value * s.value + h_at(h, s.point)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::real_function;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn residuals_of_elementary_functions() {
        let m1 = Expression::parse("-1", Mode::Real).unwrap();
        let one = Expression::parse("1", Mode::Real).unwrap();
        let exp = real_function(-1.0, 1.0, |x| {
            let e = c(x.exp(), 0.0);
            (e, e, e)
        });
        let sin = real_function(-1.0, 1.0, |x| (c(x.sin(), 0.0), c(x.cos(), 0.0), c(-x.sin(), 0.0)));
        assert!(ode_residual(&m1, &exp, 0.4).unwrap().norm() < 1e-15);
        assert!(ode_residual(&one, &sin, 0.4).unwrap().norm() < 1e-15);
        assert!(matches!(
            ode_residual(&one, &sin, 3.0),
            Err(ReconstructError::OutsideSupport(_))
        ));

        let theta1 = real_function(-1.0, 1.0, |_| (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        assert_eq!(riccati_residual(&m1, &theta1, 0.0).unwrap(), c(0.0, 0.0));
        let theta_i = real_function(-1.0, 1.0, |_| (c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0)));
        assert_eq!(riccati_residual(&one, &theta_i, 0.5).unwrap(), c(0.0, 0.0));
    }
}
