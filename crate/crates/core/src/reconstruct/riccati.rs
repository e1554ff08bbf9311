use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::{h_at, riccati_residual, ReconstructError};
use crate::curve::{grid, CurveFunction, CurveSample, SharedCurve};
use crate::expr::Expression;
use crate::geodesics::explicit_second;
use crate::geometry::Family;
use crate::ode::{integrate_plain, DenseSolution, OdeOptions, OdeStatus};

const CHECK_POINTS: usize = 400;

/// Solution of `Θ' = −Θ² − h` along the real axis, from direct integration.
/// Derivatives come from the equation itself.
struct RiccatiCurve {
    h: Expression,
    x0: f64,
    theta0: Complex64,
    forward: Option<DenseSolution<2>>,
    backward: Option<DenseSolution<2>>,
    lo: f64,
    hi: f64,
}

impl CurveFunction for RiccatiCurve {
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn eval(&self, x: f64) -> Option<CurveSample> {
        if !self.contains(x) {
            return None;
        }
        let th = if x == self.x0 {
            self.theta0
        } else {
            let sol = if x > self.x0 { &self.forward } else { &self.backward };
            let y = sol.as_ref()?.eval(x)?;
            Complex64::new(y[0], y[1])
        };
        let h = h_at(&self.h, x.into()).ok()?;
        let d1 = -th * th - h.value;
        Some(CurveSample {
            point: x.into(),
            dpoint: 1.0.into(),
            value: th,
            d1,
            d2: Some(-2.0 * th * d1 - h.d1),
        })
    }
}

/// Integrate the Riccati equation from `Θ(x0) = theta0` over `[lo, hi]`.
pub fn riccati_curve(
    h: &Expression,
    x0: f64,
    theta0: Complex64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<SharedCurve, ReconstructError> {
    if !(lo <= x0 && x0 <= hi) {
        return Err(ReconstructError::InvalidInput("base point outside the interval".into()));
    }
    let opts = OdeOptions::with_tol(tol);
    let rhs = |x: f64, y: &[f64; 2]| {
        let th = Complex64::new(y[0], y[1]);
        let d = -th * th - h_at(h, x.into()).ok()?.value;
        Some([d.re, d.im])
    };
    let run = |to: f64| -> Result<Option<DenseSolution<2>>, ReconstructError> {
        if to == x0 {
            return Ok(None);
        }
        let sol = integrate_plain(rhs, x0, [theta0.re, theta0.im], to, &opts)
            .map_err(|_| ReconstructError::InvalidInput(format!("Riccati equation not defined at {x0}")))?;
        if sol.status != OdeStatus::Completed {
            return Err(ReconstructError::InvalidInput(format!(
                "Riccati solution blows up near {}",
                sol.t_end()
            )));
        }
        Ok(Some(sol))
    };
    Ok(Arc::new(RiccatiCurve {
        h: h.clone(),
        x0,
        theta0,
        forward: run(hi)?,
        backward: run(lo)?,
        lo,
        hi,
    }))
}

/// How a Riccati solution is turned into a geodesic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SignMode {
    /// `Ψ = ±Θ`, an (anti-)de Sitter geodesic; `Θ` real and nonvanishing.
    Real,
    /// `𝔛 = −iΘ`, a complex-sphere geodesic.
    Imaginary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RiccatiGeodesicReport {
    pub mode: SignMode,
    pub riccati_max: f64,
    pub geodesic_max: f64,
    pub points: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Check that a Riccati solution induces a geodesic.
pub fn riccati_solution_is_geodesic(
    h: &Expression,
    theta: &dyn CurveFunction,
    mode: SignMode,
    tol: f64,
) -> Result<RiccatiGeodesicReport, ReconstructError> {
    let (lo, hi) = theta.domain();
    let ts: Vec<f64> = grid(lo, hi, CHECK_POINTS).collect();
    let mut riccati_max: f64 = 0.0;
    for &t in &ts {
        riccati_max = riccati_max.max(riccati_residual(h, theta, t)?.norm());
    }
    if riccati_max > tol {
        return Err(ReconstructError::RiccatiResidualTooLarge(riccati_max));
    }
    let mut geodesic_max: f64 = 0.0;
    for &t in &ts {
        let s = theta.eval(t).ok_or(ReconstructError::OutsideSupport(t))?;
        let d2 = s.d2.ok_or(crate::geodesics::GeodesicError::NoSecondDerivative(t))?;
        let hj = h_at(h, s.point)?;
        let r = match mode {
            SignMode::Real => {
                let scale = s.value.norm();
                if s.value.im.abs() > 1e-12 * (1.0 + scale) {
                    return Err(ReconstructError::InvalidInput(format!("Θ is not real at {t}")));
                }
                if s.value.re == 0.0 {
                    return Err(ReconstructError::InvalidInput(format!("Θ vanishes at {t}")));
                }
                let sign = s.value.re.signum();
                let (q, dq, ddq) = (sign * s.value.re, sign * s.d1.re, sign * d2.re);
                Complex64::from(ddq - explicit_second(Family::AntiDeSitterPlus, hj.map(|v| v.re), q, dq))
            }
            SignMode::Imaginary => {
                let mi = -Complex64::i();
                let (q, dq, ddq) = (mi * s.value, mi * s.d1, mi * d2);
                ddq - explicit_second(Family::ComplexSphere, hj, q, dq)
            }
        };
        geodesic_max = geodesic_max.max(r.norm());
    }
    Ok(RiccatiGeodesicReport {
        mode,
        riccati_max,
        geodesic_max,
        points: ts.len(),
        tolerance: tol,
        pass: geodesic_max <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::real_function;
    use crate::expr::Mode;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_solutions() {
        let m1 = Expression::parse("-1", Mode::Real).unwrap();
        let one = real_function(0.0, 1.0, |_| (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        let r = riccati_solution_is_geodesic(&m1, &one, SignMode::Real, 1e-12).unwrap();
        assert!(r.pass && r.geodesic_max == 0.0);

        let h1 = Expression::parse("1", Mode::Complex).unwrap();
        let i = real_function(0.0, 1.0, |_| (c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)));
        let r = riccati_solution_is_geodesic(&h1, &i, SignMode::Imaginary, 1e-12).unwrap();
        assert!(r.pass && r.geodesic_max == 0.0);
    }

    #[test]
    fn rejects_non_solutions() {
        let m1 = Expression::parse("-1", Mode::Real).unwrap();
        let two = real_function(0.0, 1.0, |_| (c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        assert!(matches!(
            riccati_solution_is_geodesic(&m1, &two, SignMode::Real, 1e-6),
            Err(ReconstructError::RiccatiResidualTooLarge(_))
        ));
    }

    #[test]
    fn integrated_riccati_solution_is_an_ads_geodesic() {
        let h = Expression::parse("x^2", Mode::Real).unwrap();
        let th = riccati_curve(&h, 0.0, c(2.0, 0.0), -0.3, 0.6, 1e-12).unwrap();
        let r = riccati_solution_is_geodesic(&h, th.as_ref(), SignMode::Real, 1e-6).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
