use num_complex::Complex64;
use serde::Serialize;

use super::theta::{check_family, theta_from_geodesic, ThetaPair};
use super::{ReconstructError, RESIDUAL_LIMIT};
use crate::curve::{CurveFunction, CurveSample, SharedCurve};
use crate::geodesics::{geodesic_residual, ComplexPath, ExplicitGeodesic};
use crate::geometry::GeometrySpec;
use crate::quadrature;

/// Whether [`reconstruct_basis`] first checks that its input is a geodesic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisCheck {
    /// Reject curves whose geodesic residual exceeds [`RESIDUAL_LIMIT`].
    Residual,
    Unchecked,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WronskianRecord {
    /// `u_top u_bot' − u_top' u_bot` at the base point.
    pub at_base: Complex64,
    /// Largest `|W − W(base)| / |W(base)|` over the integration nodes.
    pub max_relative_variation: f64,
    pub samples: usize,
}

/// `u_top`, `u_bot` normalised to 1 at the base point.
#[derive(Clone)]
pub struct SolutionBasis {
    pub u_top: SharedCurve,
    pub u_bot: SharedCurve,
    pub theta: ThetaPair,
    pub base_param: f64,
    pub base_point: Complex64,
    pub wronskian: WronskianRecord,
}

impl std::fmt::Debug for SolutionBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolutionBasis")
            .field("base_param", &self.base_param)
            .field("base_point", &self.base_point)
            .field("wronskian", &self.wronskian)
            .field("theta", &self.theta)
            .finish()
    }
}

impl SolutionBasis {
    pub fn support(&self) -> (f64, f64) {
        self.u_top.domain()
    }

    /// `a u_top + b u_bot` at `t`.
    pub fn combination(&self, a: Complex64, b: Complex64, t: f64) -> Option<CurveSample> {
        let p = self.u_top.eval(t)?;
        let q = self.u_bot.eval(t)?;
        Some(CurveSample {
            point: p.point,
            dpoint: p.dpoint,
            value: a * p.value + b * q.value,
            d1: a * p.d1 + b * q.d1,
            d2: Some(a * p.d2? + b * q.d2?),
        })
    }

    pub fn wronskian_at(&self, t: f64) -> Option<Complex64> {
        let p = self.u_top.eval(t)?;
        let q = self.u_bot.eval(t)?;
        Some(p.value * q.d1 - p.d1 * q.value)
    }
}

/// `exp ∫_base^t Θ dζ` with the integral tabulated at grid nodes and
/// completed by adaptive quadrature from the nearest node.
struct ExpIntegral {
    theta: SharedCurve,
    ts: Vec<f64>,
    integrals: Vec<Complex64>,
    density: f64,
}

fn piece(theta: &dyn CurveFunction, a: f64, b: f64, density: f64) -> Result<Complex64, ReconstructError> {
    let tol = (density * (b - a).abs()).max(1e-15);
    let q = quadrature::integrate(|s| theta.eval(s).map(|v| v.value * v.dpoint), a, b, tol, 0.0)?;
    Ok(q.value)
}

impl ExpIntegral {
    fn build(theta: SharedCurve, nodes: &[f64], base: f64, tol: f64) -> Result<Self, ReconstructError> {
        let (lo, hi) = theta.domain();
        let density = tol / (hi - lo).max(1e-300);
        let mut ts: Vec<f64> = nodes.to_vec();
        ts.push(base);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let ib = ts.iter().position(|&t| t == base).unwrap_or(0);
        let mut integrals = vec![Complex64::new(0.0, 0.0); ts.len()];
        for k in ib + 1..ts.len() {
            integrals[k] = integrals[k - 1] + piece(theta.as_ref(), ts[k - 1], ts[k], density)?;
        }
        for k in (0..ib).rev() {
            integrals[k] = integrals[k + 1] + piece(theta.as_ref(), ts[k + 1], ts[k], density)?;
        }
        Ok(Self {
            theta,
            ts,
            integrals,
            density,
        })
    }

    fn integral(&self, t: f64) -> Option<Complex64> {
        let i = self.ts.partition_point(|&s| s < t);
        let k = if i == 0 {
            0
        } else if i >= self.ts.len() || (t - self.ts[i - 1]) <= (self.ts[i] - t) {
            i - 1
        } else {
            i
        };
        if self.ts[k] == t {
            return Some(self.integrals[k]);
        }
        piece(self.theta.as_ref(), self.ts[k], t, self.density)
            .ok()
            .map(|v| self.integrals[k] + v)
    }
}

impl CurveFunction for ExpIntegral {
    fn domain(&self) -> (f64, f64) {
        self.theta.domain()
    }

    fn eval(&self, t: f64) -> Option<CurveSample> {
        if !self.contains(t) {
            return None;
        }
        let s = self.theta.eval(t)?;
        let u = self.integral(t)?.exp();
        Some(CurveSample {
            point: s.point,
            dpoint: s.dpoint,
            value: u,
            d1: s.value * u,
            d2: Some((s.d1 + s.value * s.value) * u),
        })
    }
}

fn max_geodesic_residual(spec: &GeometrySpec, g: &ExplicitGeodesic) -> Result<f64, ReconstructError> {
    let mut worst: f64 = 0.0;
    for t in g.fine_grid(1) {
        worst = worst.max(geodesic_residual(spec, g, t)?.norm());
    }
    Ok(worst)
}

/// Solution basis of `u'' + h u = 0` from the geodesic `g`, normalised at
/// parameter `base`.
///
/// Complex geodesics already carry the path they were integrated along; a
/// `path`, when given, must be that path.
pub fn reconstruct_basis(
    spec: &GeometrySpec,
    g: &ExplicitGeodesic,
    base: f64,
    path: Option<&ComplexPath>,
    tol: f64,
    check: BasisCheck,
) -> Result<SolutionBasis, ReconstructError> {
    check_family(spec, g)?;
    if !(tol > 0.0) {
        return Err(ReconstructError::InvalidInput("tolerance must be positive".into()));
    }
    let (lo, hi) = g.support();
    if !(base >= lo && base <= hi) {
        return Err(ReconstructError::OutsideSupport(base));
    }
    if let Some(path) = path {
        if !g.is_complex() {
            return Err(ReconstructError::InvalidInput(
                "paths apply to the complex family only".into(),
            ));
        }
        for (t, s) in g.samples() {
            if (s.point - path.point(t)).norm() > 1e-9 * (1.0 + s.point.norm()) {
                return Err(ReconstructError::InvalidInput(
                    "the geodesic was not integrated along the given path".into(),
                ));
            }
        }
    }
    if check == BasisCheck::Residual {
        let r = max_geodesic_residual(spec, g)?;
        if r > RESIDUAL_LIMIT {
            return Err(ReconstructError::ResidualTooLarge(r));
        }
    }
    let theta = theta_from_geodesic(spec, g)?;
    let nodes = g.fine_grid(1);
    let top = ExpIntegral::build(theta.top.clone(), &nodes, base, tol)?;
    let bot = ExpIntegral::build(theta.bot.clone(), &nodes, base, tol)?;

    let w_at = |k: usize| -> Option<Complex64> {
        let t = top.ts[k];
        let (a, b) = (theta.top.eval(t)?.value, theta.bot.eval(t)?.value);
        Some((top.integrals[k] + bot.integrals[k]).exp() * (b - a))
    };
    let kb = top.ts.iter().position(|&t| t == base).unwrap_or(0);
    let w0 = w_at(kb).ok_or(ReconstructError::OutsideSupport(base))?;
    let mut variation: f64 = 0.0;
    for k in 0..top.ts.len() {
        let w = w_at(k).ok_or(ReconstructError::OutsideSupport(top.ts[k]))?;
        let d = (w - w0).norm();
        variation = variation.max(if w0.norm() > 0.0 { d / w0.norm() } else { d });
    }
    let base_point = theta
        .top
        .eval(base)
        .map(|s| s.point)
        .unwrap_or(Complex64::new(base, 0.0));
    let samples = top.ts.len();
    Ok(SolutionBasis {
        u_top: std::sync::Arc::new(top),
        u_bot: std::sync::Arc::new(bot),
        theta,
        base_param: base,
        base_point,
        wronskian: WronskianRecord {
            at_base: w0,
            max_relative_variation: variation,
            samples,
        },
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::curve::{grid, real_function};
    use crate::geodesics::{integrate_explicit, Support, Termination};
    use crate::geometry::Family;
    use crate::reconstruct::ode_residual;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn constant(family: Family, v: f64) -> ExplicitGeodesic {
        ExplicitGeodesic::from_curve(
            family,
            0.0,
            Arc::new(real_function(-1.0, 2.0, move |_| (c(v, 0.0), c(0.0, 0.0), c(0.0, 0.0)))),
            vec![-1.0, 0.0, 1.0, 2.0],
            Termination::RangeEnd,
        )
    }

    #[test]
    fn exponential_basis() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "-1").unwrap();
        let b = reconstruct_basis(
            &spec,
            &constant(Family::Hyperbolic, 1.0),
            0.0,
            None,
            1e-12,
            BasisCheck::Residual,
        )
        .unwrap();
        for x in grid(-1.0, 2.0, 30) {
            assert!((b.u_top.eval(x).unwrap().value - c(x.exp(), 0.0)).norm() < 1e-9 * x.exp());
            assert!((b.u_bot.eval(x).unwrap().value - c((-x).exp(), 0.0)).norm() < 1e-9);
        }
        assert_eq!(b.u_top.eval(0.0).unwrap().value, c(1.0, 0.0));
        assert!((b.wronskian.at_base - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn oscillator_basis() {
        let spec = GeometrySpec::parse(Family::AntiDeSitterPlus, "1").unwrap();
        let b = reconstruct_basis(
            &spec,
            &constant(Family::AntiDeSitterPlus, 1.0),
            0.0,
            None,
            1e-12,
            BasisCheck::Residual,
        )
        .unwrap();
        for x in grid(-1.0, 2.0, 30) {
            assert!((b.u_top.eval(x).unwrap().value - c(0.0, -x).exp()).norm() < 1e-9);
            assert!((b.u_bot.eval(x).unwrap().value - c(0.0, x).exp()).norm() < 1e-9);
        }
    }

    #[test]
    fn non_geodesic_is_refused_then_fails_the_equation() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "-1").unwrap();
        let g = constant(Family::Hyperbolic, 2.0);
        let err = reconstruct_basis(&spec, &g, 0.0, None, 1e-10, BasisCheck::Residual).unwrap_err();
        assert!(matches!(err, ReconstructError::ResidualTooLarge(r) if (r - 7.5).abs() < 1e-12));
        let b = reconstruct_basis(&spec, &g, 0.0, None, 1e-10, BasisCheck::Unchecked).unwrap();
        let worst = grid(0.0, 1.0, 20)
            .map(|x| ode_residual(spec.h(), b.u_top.as_ref(), x).unwrap().norm())
            .fold(0.0, f64::max);
        assert!(worst > 1e-2);
    }

    #[test]
    fn airy_basis_solves_the_equation() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "x").unwrap();
        let g = integrate_explicit(
            &spec,
            c(2.0, 0.0),
            c(0.3, 0.0),
            &Support::Interval {
                x0: 0.0,
                lo: -0.5,
                hi: 0.4,
            },
            1e-12,
        )
        .unwrap();
        let b = reconstruct_basis(&spec, &g, 0.0, None, 1e-12, BasisCheck::Residual).unwrap();
        for x in grid(-0.5, 0.4, 45) {
            for (a, bb) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, -3.0)] {
                let s = b.combination(c(a, 0.0), c(bb, 0.0), x).unwrap();
                assert!((s.d2.unwrap() + x * s.value).norm() < 1e-6);
            }
        }
        assert!(b.wronskian.max_relative_variation < 1e-6);
    }
}
