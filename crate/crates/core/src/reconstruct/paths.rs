use num_complex::Complex64;
use serde::Serialize;

use super::theta::{theta_from_geodesic, ThetaPair};
use super::{ReconstructError, RESIDUAL_LIMIT};
use crate::curve::CurveFunction;
use crate::geodesics::{
    geodesic_residual, integrate_explicit, ComplexPath, ExplicitGeodesic, GeodesicError, Support, Termination,
};
use crate::geometry::{Family, GeometrySpec};
use crate::quadrature;
use crate::reconstruct::h_at;

const GEODESIC_TOL: f64 = 1e-12;
const QUADRATURE_TOL: f64 = 1e-13;
const WINDING_SAMPLES: usize = 4000;
/// Relative disagreement of the two continuations at the end point that
/// counts as monodromy.
const MONODROMY: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathIndependence {
    /// `∫Θ_top dζ` along the two paths.
    pub top: [Complex64; 2],
    pub bot: [Complex64; 2],
    pub diff_top: f64,
    pub diff_bot: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn along(theta: &dyn CurveFunction, path: &ComplexPath) -> Result<Complex64, ReconstructError> {
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..path.segments() {
        let (a, b) = path.segment_range(k);
        let q = quadrature::integrate(|s| theta.eval(s).map(|v| v.value * v.dpoint), a, b, QUADRATURE_TOL, 0.0)?;
        total += q.value;
    }
    Ok(total)
}

/// Total change of `arg(h − 𝔛²)` along the geodesic, in turns.
fn turns_of_denominator(spec: &GeometrySpec, g: &ExplicitGeodesic) -> Result<f64, ReconstructError> {
    let mut ts = g.fine_grid(3);
    ts.extend(crate::curve::grid(0.0, 1.0, WINDING_SAMPLES));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut total = 0.0;
    let mut prev: Option<Complex64> = None;
    for t in ts {
        let s = g.at(t).ok_or(ReconstructError::OutsideSupport(t))?;
        let d = h_at(spec.h(), s.point)?.value - s.value * s.value;
        if let Some(p) = prev {
            total += (d / p).arg();
        }
        prev = Some(d);
    }
    Ok(total / std::f64::consts::TAU)
}

fn geodesic_along(
    spec: &GeometrySpec,
    value0: Complex64,
    slope0: Complex64,
    path: &ComplexPath,
    name: &str,
) -> Result<(ExplicitGeodesic, ThetaPair), ReconstructError> {
    let g = match integrate_explicit(spec, value0, slope0, &Support::Path(path.clone()), GEODESIC_TOL) {
        Err(GeodesicError::StepSizeUnderflow { reached }) => {
            return Err(ReconstructError::PathLeavesSupport(format!(
                "the geodesic along path {name} blows up near parameter {reached}"
            )))
        }
        r => r?,
    };
    if g.termination() != Termination::RangeEnd || g.support().1 < 1.0 {
        return Err(ReconstructError::PathLeavesSupport(format!(
            "the geodesic along path {name} reaches the singular set at parameter {}",
            g.support().1
        )));
    }
    for t in g.fine_grid(1) {
        let r = geodesic_residual(spec, &g, t)?.norm();
        if r > RESIDUAL_LIMIT {
            return Err(ReconstructError::ResidualTooLarge(r));
        }
    }
    let th = theta_from_geodesic(spec, &g)?;
    Ok((g, th))
}

/// Compare `∫Θ dζ` along two paths with common end points, for the complex
/// geodesic with initial data `(value0, slope0)` at the common start.
///
/// Continuations that disagree at the end point, or a zero of `h − 𝔛²`
/// between the paths, mean the region between them is not inside the
/// support; that is reported as [`ReconstructError::PathLeavesSupport`].
pub fn path_independence_check(
    spec: &GeometrySpec,
    value0: Complex64,
    slope0: Complex64,
    path_a: &ComplexPath,
    path_b: &ComplexPath,
    tol: f64,
) -> Result<PathIndependence, ReconstructError> {
    if !matches!(spec.family(), Family::ComplexSphere | Family::KahlerNorden) {
        return Err(ReconstructError::InvalidInput(
            "path integrals need the complex family".into(),
        ));
    }
    if path_a.start() != path_b.start() || path_a.end() != path_b.end() {
        return Err(ReconstructError::InvalidInput(
            "paths must share both end points".into(),
        ));
    }
    let (ga, ta) = geodesic_along(spec, value0, slope0, path_a, "A")?;
    let (gb, tb) = geodesic_along(spec, value0, slope0, path_b, "B")?;

    let end = |g: &ExplicitGeodesic, th: &ThetaPair| -> Result<[Complex64; 3], ReconstructError> {
        let s = g.at(1.0).ok_or(ReconstructError::OutsideSupport(1.0))?;
        let t = th.top.eval(1.0).ok_or(ReconstructError::OutsideSupport(1.0))?;
        Ok([s.value, s.d1, t.value])
    };
    let (ea, eb) = (end(&ga, &ta)?, end(&gb, &tb)?);
    for (k, what) in ["value", "slope", "Θ_top"].iter().enumerate() {
        let scale = 1.0 + ea[k].norm().max(eb[k].norm());
        if (ea[k] - eb[k]).norm() > MONODROMY * scale {
            return Err(ReconstructError::PathLeavesSupport(format!(
                "the continuations along the two paths disagree in {what} at the end point ({} vs {}); \
                 the paths enclose a singularity",
                ea[k], eb[k]
            )));
        }
    }

    // Argument principle: zeros of h − 𝔛² between the paths are poles of Θ.
    let enclosed = turns_of_denominator(spec, &ga)? - turns_of_denominator(spec, &gb)?;
    if enclosed.abs() > 0.5 {
        return Err(ReconstructError::PathLeavesSupport(format!(
            "the paths enclose {} zero(s) of h − 𝔛²",
            enclosed.round()
        )));
    }

    let top = [along(ta.top.as_ref(), path_a)?, along(tb.top.as_ref(), path_b)?];
    let bot = [along(ta.bot.as_ref(), path_a)?, along(tb.bot.as_ref(), path_b)?];
    // A difference near 2πik, k ≠ 0, is the residue of Θ at zeros of u
    // between the paths.
    for (name, d) in [("Θ_top", top[0] - top[1]), ("Θ_bot", bot[0] - bot[1])] {
        let k = (d.im / std::f64::consts::TAU).round();
        if k != 0.0 && (d - Complex64::new(0.0, k * std::f64::consts::TAU)).norm() < 1e-3 {
            return Err(ReconstructError::PathLeavesSupport(format!(
                "the integrals of {name} differ by 2πi·{k}; the paths enclose a zero of the solution"
            )));
        }
    }
    let diff_top = (top[0] - top[1]).norm();
    let diff_bot = (bot[0] - bot[1]).norm();
    Ok(PathIndependence {
        top,
        bot,
        diff_top,
        diff_bot,
        tolerance: tol,
        pass: diff_top <= tol && diff_bot <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // With h = 0 and 𝔛(0) = 1, 𝔛'(0) = 0 the geodesic is
    // 𝔛 = (1 − z²)^(−1/2), with Θ_top = 1/(1+z) and Θ_bot = −1/(1−z).
    #[test]
    fn free_equation_integrals_are_logarithms() {
        let spec = GeometrySpec::parse(Family::ComplexSphere, "0").unwrap();
        let a = ComplexPath::parse("0,0;0.5,0").unwrap();
        let a = ComplexPath::new(vec![a.start(), c(0.2, 0.3), c(0.5, 0.4)]).unwrap();
        let b = ComplexPath::parse("0,0;0.5,0;0.5,0.4").unwrap();
        let r = path_independence_check(&spec, c(1.0, 0.0), c(0.0, 0.0), &a, &b, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
        let z1 = c(0.5, 0.4);
        assert!((r.top[0] - (1.0 + z1).ln()).norm() < 1e-9);
        assert!((r.bot[1] - (1.0 - z1).ln()).norm() < 1e-9);
    }

    #[test]
    fn enclosing_a_zero_of_the_denominator_is_detected() {
        let spec = GeometrySpec::parse(Family::ComplexSphere, "exp(z)").unwrap();
        let straight = ComplexPath::parse("0,0;1,1").unwrap();
        let via_one = ComplexPath::parse("0,0;1,0;1,1").unwrap();
        let err = path_independence_check(&spec, c(2.0, 0.0), c(0.0, -0.5), &straight, &via_one, 1e-8).unwrap_err();
        assert!(
            matches!(err, ReconstructError::PathLeavesSupport(ref m) if m.contains("zero")),
            "{err:?}"
        );
    }

    #[test]
    fn enclosing_a_zero_of_the_solution_is_detected() {
        let spec = GeometrySpec::parse(Family::ComplexSphere, "exp(z)").unwrap();
        let straight = ComplexPath::parse("0,0;1,1").unwrap();
        let via_one = ComplexPath::parse("0,0;1,0;1,1").unwrap();
        let err = path_independence_check(&spec, c(1.5, 0.0), c(0.0, -0.5), &straight, &via_one, 1e-8).unwrap_err();
        assert!(
            matches!(err, ReconstructError::PathLeavesSupport(ref m) if m.contains("2πi")),
            "{err:?}"
        );
    }

    #[test]
    fn enclosing_a_branch_point_is_detected() {
        let spec = GeometrySpec::parse(Family::ComplexSphere, "0").unwrap();
        let below = ComplexPath::parse("0,0;1,-1;2,0").unwrap();
        let above = ComplexPath::parse("0,0;1,1;2,0").unwrap();
        let err = path_independence_check(&spec, c(1.0, 0.0), c(0.0, 0.0), &below, &above, 1e-8).unwrap_err();
        assert!(matches!(err, ReconstructError::PathLeavesSupport(_)), "{err:?}");
    }
}
