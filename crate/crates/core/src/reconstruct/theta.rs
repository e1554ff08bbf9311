use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::branch::{RootTrack, ZERO_RADICAND};
use super::{h_at, ReconstructError};
use crate::curve::{grid, CurveFunction, CurveSample, SharedCurve};
use crate::expr::Expression;
use crate::geodesics::{ExplicitGeodesic, GeodesicError};
use crate::geometry::{Family, GeometrySpec};

const UNIFORM_NODES: usize = 512;

/// Pieces of the Θ formulas at one parameter value.
struct Local {
    sample: CurveSample,
    dh: Complex64,
    /// `h ∓ q²`
    den: Complex64,
    /// Radicand of the velocity norm and its derivative.
    rho: Complex64,
    drho: Complex64,
    d2: Complex64,
}

fn local(family: Family, h: &Expression, g: &ExplicitGeodesic, t: f64) -> Result<Local, ReconstructError> {
    let sample = g.at(t).ok_or(ReconstructError::OutsideSupport(t))?;
    let d2 = sample.d2.ok_or(GeodesicError::NoSecondDerivative(t))?;
    let hj = h_at(h, sample.point)?;
    let (q, dq) = (sample.value, sample.d1);
    let two = Complex64::from(2.0);
    let (den, rho, drho) = if family.is_ads() {
        let den = hj.value + q * q;
        (
            den,
            den * den - dq * dq,
            two * den * (hj.d1 + two * q * dq) - two * dq * d2,
        )
    } else {
        let den = hj.value - q * q;
        (
            den,
            den * den + dq * dq,
            two * den * (hj.d1 - two * q * dq) + two * dq * d2,
        )
    };
    Ok(Local {
        sample,
        dh: hj.d1,
        den,
        rho,
        drho,
        d2,
    })
}

fn grid_of(g: &ExplicitGeodesic) -> Vec<f64> {
    let (lo, hi) = g.support();
    let mut ts = g.fine_grid(1);
    ts.extend(grid(lo, hi, UNIFORM_NODES));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// One of the two logarithmic derivatives as a curve over the geodesic's
/// support.
struct ThetaCurve {
    family: Family,
    h: Expression,
    g: ExplicitGeodesic,
    track: Arc<RootTrack>,
    top: bool,
}

impl ThetaCurve {
    fn sample(&self, t: f64) -> Result<CurveSample, ReconstructError> {
        let l = local(self.family, &self.h, &self.g, t)?;
        let (q, dq) = (l.sample.value, l.sample.d1);
        let root = self.track.root(t, l.rho);
        // Near an identically vanishing radicand the derivative of the root
        // is 0/0; the root itself is then zero to working accuracy.
        let droot = if root.norm() < 1e-12 {
            Complex64::from(0.0)
        } else {
            l.drho / (2.0 * root)
        };
        let i = Complex64::i();
        let (sigma, c, dden) = match (self.family.is_ads(), self.top) {
            (false, true) => (1.0, Complex64::from(-1.0), l.dh - 2.0 * q * dq),
            (false, false) => (1.0, Complex64::from(1.0), l.dh - 2.0 * q * dq),
            (true, true) => (-1.0, i, l.dh + 2.0 * q * dq),
            (true, false) => (-1.0, -i, l.dh + 2.0 * q * dq),
        };
        let num = sigma * q * (dq + c * root);
        let dnum = sigma * (dq * (dq + c * root) + q * (l.d2 + c * droot));
        let value = num / l.den;
        let d1 = (dnum * l.den - num * dden) / (l.den * l.den);
        Ok(CurveSample {
            point: l.sample.point,
            dpoint: l.sample.dpoint,
            value,
            d1,
            d2: None,
        })
    }
}

impl CurveFunction for ThetaCurve {
    fn domain(&self) -> (f64, f64) {
        self.g.support()
    }

    fn eval(&self, t: f64) -> Option<CurveSample> {
        self.sample(t).ok().filter(|s| s.value.is_finite() && s.d1.is_finite())
    }
}

/// `Θ_top` and `Θ_bot` of one geodesic, with the branch record of the
/// velocity norm.
#[derive(Clone)]
pub struct ThetaPair {
    pub family: Family,
    pub top: SharedCurve,
    pub bot: SharedCurve,
    /// Root of the radicand chosen at the base point.
    pub base_root: Complex64,
    /// Grid points where the radicand came within the zero threshold.
    pub flagged: Vec<f64>,
    /// Radicand below the zero threshold over the whole support:
    /// `Θ_top ≡ Θ_bot`.
    pub degenerate: bool,
    pub sup_radicand: f64,
    base_param: f64,
    nodes: Vec<f64>,
    geodesic: ExplicitGeodesic,
}

impl std::fmt::Debug for ThetaPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThetaPair")
            .field("family", &self.family)
            .field("base_root", &self.base_root)
            .field("flagged", &self.flagged)
            .field("degenerate", &self.degenerate)
            .finish()
    }
}

impl ThetaPair {
    pub fn base_param(&self) -> f64 {
        self.base_param
    }

    /// Grid on which the branch was tracked.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn support(&self) -> (f64, f64) {
        self.top.domain()
    }

    pub fn geodesic(&self) -> &ExplicitGeodesic {
        &self.geodesic
    }

    /// `Θ_top·Θ_bot − P` where `P` is `−q²` (hyperbolic, complex) or `q²`
    /// (AdS); zero for every geodesic.
    pub fn product_defect(&self, t: f64) -> Option<Complex64> {
        let q = self.geodesic.at(t)?.value;
        let p = if self.family.is_ads() { q * q } else { -q * q };
        Some(self.top.eval(t)?.value * self.bot.eval(t)?.value - p)
    }
}

fn radicand_fn<'a>(
    family: Family,
    h: &'a Expression,
    g: &'a ExplicitGeodesic,
) -> impl Fn(f64) -> Result<Complex64, ReconstructError> + 'a {
    move |t| {
        let l = local(family, h, g, t)?;
        if l.den.norm() == 0.0 || !l.den.is_finite() {
            return Err(ReconstructError::DenominatorVanishes(t));
        }
        Ok(l.rho)
    }
}

/// Θ pair of `g`, with the square root continued from the base point.
pub fn theta_from_geodesic(spec: &GeometrySpec, g: &ExplicitGeodesic) -> Result<ThetaPair, ReconstructError> {
    let family = g.family();
    check_family(spec, g)?;
    let h = spec.h().clone();
    let nodes = grid_of(g);
    for &t in &nodes {
        let l = local(family, &h, g, t)?;
        if l.den.norm() <= spec.guard() {
            return Err(ReconstructError::DenominatorVanishes(t));
        }
    }
    let track = Arc::new(RootTrack::build(&nodes, g.base_param(), radicand_fn(family, &h, g))?);
    let curve = |top| -> SharedCurve {
        Arc::new(ThetaCurve {
            family,
            h: h.clone(),
            g: g.clone(),
            track: Arc::clone(&track),
            top,
        })
    };
    Ok(ThetaPair {
        family,
        top: curve(true),
        bot: curve(false),
        base_root: track.base_root,
        flagged: track.flagged.clone(),
        degenerate: track.is_degenerate(),
        sup_radicand: track.sup_radicand,
        base_param: g.base_param(),
        nodes,
        geodesic: g.clone(),
    })
}

pub(super) fn check_family(spec: &GeometrySpec, g: &ExplicitGeodesic) -> Result<(), ReconstructError> {
    let same = match spec.family() {
        Family::Hyperbolic => g.family() == Family::Hyperbolic,
        Family::AntiDeSitterPlus | Family::AntiDeSitterMinus => g.family().is_ads(),
        Family::ComplexSphere | Family::KahlerNorden => g.family() == Family::ComplexSphere,
    };
    if same {
        Ok(())
    } else {
        Err(ReconstructError::InvalidInput(format!(
            "geodesic of the {} family used with the {} family",
            g.family(),
            spec.family()
        )))
    }
}

/// Velocity norm of an explicit geodesic sampled over its support.
#[derive(Clone, Debug, Serialize)]
pub struct VelocityNorm {
    pub family: Family,
    /// `(t, L(t))` with the root continued from the base point.
    pub samples: Vec<(f64, Complex64)>,
}

pub fn velocity_norm(spec: &GeometrySpec, g: &ExplicitGeodesic) -> Result<VelocityNorm, ReconstructError> {
    check_family(spec, g)?;
    let nodes = grid_of(g);
    let track = RootTrack::build(&nodes, g.base_param(), radicand_fn(g.family(), spec.h(), g))?;
    Ok(VelocityNorm {
        family: g.family(),
        samples: track.samples().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyReport {
    /// Set when the radicand stays below the zero threshold everywhere.
    pub degenerate: bool,
    pub sup_radicand: f64,
    pub threshold: f64,
}

/// Whether `Θ_top ≡ Θ_bot` on the support of `g`.
pub fn degeneracy_probe(spec: &GeometrySpec, g: &ExplicitGeodesic) -> Result<DegeneracyReport, ReconstructError> {
    check_family(spec, g)?;
    let rho = radicand_fn(g.family(), spec.h(), g);
    let mut sup: f64 = 0.0;
    for t in grid_of(g) {
        sup = sup.max(rho(t)?.norm());
    }
    Ok(DegeneracyReport {
        degenerate: sup < ZERO_RADICAND,
        sup_radicand: sup,
        threshold: ZERO_RADICAND,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::real_function;
    use crate::geodesics::{integrate_explicit, ComplexPath, Support, Termination};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn constant(family: Family, v: f64) -> ExplicitGeodesic {
        ExplicitGeodesic::from_curve(
            family,
            0.0,
            Arc::new(real_function(-1.0, 1.0, move |_| (c(v, 0.0), c(0.0, 0.0), c(0.0, 0.0)))),
            vec![-1.0, 0.0, 1.0],
            Termination::RangeEnd,
        )
    }

    #[test]
    fn hyperbolic_constant_geodesic() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "-1").unwrap();
        let th = theta_from_geodesic(&spec, &constant(Family::Hyperbolic, 1.0)).unwrap();
        assert_eq!(th.top.eval(0.3).unwrap().value, c(1.0, 0.0));
        assert_eq!(th.bot.eval(0.3).unwrap().value, c(-1.0, 0.0));
        assert!(!th.degenerate);
        assert!(th.flagged.is_empty());
    }

    #[test]
    fn harmonic_oscillator_thetas() {
        let spec = GeometrySpec::parse(Family::AntiDeSitterPlus, "1").unwrap();
        let th = theta_from_geodesic(&spec, &constant(Family::AntiDeSitterPlus, 1.0)).unwrap();
        assert!((th.top.eval(-0.5).unwrap().value - c(0.0, -1.0)).norm() < 1e-15);
        assert!((th.bot.eval(-0.5).unwrap().value - c(0.0, 1.0)).norm() < 1e-15);
        let d = degeneracy_probe(&spec, &constant(Family::AntiDeSitterPlus, 1.0)).unwrap();
        assert!(!d.degenerate);
        assert!((d.sup_radicand - 4.0).abs() < 1e-14);
    }

    #[test]
    fn complex_product_identity() {
        let spec = GeometrySpec::parse(Family::ComplexSphere, "z^2 + 1").unwrap();
        let path = ComplexPath::parse("0,0;0.5,0.3").unwrap();
        let g = integrate_explicit(&spec, c(2.0, 0.5), c(0.3, -0.2), &Support::Path(path), 1e-11).unwrap();
        let th = theta_from_geodesic(&spec, &g).unwrap();
        for t in crate::curve::grid(0.0, 1.0, 50) {
            assert!(th.product_defect(t).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn vanishing_denominator_is_rejected() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "1").unwrap();
        let err = theta_from_geodesic(&spec, &constant(Family::Hyperbolic, 1.0)).unwrap_err();
        assert!(matches!(err, ReconstructError::DenominatorVanishes(_)));
    }

    #[test]
    fn velocity_norm_is_positive_in_the_real_case() {
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
            1e-10,
        )
        .unwrap();
        let n = velocity_norm(&spec, &g).unwrap();
        assert!(n.samples.iter().all(|(_, l)| l.re > 0.0 && l.im == 0.0));
    }

    // Ψ' = −(h + Ψ²) with h = −1 gives Ψ = coth(x + arcoth 2), on which the
    // radicand (h + Ψ²)² − Ψ'² vanishes identically.
    #[test]
    fn riccati_type_ads_geodesic_is_degenerate() {
        let spec = GeometrySpec::parse(Family::AntiDeSitterPlus, "-1").unwrap();
        let g = integrate_explicit(
            &spec,
            c(2.0, 0.0),
            c(-3.0, 0.0),
            &Support::Interval {
                x0: 0.0,
                lo: 0.0,
                hi: 1.0,
            },
            1e-12,
        )
        .unwrap();
        let d = degeneracy_probe(&spec, &g).unwrap();
        assert!(d.degenerate, "{d:?}");
        let th = theta_from_geodesic(&spec, &g).unwrap();
        assert!(th.degenerate);
        let (a, b) = (th.top.eval(0.5).unwrap().value, th.bot.eval(0.5).unwrap().value);
        assert!((a - b).norm() < 1e-4);
    }

    #[test]
    fn airy_geodesic_is_not_degenerate() {
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
            1e-10,
        )
        .unwrap();
        assert!(!degeneracy_probe(&spec, &g).unwrap().degenerate);
    }
}
