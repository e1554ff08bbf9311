use std::sync::Arc;

use num_complex::Complex64;

use super::basis::SolutionBasis;
use super::branch::RootTrack;
use super::theta::ThetaPair;
use super::ReconstructError;
use crate::curve::{CurveFunction, CurveSample, SharedCurve};
use crate::expr::Mode;
use crate::geodesics::{ExplicitGeodesic, Termination};
use crate::geometry::Family;

/// What [`invert_to_geodesic`] reads the logarithmic derivatives from.
#[derive(Clone, Copy)]
pub enum InversionSource<'a> {
    /// `Θ = u'/u` from a solution basis.
    Basis(&'a SolutionBasis),
    Theta(&'a ThetaPair),
}

struct Product {
    point: Complex64,
    dpoint: Complex64,
    p: Complex64,
    dp: Complex64,
}

/// The fibre coordinate recovered from `q² = ∓Θ_top Θ_bot`.
struct Inverted {
    ads: bool,
    real: bool,
    top: SharedCurve,
    bot: SharedCurve,
    from_basis: bool,
    track: RootTrack,
    step: f64,
}

impl Inverted {
    fn log_derivative(&self, u: &dyn CurveFunction, t: f64) -> Option<(CurveSample, Complex64, Complex64)> {
        let s = u.eval(t)?;
        if self.from_basis {
            if s.value.norm() == 0.0 {
                return None;
            }
            let th = s.d1 / s.value;
            Some((s, th, s.d2? / s.value - th * th))
        } else {
            Some((s, s.value, s.d1))
        }
    }

    fn product(&self, t: f64) -> Option<Product> {
        let (s, a, da) = self.log_derivative(self.top.as_ref(), t)?;
        let (_, b, db) = self.log_derivative(self.bot.as_ref(), t)?;
        let sign = if self.ads { 1.0 } else { -1.0 };
        Some(Product {
            point: s.point,
            dpoint: s.dpoint,
            p: sign * a * b,
            dp: sign * (da * b + a * db),
        })
    }

    fn slope(&self, t: f64) -> Option<(Product, Complex64, Complex64)> {
        let pr = self.product(t)?;
        let p = if self.real { Complex64::from(pr.p.re) } else { pr.p };
        let q = self.track.root(t, p);
        let dq = pr.dp / (2.0 * q);
        let dq = if self.real { Complex64::from(dq.re) } else { dq };
        Some((pr, q, dq))
    }
}

impl CurveFunction for Inverted {
    fn domain(&self) -> (f64, f64) {
        self.top.domain()
    }

    fn eval(&self, t: f64) -> Option<CurveSample> {
        let (pr, q, dq) = self.slope(t)?;
        let (lo, hi) = self.domain();
        let h = self.step;
        let at = |x: f64| self.slope(x).map(|v| v.2);
        // Second derivative by differences of the exact slope, one-sided
        // near the ends of the support.
        let d2_param = if t - h >= lo && t + h <= hi {
            (at(t + h)? - at(t - h)?) / (2.0 * h)
        } else if t + 2.0 * h <= hi {
            (-3.0 * dq + 4.0 * at(t + h)? - at(t + 2.0 * h)?) / (2.0 * h)
        } else {
            (3.0 * dq - 4.0 * at(t - h)? + at(t - 2.0 * h)?) / (2.0 * h)
        };
        Some(CurveSample {
            point: pr.point,
            dpoint: pr.dpoint,
            value: q,
            d1: dq,
            d2: Some(d2_param / pr.dpoint),
        })
    }
}

/// Fibre coordinate `q = sqrt(∓Θ_top Θ_bot)` continued from the base point,
/// as an explicit geodesic of `family`.
pub fn invert_to_geodesic(source: InversionSource<'_>, family: Family) -> Result<ExplicitGeodesic, ReconstructError> {
    let (theta, from_basis, top, bot, base) = match source {
        InversionSource::Basis(b) => (&b.theta, true, b.u_top.clone(), b.u_bot.clone(), b.base_param),
        InversionSource::Theta(th) => (th, false, th.top.clone(), th.bot.clone(), th.base_param()),
    };
    let real = family.mode() == Mode::Real;
    let (lo, hi) = top.domain();
    let mut inv = Inverted {
        ads: family.is_ads(),
        real,
        top,
        bot,
        from_basis,
        track: RootTrack::build(&[base], base, |_| Ok(Complex64::from(1.0)))?,
        step: 1e-4 * (hi - lo).max(1e-3),
    };
    let nodes = theta.nodes().to_vec();
    for &t in &nodes {
        if from_basis {
            for u in [&inv.top, &inv.bot] {
                let s = u.eval(t).ok_or(ReconstructError::OutsideSupport(t))?;
                if !(s.value.norm() > 0.0) || !s.value.is_finite() {
                    return Err(ReconstructError::ZeroCrossingOfU(t));
                }
            }
        }
        let p = inv.product(t).ok_or(ReconstructError::OutsideSupport(t))?.p;
        if real && (p.re < -1e-12 * (1.0 + p.norm()) || p.im.abs() > 1e-8 * (1.0 + p.norm())) {
            return Err(ReconstructError::NegativeRadicand(t));
        }
    }
    let track = {
        let probe = &inv;
        RootTrack::build(&nodes, base, |t| {
            let p = probe.product(t).ok_or(ReconstructError::OutsideSupport(t))?.p;
            Ok(if real { Complex64::from(p.re.max(0.0)) } else { p })
        })?
    };
    inv.track = track;
    Ok(ExplicitGeodesic::from_curve(
        family,
        base,
        Arc::new(inv),
        nodes,
        Termination::RangeEnd,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{grid, real_function};
    use crate::geodesics::{integrate_explicit, Support};
    use crate::geometry::GeometrySpec;
    use crate::reconstruct::{reconstruct_basis, theta_from_geodesic, BasisCheck};

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
    fn exponentials_invert_to_unit_fibre() {
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
        let g = invert_to_geodesic(InversionSource::Basis(&b), Family::Hyperbolic).unwrap();
        for x in grid(-1.0, 1.0, 20) {
            let s = g.at(x).unwrap();
            assert!((s.value - c(1.0, 0.0)).norm() < 1e-9);
            assert!(s.d1.norm() < 1e-9);
        }
    }

    #[test]
    fn oscillator_inverts_to_unit_fibre() {
        let spec = GeometrySpec::parse(Family::AntiDeSitterPlus, "1").unwrap();
        let th = theta_from_geodesic(&spec, &constant(Family::AntiDeSitterPlus, 1.0)).unwrap();
        let g = invert_to_geodesic(InversionSource::Theta(&th), Family::AntiDeSitterPlus).unwrap();
        assert!((g.at(0.7).unwrap().value - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn hyperbolic_pair_is_not_an_ads_pair() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "-1").unwrap();
        let th = theta_from_geodesic(&spec, &constant(Family::Hyperbolic, 1.0)).unwrap();
        let err = invert_to_geodesic(InversionSource::Theta(&th), Family::AntiDeSitterPlus).unwrap_err();
        assert!(matches!(err, ReconstructError::NegativeRadicand(_)));
    }

    #[test]
    fn airy_round_trip() {
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
        let back = invert_to_geodesic(InversionSource::Basis(&b), Family::Hyperbolic).unwrap();
        for x in g.fine_grid(3) {
            assert!((back.at(x).unwrap().value - g.at(x).unwrap().value).norm() < 1e-7);
        }
    }
}
