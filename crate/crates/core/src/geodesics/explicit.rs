use std::sync::Arc;

use num_complex::Complex64;

use super::affine::{field4, field8, Dense, GeodesicTrajectory};
use super::{ComplexPath, ExplicitGeodesic, GeodesicError, Termination};
use crate::curve::{CurveFunction, CurveSample};
use crate::geometry::{Family, GeometrySpec, Method};
use crate::jet::Jet2;
use crate::ode::{integrate, DenseSolution, OdeOptions, OdeStatus};
use crate::scalar::Scalar;

/// Right-hand side of the explicit-form geodesic equation, `q''` in terms
/// of `h`, `h'`, `q` and `q'`.
///
/// Hyperbolic and complex families:
/// `q'' = (3q²+h)/(q²−h)·q'²/q − h'q'/(q²−h) + (q⁴−h²)/q`.
/// (Anti-)de Sitter:
/// `q'' = (3q²−h)/(q²+h)·q'²/q + h'q'/(q²+h) − (q⁴−h²)/q`.
pub fn explicit_second<S: Scalar>(family: Family, h: Jet2<S>, q: S, dq: S) -> S {
    let q2 = q * q;
    let (hv, hp) = (h.value, h.d1);
    let three = S::constant(3.0);
    let tail = (q2 * q2 - hv * hv) / q;
    if family.is_ads() {
        let den = q2 + hv;
        (three * q2 - hv) / den * dq * dq / q + hp * dq / den - tail
    } else {
        let den = q2 - hv;
        (three * q2 + hv) / den * dq * dq / q - hp * dq / den + tail
    }
}

/// Where an explicit geodesic is to be integrated.
#[derive(Clone, Debug)]
pub enum Support {
    /// Real families: the interval `[lo, hi]` containing the base point `x0`.
    Interval { x0: f64, lo: f64, hi: f64 },
    /// Complex family: a path starting at the base point.
    Path(ComplexPath),
}

fn real_margin(spec: &GeometrySpec, family: Family, x: f64, q: f64, sign0: f64) -> f64 {
    let g = spec.guard();
    match spec.h_real(x) {
        Ok(h) => {
            let d = if family.is_ads() {
                q * q + h.value
            } else {
                q * q - h.value
            };
            (q - g).min(sign0 * d - g)
        }
        Err(_) => -1.0,
    }
}

fn complex_margin(spec: &GeometrySpec, z: Complex64, q: Complex64) -> f64 {
    let g = spec.guard();
    match spec.h_complex(z) {
        Ok(h) => (q.norm() - g).min((q * q - h.value).norm() - g),
        Err(_) => -1.0,
    }
}

struct RealExplicit {
    x0: f64,
    lo: f64,
    hi: f64,
    start: [f64; 2],
    forward: Option<DenseSolution<2>>,
    backward: Option<DenseSolution<2>>,
}

impl CurveFunction for RealExplicit {
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn eval(&self, x: f64) -> Option<CurveSample> {
        if !self.contains(x) {
            return None;
        }
        let branch = if x > self.x0 { &self.forward } else { &self.backward };
        let branch = branch.as_ref().or(self.forward.as_ref()).or(self.backward.as_ref());
        let (y, d2) = match branch {
            Some(sol) => (sol.eval(x)?, sol.derivative(x).map(|d| d[1].into())),
            None => (self.start, None),
        };
        Some(CurveSample {
            point: x.into(),
            dpoint: 1.0.into(),
            value: y[0].into(),
            d1: y[1].into(),
            d2,
        })
    }
}

struct PathExplicit {
    path: ComplexPath,
    segments: Vec<DenseSolution<4>>,
    s_end: f64,
}

impl CurveFunction for PathExplicit {
    fn domain(&self) -> (f64, f64) {
        (0.0, self.s_end)
    }

    fn eval(&self, s: f64) -> Option<CurveSample> {
        if !self.contains(s) {
            return None;
        }
        let mut k = self.path.segment_of(s).min(self.segments.len() - 1);
        if !self.segments[k].contains(s) && k > 0 {
            k -= 1;
        }
        let sol = &self.segments[k];
        let y = sol.eval(s)?;
        let dz = self.path.velocity_in(k);
        let d2 = sol.derivative(s).map(|d| Complex64::new(d[2], d[3]) / dz);
        Some(CurveSample {
            point: self.path.point_in(k, s),
            dpoint: dz,
            value: Complex64::new(y[0], y[1]),
            d1: Complex64::new(y[2], y[3]),
            d2,
        })
    }
}

fn underflow(st: OdeStatus, reached: f64) -> Result<Termination, GeodesicError> {
    match st {
        OdeStatus::Completed => Ok(Termination::RangeEnd),
        OdeStatus::Event => Ok(Termination::DomainBoundary),
        OdeStatus::StepSizeUnderflow => Err(GeodesicError::StepSizeUnderflow { reached }),
        OdeStatus::MaxSteps => Err(GeodesicError::MaxSteps { reached }),
    }
}

/// Integrate the explicit-form geodesic equation from `(value0, slope0)` at
/// the base point over `support`. Real families take real initial data.
pub fn integrate_explicit(
    spec: &GeometrySpec,
    value0: Complex64,
    slope0: Complex64,
    support: &Support,
    tol: f64,
) -> Result<ExplicitGeodesic, GeodesicError> {
    if !(tol > 0.0) {
        return Err(GeodesicError::InvalidInput("tolerance must be positive".into()));
    }
    let family = spec.family();
    let opts = OdeOptions::with_tol(tol);
    match (family, support) {
        (Family::ComplexSphere | Family::KahlerNorden, Support::Path(path)) => {
            let z0 = path.start();
            if complex_margin(spec, z0, value0) <= 0.0 {
                return Err(GeodesicError::StartOnSingularSet(format!("𝔛 = {value0} at z = {z0}")));
            }
            let mut state = [value0.re, value0.im, slope0.re, slope0.im];
            let mut segments = Vec::new();
            let mut termination = Termination::RangeEnd;
            let mut s_end = 0.0;
            let mut nodes = Vec::new();
            for k in 0..path.segments() {
                let (a, b) = path.segment_range(k);
                let dz = path.velocity_in(k);
                let rhs = |s: f64, y: &[f64; 4]| {
                    let z = path.point_in(k, s);
                    let q = Complex64::new(y[0], y[1]);
                    let dq = Complex64::new(y[2], y[3]);
                    let h = spec.h_complex(z).ok()?;
                    let ddq = explicit_second(Family::ComplexSphere, h, q, dq);
                    let (v1, v2) = (dq * dz, ddq * dz);
                    Some([v1.re, v1.im, v2.re, v2.im])
                };
                let ev = |s: f64, y: &[f64; 4]| complex_margin(spec, path.point_in(k, s), Complex64::new(y[0], y[1]));
                let sol = integrate(rhs, a, state, b, &opts, Some(ev))
                    .map_err(|_| GeodesicError::StartOnSingularSet(format!("segment {k}")))?;
                let t = underflow(sol.status, sol.t_end())?;
                s_end = sol.t_end();
                state = sol.end_state();
                nodes.extend(sol.nodes());
                segments.push(sol);
                if t != Termination::RangeEnd {
                    termination = t;
                    break;
                }
            }
            let curve = PathExplicit {
                path: path.clone(),
                segments,
                s_end,
            };
            Ok(ExplicitGeodesic::from_curve(
                family,
                0.0,
                Arc::new(curve),
                nodes,
                termination,
            ))
        }
        (Family::ComplexSphere | Family::KahlerNorden, _) => Err(GeodesicError::InvalidInput(
            "complex explicit geodesics are integrated along a path".into(),
        )),
        (_, Support::Interval { x0, lo, hi }) => {
            let (x0, lo, hi) = (*x0, *lo, *hi);
            if !(lo <= x0 && x0 <= hi) {
                return Err(GeodesicError::InvalidInput("base point outside the interval".into()));
            }
            if value0.im != 0.0 || slope0.im != 0.0 {
                return Err(GeodesicError::InvalidInput(
                    "real families take real initial data".into(),
                ));
            }
            let (q0, dq0) = (value0.re, slope0.re);
            let h0 = spec.h_real(x0)?.value;
            let d0 = if family.is_ads() { q0 * q0 + h0 } else { q0 * q0 - h0 };
            let sign0 = d0.signum();
            if real_margin(spec, family, x0, q0, sign0) <= 0.0 {
                return Err(GeodesicError::StartOnSingularSet(format!("value {q0} at x = {x0}")));
            }
            let rhs = |x: f64, y: &[f64; 2]| {
                let h = spec.h_real(x).ok()?;
                Some([y[1], explicit_second(family, h, y[0], y[1])])
            };
            let ev = |x: f64, y: &[f64; 2]| real_margin(spec, family, x, y[0], sign0);
            let run = |to: f64| -> Result<Option<DenseSolution<2>>, GeodesicError> {
                if to == x0 {
                    return Ok(None);
                }
                integrate(rhs, x0, [q0, dq0], to, &opts, Some(ev))
                    .map(Some)
                    .map_err(|_| GeodesicError::StartOnSingularSet(format!("x = {x0}")))
            };
            let forward = run(hi)?;
            let backward = run(lo)?;
            let mut termination = Termination::RangeEnd;
            let mut nodes = vec![x0];
            let (mut a, mut b) = (x0, x0);
            for sol in [&forward, &backward].into_iter().flatten() {
                let t = underflow(sol.status, sol.t_end())?;
                if t != Termination::RangeEnd {
                    termination = t;
                }
                let (l, r) = sol.bounds();
                a = a.min(l);
                b = b.max(r);
                nodes.extend(sol.nodes());
            }
            let curve = RealExplicit {
                x0,
                lo: a,
                hi: b,
                start: [q0, dq0],
                forward,
                backward,
            };
            Ok(ExplicitGeodesic::from_curve(
                family,
                x0,
                Arc::new(curve),
                nodes,
                termination,
            ))
        }
        (_, Support::Path(_)) => Err(GeodesicError::InvalidInput(
            "real families are integrated over an interval".into(),
        )),
    }
}

/// Explicit form of a real 2D trajectory, parametrised by `x`.
struct RealFromTrajectory {
    sol: DenseSolution<4>,
    spec: GeometrySpec,
    method: Method,
    s_lo: f64,
    s_hi: f64,
    x_lo: f64,
    x_hi: f64,
    increasing: bool,
}

impl RealFromTrajectory {
    fn s_of(&self, x: f64) -> f64 {
        let (mut a, mut b) = (self.s_lo, self.s_hi);
        let xs = |s: f64| self.sol.eval(s).map(|y| y[0]).unwrap_or(f64::NAN);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if (xs(m) < x) == self.increasing {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

impl CurveFunction for RealFromTrajectory {
    fn domain(&self) -> (f64, f64) {
        (self.x_lo, self.x_hi)
    }

    fn eval(&self, x: f64) -> Option<CurveSample> {
        if !self.contains(x) {
            return None;
        }
        let s = self.s_of(x);
        let y = self.sol.eval(s)?;
        let a = field4(&self.spec, self.method, &y)?;
        let (vx, vq, ax, aq) = (y[2], y[3], a[2], a[3]);
        Some(CurveSample {
            point: x.into(),
            dpoint: 1.0.into(),
            value: y[1].into(),
            d1: (vq / vx).into(),
            d2: Some(((aq * vx - vq * ax) / (vx * vx * vx)).into()),
        })
    }
}

/// Explicit form of a complex-valued trajectory, parametrised by the affine
/// parameter, with `z(s)` as the chart variable.
struct ComplexFromTrajectory {
    sol: DenseSolution<8>,
    spec: GeometrySpec,
    method: Method,
    s_lo: f64,
    s_hi: f64,
    /// Positions of (Re z, Im z, Re 𝔛, Im 𝔛) in position and velocity blocks.
    idx: [usize; 4],
}

impl ComplexFromTrajectory {
    fn split(&self, y: &[f64; 8], off: usize) -> (Complex64, Complex64) {
        let [zr, zi, qr, qi] = self.idx;
        (
            Complex64::new(y[off + zr], y[off + zi]),
            Complex64::new(y[off + qr], y[off + qi]),
        )
    }
}

impl CurveFunction for ComplexFromTrajectory {
    fn domain(&self) -> (f64, f64) {
        (self.s_lo, self.s_hi)
    }

    fn eval(&self, s: f64) -> Option<CurveSample> {
        if !self.contains(s) {
            return None;
        }
        let y = self.sol.eval(s)?;
        let a = field8(&self.spec, self.method, &y)?;
        let (z, q) = self.split(&y, 0);
        let (vz, vq) = self.split(&y, 4);
        let (az, aq) = self.split(&a, 4);
        Some(CurveSample {
            point: z,
            dpoint: vz,
            value: q,
            d1: vq / vz,
            d2: Some((aq * vz - vq * az) / (vz * vz * vz)),
        })
    }
}

/// Last parameter value before `speed` drops below `floor`, scanning nodes
/// and bisecting on the continuous extension.
fn turning_cut(nodes: &[f64], speed: impl Fn(f64) -> f64, floor: f64) -> Option<f64> {
    for w in nodes.windows(2) {
        if !(speed(w[1]) > floor) {
            let (mut a, mut b) = (w[0], w[1]);
            while b - a > 1e-12 {
                let m = 0.5 * (a + b);
                if speed(m) > floor {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(a);
        }
    }
    None
}

/// Eliminate the affine parameter: the fibre coordinate as a function of
/// the base coordinate, truncated where the base velocity vanishes.
pub fn explicit_from_trajectory(traj: &GeodesicTrajectory) -> Result<ExplicitGeodesic, GeodesicError> {
    let (s_lo, s_hi) = traj.s_range();
    match &traj.dense {
        Dense::Real2(sol) => {
            let y0 = sol.eval(s_lo).ok_or(GeodesicError::OutsideSupport(s_lo))?;
            let vx0 = y0[2];
            if vx0 == 0.0 || vx0.abs() <= 1e-12 * y0[3].abs() {
                return Err(GeodesicError::TurningPointAtStart);
            }
            let sign = vx0.signum();
            let floor = 1e-6 * vx0.abs();
            let speed = |s: f64| sol.eval(s).map(|y| sign * y[2]).unwrap_or(f64::NAN);
            let cut = turning_cut(&sol.nodes(), speed, floor);
            let s_end = cut.unwrap_or(s_hi);
            let x_a = y0[0];
            let x_b = sol.eval(s_end).map(|y| y[0]).unwrap_or(x_a);
            let mut nodes: Vec<f64> = sol
                .nodes()
                .into_iter()
                .filter(|&s| s <= s_end)
                .filter_map(|s| sol.eval(s).map(|y| y[0]))
                .collect();
            nodes.push(x_b);
            let curve = RealFromTrajectory {
                sol: sol.clone(),
                spec: traj.spec.clone(),
                method: traj.method,
                s_lo,
                s_hi: s_end,
                x_lo: x_a.min(x_b),
                x_hi: x_a.max(x_b),
                increasing: sign > 0.0,
            };
            let termination = if cut.is_some() {
                Termination::TurningPoint
            } else {
                traj.termination()
            };
            Ok(ExplicitGeodesic::from_curve(
                traj.family(),
                x_a,
                Arc::new(curve),
                nodes,
                termination,
            ))
        }
        Dense::Wide(sol) => {
            let idx = if traj.family() == Family::KahlerNorden {
                [0, 2, 1, 3]
            } else {
                [0, 1, 2, 3]
            };
            let y0 = sol.eval(s_lo).ok_or(GeodesicError::OutsideSupport(s_lo))?;
            let vz0 = Complex64::new(y0[4 + idx[0]], y0[4 + idx[1]]);
            if vz0.norm() == 0.0 {
                return Err(GeodesicError::TurningPointAtStart);
            }
            let floor = 1e-6 * vz0.norm();
            let speed = |s: f64| {
                sol.eval(s)
                    .map(|y| Complex64::new(y[4 + idx[0]], y[4 + idx[1]]).norm())
                    .unwrap_or(f64::NAN)
            };
            let cut = turning_cut(&sol.nodes(), speed, floor);
            let s_end = cut.unwrap_or(s_hi);
            let mut nodes: Vec<f64> = sol.nodes().into_iter().filter(|&s| s <= s_end).collect();
            nodes.push(s_end);
            let curve = ComplexFromTrajectory {
                sol: sol.clone(),
                spec: traj.spec.clone(),
                method: traj.method,
                s_lo,
                s_hi: s_end,
                idx,
            };
            let termination = if cut.is_some() {
                Termination::TurningPoint
            } else {
                traj.termination()
            };
            Ok(ExplicitGeodesic::from_curve(
                traj.family(),
                s_lo,
                Arc::new(curve),
                nodes,
                termination,
            ))
        }
    }
}

/// `q'' − RHS` of the explicit-form geodesic equation at parameter `t`.
pub fn geodesic_residual(spec: &GeometrySpec, g: &ExplicitGeodesic, t: f64) -> Result<Complex64, GeodesicError> {
    let s = g.at(t).ok_or(GeodesicError::OutsideSupport(t))?;
    let d2 = s.d2.ok_or(GeodesicError::NoSecondDerivative(t))?;
    let h = if spec.family().mode() == crate::expr::Mode::Complex {
        spec.h_complex(s.point)?
    } else {
        spec.h_real(s.point.re)?.map(Complex64::from)
    };
    Ok(d2 - explicit_second(g.family(), h, s.value, s.d1))
}
