use num_complex::Complex64;

use super::{GeodesicError, GeodesicState, Termination};
use crate::geometry::{
    check_domain, christoffel_at, metric_at, ChartPoint, ChristoffelValue, Family, GeometrySpec, Method,
};
use crate::ode::{integrate, DenseSolution, OdeOptions, OdeStatus};

#[derive(Clone, Debug)]
pub(crate) enum Dense {
    Real2(DenseSolution<4>),
    Wide(DenseSolution<8>),
}

/// Affine-parameter geodesic with its continuous extension.
#[derive(Clone, Debug)]
pub struct GeodesicTrajectory {
    pub(crate) family: Family,
    pub(crate) spec: GeometrySpec,
    pub(crate) method: Method,
    pub(crate) dense: Dense,
    samples: Vec<GeodesicState>,
    termination: Termination,
}

impl GeodesicTrajectory {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn samples(&self) -> &[GeodesicState] {
        &self.samples
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn s_range(&self) -> (f64, f64) {
        match &self.dense {
            Dense::Real2(d) => d.bounds(),
            Dense::Wide(d) => d.bounds(),
        }
    }

    pub fn state_at(&self, s: f64) -> Option<GeodesicState> {
        match &self.dense {
            Dense::Real2(d) => d.eval(s).map(|y| unpack4(y, s)),
            Dense::Wide(d) => d.eval(s).map(|y| unpack8(self.family, y, s)),
        }
    }
}

fn unpack4(y: [f64; 4], s: f64) -> GeodesicState {
    GeodesicState {
        coords: ChartPoint::Real2([y[0], y[1]]),
        velocity: ChartPoint::Real2([y[2], y[3]]),
        s,
    }
}

fn unpack8(family: Family, y: [f64; 8], s: f64) -> GeodesicState {
    if family == Family::KahlerNorden {
        GeodesicState {
            coords: ChartPoint::Real4([y[0], y[1], y[2], y[3]]),
            velocity: ChartPoint::Real4([y[4], y[5], y[6], y[7]]),
            s,
        }
    } else {
        let c = |a: usize| Complex64::new(y[a], y[a + 1]);
        GeodesicState {
            coords: ChartPoint::Complex2([c(0), c(2)]),
            velocity: ChartPoint::Complex2([c(4), c(6)]),
            s,
        }
    }
}

/// Distance to the guard band; positive inside the domain. `sign0` fixes
/// the side of the real singular curve the geodesic started on.
fn margin(spec: &GeometrySpec, p: &ChartPoint, sign0: f64) -> f64 {
    let g = spec.guard();
    match (spec.family(), p) {
        (Family::Hyperbolic, ChartPoint::Real2([x, q])) => match spec.h_real(*x) {
            Ok(h) => (q - g).min(sign0 * (q * q - h.value) - g),
            Err(_) => -1.0,
        },
        (_, ChartPoint::Real2([x, q])) => match spec.h_real(*x) {
            Ok(h) => (q - g).min(sign0 * (q * q + h.value) - g),
            Err(_) => -1.0,
        },
        (_, ChartPoint::Complex2([z, q])) => match spec.h_complex(*z) {
            Ok(h) => (q.norm() - g).min((q * q - h.value).norm() - g),
            Err(_) => -1.0,
        },
        (_, ChartPoint::Real4([x, phi, y, psi])) => match spec.h_complex(Complex64::new(*x, *y)) {
            Ok(h) => {
                let w = Complex64::new(*phi, *psi);
                (phi * phi + psi * psi - g).min((h.value - w * w).norm() - g)
            }
            Err(_) => -1.0,
        },
    }
}

fn start_sign(spec: &GeometrySpec, p: &ChartPoint) -> f64 {
    if let ChartPoint::Real2([x, q]) = p {
        if let Ok(h) = spec.h_real(*x) {
            let v = match spec.family() {
                Family::Hyperbolic => q * q - h.value,
                _ => q * q + h.value,
            };
            return v.signum();
        }
    }
    1.0
}

fn status(st: OdeStatus, reached: f64) -> Result<Termination, GeodesicError> {
    match st {
        OdeStatus::Completed => Ok(Termination::RangeEnd),
        OdeStatus::Event => Ok(Termination::DomainBoundary),
        OdeStatus::StepSizeUnderflow => Err(GeodesicError::StepSizeUnderflow { reached }),
        OdeStatus::MaxSteps => Err(GeodesicError::MaxSteps { reached }),
    }
}

/// `g(v, v)` at a state; complex for the complex family.
pub fn speed_squared(spec: &GeometrySpec, state: &GeodesicState) -> Result<Complex64, GeodesicError> {
    let g = metric_at(spec, &state.coords)?.components;
    let v: Vec<Complex64> = match state.velocity {
        ChartPoint::Real2(v) => v.iter().map(|&a| a.into()).collect(),
        ChartPoint::Complex2(v) => v.to_vec(),
        ChartPoint::Real4(v) => v.iter().map(|&a| a.into()).collect(),
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..v.len() {
        for j in 0..v.len() {
            acc += g.get(i, j) * v[i] * v[j];
        }
    }
    Ok(acc)
}

/// `(ς̇, −Γ(ς̇, ς̇))` for a real 2D state `(x, q, ẋ, q̇)`.
pub(crate) fn field4(spec: &GeometrySpec, method: Method, y: &[f64; 4]) -> Option<[f64; 4]> {
    let p = ChartPoint::Real2([y[0], y[1]]);
    let ChristoffelValue::Real2(g) = christoffel_at(spec, &p, method).ok()? else {
        return None;
    };
    let v = [y[2], y[3]];
    let acc = |i: usize| {
        -(0..2)
            .flat_map(|j| (0..2).map(move |k| (j, k)))
            .map(|(j, k)| g[i][j][k] * v[j] * v[k])
            .sum::<f64>()
    };
    Some([v[0], v[1], acc(0), acc(1)])
}

/// The same for eight real components: `(z, 𝔛, ż, 𝔛̇)` split into real and
/// imaginary parts for the complex family, `(x, Φ, y, Ψ)` and velocities
/// for Kähler-Norden.
pub(crate) fn field8(spec: &GeometrySpec, method: Method, y: &[f64; 8]) -> Option<[f64; 8]> {
    if spec.family() == Family::KahlerNorden {
        let p = ChartPoint::Real4([y[0], y[1], y[2], y[3]]);
        let ChristoffelValue::Real4(g) = christoffel_at(spec, &p, method).ok()? else {
            return None;
        };
        let v = [y[4], y[5], y[6], y[7]];
        let mut out = [0.0; 8];
        out[..4].copy_from_slice(&v);
        for i in 0..4 {
            let mut a = 0.0;
            for j in 0..4 {
                for k in 0..4 {
                    a -= g[i][j][k] * v[j] * v[k];
                }
            }
            out[4 + i] = a;
        }
        return Some(out);
    }
    let z = Complex64::new(y[0], y[1]);
    let q = Complex64::new(y[2], y[3]);
    let v = [Complex64::new(y[4], y[5]), Complex64::new(y[6], y[7])];
    let ChristoffelValue::Complex2(g) = christoffel_at(spec, &ChartPoint::Complex2([z, q]), method).ok()? else {
        return None;
    };
    let mut acc = [Complex64::new(0.0, 0.0); 2];
    for (i, a) in acc.iter_mut().enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                *a -= g[i][j][k] * v[j] * v[k];
            }
        }
    }
    Some([
        v[0].re, v[0].im, v[1].re, v[1].im, acc[0].re, acc[0].im, acc[1].re, acc[1].im,
    ])
}

/// [`integrate_geodesic_with`] using closed-form Christoffel symbols.
pub fn integrate_geodesic(
    spec: &GeometrySpec,
    initial: &GeodesicState,
    s_span: (f64, f64),
    tol: f64,
) -> Result<GeodesicTrajectory, GeodesicError> {
    integrate_geodesic_with(spec, initial, s_span, tol, Method::ClosedForm)
}

/// Integrate `ς̈^i + Γ^i_jk ς̇^j ς̇^k = 0` from `s_span.0` (where the state
/// is `initial`) to `s_span.1`, stopping at the guard band of the domain.
pub fn integrate_geodesic_with(
    spec: &GeometrySpec,
    initial: &GeodesicState,
    s_span: (f64, f64),
    tol: f64,
    method: Method,
) -> Result<GeodesicTrajectory, GeodesicError> {
    if !(tol > 0.0) {
        return Err(GeodesicError::InvalidInput("tolerance must be positive".into()));
    }
    if !(s_span.1 > s_span.0) {
        return Err(GeodesicError::InvalidInput("affine range must be increasing".into()));
    }
    check_domain(spec, &initial.coords)?;
    let sign0 = start_sign(spec, &initial.coords);
    let opts = OdeOptions::with_tol(tol);
    let (s0, s1) = s_span;

    let (dense, termination) = match (initial.coords, initial.velocity) {
        (ChartPoint::Real2(c), ChartPoint::Real2(v)) => {
            let rhs = |_s: f64, y: &[f64; 4]| field4(spec, method, y);
            let ev = |_s: f64, y: &[f64; 4]| margin(spec, &ChartPoint::Real2([y[0], y[1]]), sign0);
            let sol = integrate(rhs, s0, [c[0], c[1], v[0], v[1]], s1, &opts, Some(ev))
                .map_err(|_| GeodesicError::StartOnSingularSet("symbols undefined".into()))?;
            let t = status(sol.status, sol.t_end())?;
            (Dense::Real2(sol), t)
        }
        (ChartPoint::Complex2(c), ChartPoint::Complex2(v)) => {
            let rhs = |_s: f64, y: &[f64; 8]| field8(spec, method, y);
            let ev = |_s: f64, y: &[f64; 8]| {
                let p = ChartPoint::Complex2([Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])]);
                margin(spec, &p, sign0)
            };
            let y0 = [c[0].re, c[0].im, c[1].re, c[1].im, v[0].re, v[0].im, v[1].re, v[1].im];
            let sol = integrate(rhs, s0, y0, s1, &opts, Some(ev))
                .map_err(|_| GeodesicError::StartOnSingularSet("symbols undefined".into()))?;
            let t = status(sol.status, sol.t_end())?;
            (Dense::Wide(sol), t)
        }
        (ChartPoint::Real4(c), ChartPoint::Real4(v)) => {
            let rhs = |_s: f64, y: &[f64; 8]| field8(spec, method, y);
            let ev = |_s: f64, y: &[f64; 8]| margin(spec, &ChartPoint::Real4([y[0], y[1], y[2], y[3]]), sign0);
            let y0 = [c[0], c[1], c[2], c[3], v[0], v[1], v[2], v[3]];
            let sol = integrate(rhs, s0, y0, s1, &opts, Some(ev))
                .map_err(|_| GeodesicError::StartOnSingularSet("symbols undefined".into()))?;
            let t = status(sol.status, sol.t_end())?;
            (Dense::Wide(sol), t)
        }
        _ => {
            return Err(GeodesicError::InvalidInput(
                "position and velocity must use the same chart".into(),
            ))
        }
    };

    let family = spec.family();
    let samples = match &dense {
        Dense::Real2(d) => d
            .nodes()
            .into_iter()
            .map(|s| unpack4(d.eval(s).unwrap_or([f64::NAN; 4]), s))
            .collect(),
        Dense::Wide(d) => d
            .nodes()
            .into_iter()
            .map(|s| unpack8(family, d.eval(s).unwrap_or([f64::NAN; 8]), s))
            .collect(),
    };
    Ok(GeodesicTrajectory {
        family,
        spec: spec.clone(),
        method,
        dense,
        samples,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_fibre_for_h_minus_one() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "-1").unwrap();
        let init = GeodesicState {
            coords: ChartPoint::real(0.0, 1.0),
            velocity: ChartPoint::real(1.0, 0.0),
            s: 0.0,
        };
        let traj = integrate_geodesic(&spec, &init, (0.0, 3.0), 1e-10).unwrap();
        assert_eq!(traj.termination(), Termination::RangeEnd);
        for st in traj.samples() {
            let ChartPoint::Real2([x, q]) = st.coords else { panic!() };
            assert!((q - 1.0).abs() < 1e-12);
            assert!((x - st.s).abs() < 1e-10);
        }
    }

    #[test]
    fn speed_is_conserved() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "sin(x) + 3").unwrap();
        let init = GeodesicState {
            coords: ChartPoint::real(0.1, 2.5),
            velocity: ChartPoint::real(0.4, -0.3),
            s: 0.0,
        };
        let traj = integrate_geodesic(&spec, &init, (0.0, 2.0), 1e-11).unwrap();
        let v0 = speed_squared(&spec, &traj.samples()[0]).unwrap();
        for st in traj.samples() {
            let v = speed_squared(&spec, st).unwrap();
            assert!((v - v0).norm() <= 1e-6 * v0.norm(), "{v} vs {v0}");
        }
    }

    #[test]
    fn stops_at_domain_boundary() {
        // Φ decreases linearly toward Φ = 1 where Φ² = h.
        let spec = GeometrySpec::parse(Family::Hyperbolic, "1").unwrap();
        let init = GeodesicState {
            coords: ChartPoint::real(0.0, 2.0),
            velocity: ChartPoint::real(0.0, -1.0),
            s: 0.0,
        };
        let traj = integrate_geodesic(&spec, &init, (0.0, 10.0), 1e-10).unwrap();
        assert_eq!(traj.termination(), Termination::DomainBoundary);
        let last = traj.samples().last().unwrap();
        let ChartPoint::Real2([_, q]) = last.coords else {
            panic!()
        };
        assert!(q > 1.0 && q - 1.0 < 1e-6, "q = {q}");
    }
}
