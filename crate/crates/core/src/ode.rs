//! Dormand-Prince 5(4) integrator with continuous output and event
//! location, for small fixed-size real systems.
//!
//! Complex systems are integrated as real systems of twice the size.

/// Butcher tableau and dense-output coefficients.
mod tableau {
    pub const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    pub const A2: [f64; 1] = [0.2];
    pub const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
    pub const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
    pub const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
    pub const A6: [f64; 5] = [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ];
    pub const A7: [f64; 6] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ];
    pub const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    pub const DENSE: [f64; 7] = [
        -12715105075.0 / 11282082432.0,
        0.0,
        87487479700.0 / 32700410799.0,
        -10690763975.0 / 1880347072.0,
        701980252875.0 / 199316789632.0,
        -1453857185.0 / 822651844.0,
        69997945.0 / 29380423.0,
    ];
}

use tableau::*;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: f64,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 200_000,
            h_max: f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OdeStatus {
    /// Reached the requested end point.
    Completed,
    /// The event function reached zero; the solution ends just inside.
    Event,
    /// Step size fell below roundoff level.
    StepSizeUnderflow,
    MaxSteps,
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("right-hand side cannot be evaluated at the initial point")]
    InitialRhs,
}

#[derive(Clone, Copy, Debug)]
struct DenseStep<const D: usize> {
    t0: f64,
    h: f64,
    r: [[f64; D]; 5],
}

impl<const D: usize> DenseStep<D> {
    fn eval(&self, theta: f64) -> [f64; D] {
        let th1 = 1.0 - theta;
        let r = &self.r;
        std::array::from_fn(|i| r[0][i] + theta * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i]))))
    }

    /// Derivative of the interpolant with respect to `t`.
    fn derivative(&self, theta: f64) -> [f64; D] {
        let th1 = 1.0 - theta;
        let r = &self.r;
        std::array::from_fn(|i| {
            let a = r[3][i] + th1 * r[4][i];
            let da = -r[4][i];
            let b = r[2][i] + theta * a;
            let db = a + theta * da;
            let c = r[1][i] + th1 * b;
            let dc = -b + th1 * db;
            (c + theta * dc) / self.h
        })
    }
}

/// Piecewise-polynomial continuous extension of an integration run.
#[derive(Clone, Debug)]
pub struct DenseSolution<const D: usize> {
    t_start: f64,
    t_end: f64,
    y_start: [f64; D],
    steps: Vec<DenseStep<D>>,
    pub status: OdeStatus,
}

impl<const D: usize> DenseSolution<D> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn direction(&self) -> f64 {
        if self.t_end >= self.t_start {
            1.0
        } else {
            -1.0
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.bounds();
        t >= lo && t <= hi
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.t_start.min(self.t_end), self.t_start.max(self.t_end))
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Step boundaries in integration order, including both ends.
    pub fn nodes(&self) -> Vec<f64> {
        let mut v = vec![self.t_start];
        for s in &self.steps {
            let end = s.t0 + s.h;
            if self.direction() * (end - self.t_end) >= 0.0 {
                break;
            }
            v.push(end);
        }
        if self.t_end != self.t_start {
            v.push(self.t_end);
        }
        v
    }

    fn locate(&self, t: f64) -> Option<(&DenseStep<D>, f64)> {
        if !self.contains(t) {
            return None;
        }
        if self.steps.is_empty() {
            return None;
        }
        let dir = self.direction();
        // First step whose end lies at or beyond t.
        let idx = self
            .steps
            .partition_point(|s| dir * (s.t0 + s.h - t) < 0.0)
            .min(self.steps.len() - 1);
        let s = &self.steps[idx];
        Some((s, (t - s.t0) / s.h))
    }

    pub fn eval(&self, t: f64) -> Option<[f64; D]> {
        if self.steps.is_empty() {
            return (t == self.t_start).then_some(self.y_start);
        }
        self.locate(t).map(|(s, th)| s.eval(th))
    }

    pub fn derivative(&self, t: f64) -> Option<[f64; D]> {
        self.locate(t).map(|(s, th)| s.derivative(th))
    }

    pub fn end_state(&self) -> [f64; D] {
        self.eval(self.t_end).unwrap_or(self.y_start)
    }
}

fn finite<const D: usize>(v: &[f64; D]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn combo<const D: usize>(y: &[f64; D], h: f64, coeffs: &[f64], ks: &[[f64; D]]) -> [f64; D] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in coeffs.iter().zip(ks) {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

fn rms<const D: usize>(v: impl Fn(usize) -> f64) -> f64 {
    let s: f64 = (0..D).map(|i| v(i) * v(i)).sum();
    (s / D as f64).sqrt()
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `f` returns `None` where it cannot be evaluated; such steps are rejected
/// and retried with a smaller step. When `event` is given, integration stops
/// where it first reaches zero from above, located by bisection on the
/// continuous extension to `1e-12` in `t`.
pub fn integrate<const D: usize, F, G>(
    mut f: F,
    t0: f64,
    y0: [f64; D],
    t1: f64,
    opts: &OdeOptions,
    event: Option<G>,
) -> Result<DenseSolution<D>, OdeError>
where
    F: FnMut(f64, &[f64; D]) -> Option<[f64; D]>,
    G: Fn(f64, &[f64; D]) -> f64,
{
    let mut sol = DenseSolution {
        t_start: t0,
        t_end: t0,
        y_start: y0,
        steps: Vec::new(),
        status: OdeStatus::Completed,
    };
    let mut eval = |t: f64, y: &[f64; D]| f(t, y).filter(finite);
    let k1 = eval(t0, &y0).ok_or(OdeError::InitialRhs)?;
    if t1 == t0 {
        return Ok(sol);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let h_max = opts.h_max.min(span);
    let scale = |y: &[f64; D], i: usize| opts.atol + opts.rtol * y[i].abs();

    // Initial step size.
    let d0 = rms::<D>(|i| y0[i] / scale(&y0, i));
    let d1 = rms::<D>(|i| k1[i] / scale(&y0, i));
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(h_max);
    let y1 = combo(&y0, dir * h0, &[1.0], &[k1]);
    let mut h = match eval(t0 + dir * h0, &y1) {
        Some(f1) => {
            let d2 = rms::<D>(|i| (f1[i] - k1[i]) / scale(&y0, i)) / h0;
            let der = d1.max(d2);
            let h1 = if der <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / der).powf(0.2)
            };
            (100.0 * h0).min(h1).min(h_max)
        }
        None => h0,
    } * dir;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = k1;
    let mut rejected_last = false;
    let mut n = 0usize;

    loop {
        if n >= opts.max_steps {
            sol.status = OdeStatus::MaxSteps;
            break;
        }
        n += 1;
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            sol.status = OdeStatus::StepSizeUnderflow;
            break;
        }
        let mut last = false;
        if dir * (t + h - t1) >= 0.0 {
            h = t1 - t;
            last = true;
        }

        let stages = (|| {
            let k2 = eval(t + C[1] * h, &combo(&y, h, &A2, &[k1]))?;
            let k3 = eval(t + C[2] * h, &combo(&y, h, &A3, &[k1, k2]))?;
            let k4 = eval(t + C[3] * h, &combo(&y, h, &A4, &[k1, k2, k3]))?;
            let k5 = eval(t + C[4] * h, &combo(&y, h, &A5, &[k1, k2, k3, k4]))?;
            let k6 = eval(t + h, &combo(&y, h, &A6, &[k1, k2, k3, k4, k5]))?;
            let ynew = combo(&y, h, &A7, &[k1, k2, k3, k4, k5, k6]);
            if !finite(&ynew) {
                return None;
            }
            let k7 = eval(t + h, &ynew)?;
            Some(([k1, k2, k3, k4, k5, k6, k7], ynew))
        })();
        let Some((k, ynew)) = stages else {
            h *= 0.25;
            rejected_last = true;
            continue;
        };

        let err = rms::<D>(|i| {
            let mut e = 0.0;
            for s in 0..7 {
                e += E[s] * k[s][i];
            }
            let sk = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            h * e / sk
        });
        if !err.is_finite() {
            h *= 0.25;
            rejected_last = true;
            continue;
        }
        let fac = (0.9 * err.max(1e-300).powf(-0.2)).clamp(0.2, 10.0);
        if err > 1.0 {
            h *= fac.min(1.0);
            rejected_last = true;
            continue;
        }

        let ydiff: [f64; D] = std::array::from_fn(|i| ynew[i] - y[i]);
        let bspl: [f64; D] = std::array::from_fn(|i| h * k[0][i] - ydiff[i]);
        let r5: [f64; D] = std::array::from_fn(|i| {
            let mut acc = 0.0;
            for s in 0..7 {
                acc += DENSE[s] * k[s][i];
            }
            h * acc
        });
        let step = DenseStep {
            t0: t,
            h,
            r: [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k[6][i] - bspl[i]),
                r5,
            ],
        };
        let t_new = if last { t1 } else { t + h };

        if let Some(g) = event.as_ref() {
            let g_new = g(t_new, &ynew);
            if !(g_new > 0.0) {
                // Bisect on the interpolant for the last point still inside.
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                while (hi - lo) * h.abs() > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    let ym = step.eval(mid);
                    if g(t + mid * h, &ym) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                sol.steps.push(step);
                sol.t_end = t + lo * h;
                sol.status = OdeStatus::Event;
                return Ok(sol);
            }
        }

        sol.steps.push(step);
        sol.t_end = t_new;
        t = t_new;
        y = ynew;
        k1 = k[6];
        if last {
            sol.status = OdeStatus::Completed;
            break;
        }
        let grow = if rejected_last { fac.min(1.0) } else { fac };
        rejected_last = false;
        h = (h * grow).abs().min(h_max) * dir;
    }
    Ok(sol)
}

/// Integration without event location.
pub fn integrate_plain<const D: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; D],
    t1: f64,
    opts: &OdeOptions,
) -> Result<DenseSolution<D>, OdeError>
where
    F: FnMut(f64, &[f64; D]) -> Option<[f64; D]>,
{
    integrate(f, t0, y0, t1, opts, None::<fn(f64, &[f64; D]) -> f64>)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_with_dense_output() {
        let sol = integrate_plain(
            |_, y: &[f64; 1]| Some([-y[0]]),
            0.0,
            [1.0],
            3.0,
            &OdeOptions::with_tol(1e-10),
        )
        .unwrap();
        assert_eq!(sol.status, OdeStatus::Completed);
        for k in 0..=30 {
            let t = 0.1 * k as f64;
            let y = sol.eval(t).unwrap()[0];
            assert!((y - (-t).exp()).abs() < 1e-8, "t={t}");
            let dy = sol.derivative(t).unwrap()[0];
            assert!((dy + (-t).exp()).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let sol = integrate_plain(
            |_, y: &[f64; 2]| Some([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            -2.0,
            &OdeOptions::with_tol(1e-11),
        )
        .unwrap();
        let y = sol.eval(-1.3).unwrap();
        assert!((y[0] - (-1.3f64).sin()).abs() < 1e-9);
        assert!(sol.eval(0.5).is_none());
    }

    #[test]
    fn event_stops_at_crossing() {
        // y = 1 - t reaches 0.25 at t = 0.75.
        let sol = integrate(
            |_, _: &[f64; 1]| Some([-1.0]),
            0.0,
            [1.0],
            5.0,
            &OdeOptions::with_tol(1e-9),
            Some(|_: f64, y: &[f64; 1]| y[0] - 0.25),
        )
        .unwrap();
        assert_eq!(sol.status, OdeStatus::Event);
        assert!((sol.t_end() - 0.75).abs() < 1e-11);
    }

    #[test]
    fn blow_up_underflows() {
        // y' = y², y(0) = 1 blows up at t = 1.
        let sol = integrate_plain(
            |_, y: &[f64; 1]| Some([y[0] * y[0]]),
            0.0,
            [1.0],
            2.0,
            &OdeOptions::with_tol(1e-10),
        )
        .unwrap();
        assert_ne!(sol.status, OdeStatus::Completed);
        assert!(sol.t_end() < 1.0 && sol.t_end() > 0.99);
    }
}
