use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::report::{Record, Table};
use super::scenario::{Job, PlaneData, SolveData, Task};
use crate::curve::{grid, real_function, CurveFunction};
use crate::geodesics::{
    explicit_from_trajectory, geodesic_residual, integrate_explicit, integrate_geodesic, integrate_geodesic_with,
    speed_squared, ComplexPath, ExplicitGeodesic, GeodesicError, GeodesicState, GeodesicTrajectory, Support,
    Termination,
};
use crate::geometry::{curvature_at, ChartPoint, Family, GeometrySpec, Method, Signature};
use crate::kahler_norden::{
    cauchy_riemann_residual, kn_christoffel_correspondence, kn_einstein, kn_geodesic_split, kn_metric_consistency,
    kn_sectional_range, kn_submanifold_check, KnPoint, Submanifold, SPLIT_BASIS_TOL, SPLIT_TOL,
};
use crate::ode::{integrate_plain, DenseSolution, OdeOptions, OdeStatus};
use crate::reconstruct::{
    h_at, invert_to_geodesic, ode_residual, path_independence_check, reconstruct_basis, riccati_curve,
    riccati_residual, riccati_solution_is_geodesic, BasisCheck, InversionSource, SolutionBasis,
};
use crate::sampling::{random_points, Bounds};

const INTEGRATION_TOL: f64 = 1e-12;
const CHECK_POINTS: usize = 400;
const METRIC_CONSISTENCY_TOL: f64 = 1e-10;
const CHRISTOFFEL_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 1e-8;
const CAUCHY_RIEMANN_TOL: f64 = 1e-8;
const CAUCHY_RIEMANN_STEP: f64 = 1e-3;
const PRODUCT_TOL: f64 = 1e-9;
const WRONSKIAN_TOL: f64 = 1e-6;
const ROUND_TRIP_TOL: f64 = 1e-7;
const SHARED_TRAJECTORY_TOL: f64 = 1e-10;
const SUBMANIFOLD_TOL: f64 = 1e-9;
const SECTIONAL_SPREAD: f64 = 0.1;

pub struct Outcome {
    pub records: Vec<Record>,
    pub table: Option<Table>,
}

pub fn run(job: &Job) -> Outcome {
    match &job.task {
        Task::Curvature { points } => curvature(job, *points),
        Task::Geodesic { initial, s_span } => geodesic(job, initial, *s_span),
        Task::Solve {
            data,
            coefficients,
            path_b,
            path_tol,
        } => solve(job, data, coefficients, path_b.as_ref(), *path_tol),
        Task::Riccati { x0, theta0, span, mode } => riccati(job, *x0, *theta0, *span, *mode),
        Task::KnVerify {
            points,
            split,
            hyperbolic,
            ads,
            s_span,
        } => kn_verify(job, *points, split.as_ref(), hyperbolic.as_ref(), ads.as_ref(), *s_span),
    }
}

/// Running maximum with NaN treated as the worst value.
fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn sample(spec: &GeometrySpec, n: usize, seed: u64) -> Result<Vec<ChartPoint>, String> {
    let pts = random_points(spec, n, seed, Bounds::default());
    if pts.len() < n {
        return Err(format!(
            "only {} of {n} domain points found in the default bounds",
            pts.len()
        ));
    }
    Ok(pts)
}

fn curvature(job: &Job, n: usize) -> Outcome {
    let spec = &job.spec;
    let tol = job.scenario.tol;
    let pts = match sample(spec, n, job.scenario.seed) {
        Ok(p) => p,
        Err(e) => {
            return Outcome {
                records: vec![Record::failed("domain sampling", tol, e)],
                table: None,
            }
        }
    };
    let family = spec.family();
    // [K, Ricci, η, fit, scalar, metric construction]
    let per_point: Vec<Result<[f64; 6], String>> = pts
        .par_iter()
        .map(|p| {
            let r = curvature_at(spec, p).map_err(|e| e.to_string())?;
            if family == Family::KahlerNorden {
                let ChartPoint::Real4([x, phi, y, psi]) = *p else {
                    unreachable!()
                };
                let kp = KnPoint { x, phi, y, psi };
                let consistency = kn_metric_consistency(spec, &kp).map_err(|e| e.to_string())?;
                let eta = r.einstein_eta.unwrap_or(f64::NAN);
                let fit = r.einstein_residual.unwrap_or(f64::NAN);
                return Ok([
                    0.0,
                    0.0,
                    (eta + 2.0).abs(),
                    fit,
                    (r.ricci_scalar.re + 8.0).abs(),
                    consistency,
                ]);
            }
            let k_expected = if family == Family::AntiDeSitterMinus { 1.0 } else { -1.0 };
            let k = (r.sectional_or_holomorphic_k - k_expected).norm();
            let mut ricci: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    ricci = worst(ricci, (r.ricci.get(i, j) - k_expected * r.metric.get(i, j)).norm());
                }
            }
            Ok([k, ricci, 0.0, 0.0, 0.0, 0.0])
        })
        .collect();
    let mut m = [0.0f64; 6];
    for r in &per_point {
        match r {
            Ok(v) => {
                for i in 0..6 {
                    m[i] = worst(m[i], v[i]);
                }
            }
            Err(e) => {
                return Outcome {
                    records: vec![Record::failed("curvature evaluation", tol, e)],
                    table: None,
                }
            }
        }
    }
    let records = match family {
        Family::KahlerNorden => vec![
            Record::upper("einstein constant |η + 2|", n, m[2], tol),
            Record::upper("einstein fit residual", n, m[3], tol),
            Record::upper("ricci scalar |R + 8|", n, m[4], tol),
            Record::upper("metric construction", n, m[5], METRIC_CONSISTENCY_TOL),
        ],
        Family::ComplexSphere => vec![
            Record::upper("holomorphic sectional curvature |K + 1|", n, m[0], tol),
            Record::upper("ricci = K g", n, m[1], tol),
        ],
        Family::AntiDeSitterMinus => vec![
            Record::upper("sectional curvature |K - 1|", n, m[0], tol),
            Record::upper("ricci = K g", n, m[1], tol),
        ],
        _ => vec![
            Record::upper("sectional curvature |K + 1|", n, m[0], tol),
            Record::upper("ricci = K g", n, m[1], tol),
        ],
    };
    Outcome { records, table: None }
}

fn coords(p: &ChartPoint) -> Vec<f64> {
    match p {
        ChartPoint::Real2(v) => v.to_vec(),
        ChartPoint::Real4(v) => v.to_vec(),
        ChartPoint::Complex2(v) => v.iter().flat_map(|c| [c.re, c.im]).collect(),
    }
}

fn coord_names(family: Family) -> Vec<&'static str> {
    match family {
        Family::ComplexSphere => vec!["z_re", "z_im", "q_re", "q_im"],
        Family::KahlerNorden => vec!["x", "phi", "y", "psi"],
        _ => vec!["x", "q"],
    }
}

fn geodesic_table(traj: &GeodesicTrajectory, n: usize) -> Table {
    let names = coord_names(traj.family());
    let mut header = vec!["s".to_string()];
    header.extend(names.iter().map(|s| s.to_string()));
    header.extend(names.iter().map(|s| format!("d{s}")));
    let (lo, hi) = traj.s_range();
    let rows = grid(lo, hi, n)
        .filter_map(|s| traj.state_at(s))
        .map(|st| {
            let mut row = vec![st.s];
            row.extend(coords(&st.coords));
            row.extend(coords(&st.velocity));
            row
        })
        .collect();
    Table { header, rows }
}

fn trajectory_distance(a: &GeodesicTrajectory, b: &GeodesicTrajectory) -> (f64, usize) {
    let hi = a.s_range().1.min(b.s_range().1);
    let lo = a.s_range().0;
    let mut d: f64 = 0.0;
    let mut n = 0;
    for s in grid(lo, hi, 200) {
        if let (Some(x), Some(y)) = (a.state_at(s), b.state_at(s)) {
            n += 1;
            for (u, v) in coords(&x.coords).iter().zip(coords(&y.coords)) {
                d = worst(d, (u - v).abs());
            }
        }
    }
    (d, n)
}

fn geodesic(job: &Job, initial: &GeodesicState, s_span: (f64, f64)) -> Outcome {
    let spec = &job.spec;
    let tol = job.scenario.tol;
    let traj = match integrate_geodesic(spec, initial, s_span, INTEGRATION_TOL) {
        Ok(t) => t,
        Err(e) => {
            return Outcome {
                records: vec![Record::failed("geodesic integration", tol, e)],
                table: None,
            }
        }
    };
    let mut records = Vec::new();

    let speed = |st: &GeodesicState| speed_squared(spec, st);
    match speed(initial) {
        Ok(v0) => {
            let mut dev: f64 = 0.0;
            for st in traj.samples() {
                let d = speed(st)
                    .map(|v| (v - v0).norm() / (1.0 + v0.norm()))
                    .unwrap_or(f64::NAN);
                dev = worst(dev, d);
            }
            records.push(Record::upper("speed conservation", traj.samples().len(), dev, tol));
        }
        Err(e) => records.push(Record::failed("speed conservation", tol, e)),
    }

    if spec.family() != Family::KahlerNorden {
        match explicit_from_trajectory(&traj) {
            Ok(g) => {
                let ts = g.fine_grid(1);
                let mut dev: f64 = 0.0;
                for &t in &ts {
                    dev = worst(
                        dev,
                        geodesic_residual(spec, &g, t).map(|r| r.norm()).unwrap_or(f64::NAN),
                    );
                }
                records.push(Record::upper("explicit form residual", ts.len(), dev, tol));
            }
            Err(GeodesicError::TurningPointAtStart) => {}
            Err(e) => records.push(Record::failed("explicit form residual", tol, e)),
        }
    }

    if spec.family().is_ads() {
        let pair = (|| -> Result<(f64, usize), GeodesicError> {
            let plus = spec.with_family(Family::AntiDeSitterPlus)?;
            let minus = spec.with_family(Family::AntiDeSitterMinus)?;
            let a = integrate_geodesic_with(&plus, initial, s_span, INTEGRATION_TOL, Method::FromJets)?;
            let b = integrate_geodesic_with(&minus, initial, s_span, INTEGRATION_TOL, Method::FromJets)?;
            Ok(trajectory_distance(&a, &b))
        })();
        records.push(match pair {
            Ok((d, n)) => Record::upper("ads+ / ads- shared trajectory", n, d, SHARED_TRAJECTORY_TOL),
            Err(e) => Record::failed("ads+ / ads- shared trajectory", SHARED_TRAJECTORY_TOL, e),
        });
    }
    Outcome {
        records,
        table: Some(geodesic_table(&traj, job.samples)),
    }
}

/// Direct integration of `u'' = −h u` along the support of a geodesic,
/// piece by piece between path vertices.
struct DirectSolution {
    pieces: Vec<DenseSolution<4>>,
}

impl DirectSolution {
    fn new(
        spec: &GeometrySpec,
        path: Option<&ComplexPath>,
        (lo, hi): (f64, f64),
        t0: f64,
        u0: Complex64,
        du0: Complex64,
    ) -> Result<Self, String> {
        let h = spec.h();
        let mut breaks: Vec<f64> = match path {
            Some(p) => (1..p.segments()).map(|k| p.segment_range(k).0).collect(),
            None => Vec::new(),
        };
        breaks.retain(|&b| b > lo && b < hi);
        let opts = OdeOptions::with_tol(INTEGRATION_TOL);
        let mut pieces = Vec::new();
        for (end, forward) in [(hi, true), (lo, false)] {
            let mut knots: Vec<f64> = breaks
                .iter()
                .copied()
                .filter(|&b| if forward { b > t0 } else { b < t0 })
                .collect();
            if !forward {
                knots.reverse();
            }
            knots.push(end);
            let (mut t, mut y) = (t0, [u0.re, u0.im, du0.re, du0.im]);
            for &k in &knots {
                if k == t {
                    continue;
                }
                let mid = 0.5 * (t + k);
                let (w_of, dw) = match path {
                    Some(p) => {
                        let seg = p.segment_of(mid);
                        (Some((p.clone(), seg)), p.velocity_in(seg))
                    }
                    None => (None, Complex64::new(1.0, 0.0)),
                };
                let rhs = |s: f64, y: &[f64; 4]| {
                    let w = match &w_of {
                        Some((p, seg)) => p.point_in(*seg, s),
                        None => Complex64::from(s),
                    };
                    let hv = h_at(h, w).ok()?.value;
                    let u = Complex64::new(y[0], y[1]);
                    let du = Complex64::new(y[2], y[3]) * dw;
                    let ddu = -hv * u * dw;
                    Some([du.re, du.im, ddu.re, ddu.im])
                };
                let sol = integrate_plain(rhs, t, y, k, &opts).map_err(|e| e.to_string())?;
                if sol.status != OdeStatus::Completed {
                    return Err(format!("direct integration stopped at {}", sol.t_end()));
                }
                y = sol.end_state();
                t = k;
                pieces.push(sol);
            }
        }
        Ok(DirectSolution { pieces })
    }

    fn at(&self, t: f64) -> Option<Complex64> {
        self.pieces
            .iter()
            .find(|p| p.contains(t))
            .and_then(|p| p.eval(t))
            .map(|y| Complex64::new(y[0], y[1]))
    }
}

fn build_geodesic(spec: &GeometrySpec, data: &SolveData) -> Result<(ExplicitGeodesic, (f64, f64)), String> {
    match data {
        SolveData::Interval {
            x0,
            lo,
            hi,
            value,
            slope,
        } => {
            let g = integrate_explicit(
                spec,
                Complex64::from(*value),
                Complex64::from(*slope),
                &Support::Interval {
                    x0: *x0,
                    lo: *lo,
                    hi: *hi,
                },
                INTEGRATION_TOL,
            )
            .map_err(|e| e.to_string())?;
            Ok((g, (*lo, *hi)))
        }
        SolveData::Path { path, value, slope } => {
            let g = integrate_explicit(spec, *value, *slope, &Support::Path(path.clone()), INTEGRATION_TOL)
                .map_err(|e| e.to_string())?;
            Ok((g, (0.0, 1.0)))
        }
        SolveData::Constant { x0, lo, hi, value } => {
            let v = Complex64::from(*value);
            let zero = Complex64::new(0.0, 0.0);
            let curve = real_function(*lo, *hi, move |_| (v, zero, zero));
            let nodes: Vec<f64> = grid(*lo, *hi, 64).collect();
            let g = ExplicitGeodesic::from_curve(spec.family(), *x0, Arc::new(curve), nodes, Termination::RangeEnd);
            Ok((g, (*lo, *hi)))
        }
    }
}

fn max_over(ts: &[f64], f: impl Fn(f64) -> Result<f64, String>) -> Result<f64, String> {
    let mut m: f64 = 0.0;
    for &t in ts {
        m = worst(m, f(t)?);
    }
    Ok(m)
}

fn record_of(name: &str, n: usize, tol: f64, v: Result<f64, String>) -> Record {
    match v {
        Ok(d) => Record::upper(name, n, d, tol),
        Err(e) => Record::failed(name, tol, e),
    }
}

fn coefficient_label(a: Complex64, b: Complex64) -> String {
    let f = |c: Complex64| {
        if c.im == 0.0 {
            format!("{}", c.re)
        } else {
            format!("{c}")
        }
    };
    format!("A={}, B={}", f(a), f(b))
}

fn solve(
    job: &Job,
    data: &SolveData,
    coefficients: &[(Complex64, Complex64)],
    path_b: Option<&ComplexPath>,
    path_tol: f64,
) -> Outcome {
    let spec = &job.spec;
    let tol = job.scenario.tol;
    let (g, requested) = match build_geodesic(spec, data) {
        Ok(g) => g,
        Err(e) => {
            return Outcome {
                records: vec![Record::failed("geodesic integration", tol, e)],
                table: None,
            }
        }
    };
    let mut records = Vec::new();
    let (lo, hi) = g.support();
    let uncovered = (lo - requested.0) + (requested.1 - hi);
    let mut coverage = Record::upper("support covers the requested range", 2, uncovered, 0.0);
    if uncovered > 0.0 {
        coverage.note = Some(format!("the geodesic stops at [{lo}, {hi}] ({:?})", g.termination()));
    }
    records.push(coverage);

    let fine = g.fine_grid(1);
    records.push(record_of(
        "geodesic residual",
        fine.len(),
        tol,
        max_over(&fine, |t| {
            geodesic_residual(spec, &g, t)
                .map(|r| r.norm())
                .map_err(|e| e.to_string())
        }),
    ));

    let check = if matches!(data, SolveData::Constant { .. }) {
        BasisCheck::Unchecked
    } else {
        BasisCheck::Residual
    };
    let basis = match reconstruct_basis(spec, &g, g.base_param(), None, INTEGRATION_TOL, check) {
        Ok(b) => b,
        Err(e) => {
            records.push(Record::failed("solution basis", tol, e));
            return Outcome { records, table: None };
        }
    };
    let ts: Vec<f64> = grid(lo, hi, CHECK_POINTS).collect();
    let h = spec.h();
    for &(a, b) in coefficients {
        let label = format!("ode residual ({})", coefficient_label(a, b));
        let u = combination_curve(&basis, a, b);
        let v = max_over(&ts, |t| {
            ode_residual(h, &u, t).map(|r| r.norm()).map_err(|e| e.to_string())
        });
        records.push(record_of(&label, ts.len(), tol, v));
    }
    for (name, th) in [
        ("riccati residual (top)", &basis.theta.top),
        ("riccati residual (bot)", &basis.theta.bot),
    ] {
        let v = max_over(&ts, |t| {
            riccati_residual(h, th.as_ref(), t)
                .map(|r| r.norm())
                .map_err(|e| e.to_string())
        });
        records.push(record_of(name, ts.len(), tol, v));
    }
    let v = max_over(&ts, |t| {
        basis
            .theta
            .product_defect(t)
            .map(|d| d.norm())
            .ok_or_else(|| format!("no Θ at {t}"))
    });
    records.push(record_of("theta product identity", ts.len(), PRODUCT_TOL, v));
    records.push(Record::upper(
        "wronskian constancy",
        basis.wronskian.samples,
        basis.wronskian.max_relative_variation,
        WRONSKIAN_TOL,
    ));
    let round_trip = invert_to_geodesic(InversionSource::Basis(&basis), g.family())
        .map_err(|e| e.to_string())
        .and_then(|back| {
            max_over(&ts, |t| match (back.at(t), g.at(t)) {
                (Some(x), Some(y)) => Ok((x.value - y.value).norm()),
                _ => Err(format!("no value at {t}")),
            })
        });
    records.push(record_of("inversion round trip", ts.len(), ROUND_TRIP_TOL, round_trip));

    let path = match data {
        SolveData::Path { path, .. } => Some(path),
        _ => None,
    };
    let base = basis.base_param;
    let direct = |u: &dyn CurveFunction| -> Result<f64, String> {
        let s0 = u.eval(base).ok_or("no value at the base point")?;
        let d = DirectSolution::new(spec, path, (lo, hi), base, s0.value, s0.d1)?;
        max_over(&ts, |t| {
            let a = u.eval(t).ok_or_else(|| format!("no value at {t}"))?.value;
            let b = d.at(t).ok_or_else(|| format!("no direct value at {t}"))?;
            Ok((a - b).norm() / a.norm().max(1.0))
        })
    };
    records.push(record_of(
        "direct integration (top)",
        ts.len(),
        tol,
        direct(basis.u_top.as_ref()),
    ));
    records.push(record_of(
        "direct integration (bot)",
        ts.len(),
        tol,
        direct(basis.u_bot.as_ref()),
    ));

    if let (Some(b), SolveData::Path { path, value, slope }) = (path_b, data) {
        let r = path_independence_check(spec, *value, *slope, path, b, path_tol)
            .map(|p| p.diff_top.max(p.diff_bot))
            .map_err(|e| e.to_string());
        records.push(record_of("path independence", 2, path_tol, r));
    }

    let mut header = vec!["t".to_string(), "point_re".to_string(), "point_im".to_string()];
    for k in 0..coefficients.len() {
        header.extend([format!("u{k}_re"), format!("u{k}_im"), format!("u{k}_residual")]);
    }
    let rows = grid(lo, hi, job.samples)
        .filter_map(|t| {
            let s = g.at(t)?;
            let mut row = vec![t, s.point.re, s.point.im];
            for &(a, b) in coefficients {
                let u = combination_curve(&basis, a, b);
                let v = u.eval(t)?;
                let r = ode_residual(h, &u, t).ok()?;
                row.extend([v.value.re, v.value.im, r.norm()]);
            }
            Some(row)
        })
        .collect();
    Outcome {
        records,
        table: Some(Table { header, rows }),
    }
}

/// `A u_top + B u_bot` as a curve.
fn combination_curve(basis: &SolutionBasis, a: Complex64, b: Complex64) -> impl CurveFunction + '_ {
    struct Combination<'a> {
        basis: &'a SolutionBasis,
        a: Complex64,
        b: Complex64,
    }
    impl CurveFunction for Combination<'_> {
        fn domain(&self) -> (f64, f64) {
            self.basis.support()
        }
        fn eval(&self, t: f64) -> Option<crate::curve::CurveSample> {
            self.basis.combination(self.a, self.b, t)
        }
    }
    Combination { basis, a, b }
}

fn riccati(job: &Job, x0: f64, theta0: Complex64, span: (f64, f64), mode: crate::reconstruct::SignMode) -> Outcome {
    let tol = job.scenario.tol;
    let h = job.spec.h();
    let th = match riccati_curve(h, x0, theta0, span.0, span.1, INTEGRATION_TOL) {
        Ok(t) => t,
        Err(e) => {
            return Outcome {
                records: vec![Record::failed("riccati integration", tol, e)],
                table: None,
            }
        }
    };
    let ts: Vec<f64> = grid(span.0, span.1, CHECK_POINTS + 1).collect();
    let mut records = vec![record_of(
        "riccati residual",
        ts.len(),
        tol,
        max_over(&ts, |t| {
            riccati_residual(h, th.as_ref(), t)
                .map(|r| r.norm())
                .map_err(|e| e.to_string())
        }),
    )];
    records.push(match riccati_solution_is_geodesic(h, th.as_ref(), mode, tol) {
        Ok(r) => Record::upper("induced geodesic residual", r.points, r.geodesic_max, tol),
        Err(e) => Record::failed("induced geodesic residual", tol, e),
    });
    let rows = grid(span.0, span.1, job.samples)
        .filter_map(|x| {
            let s = th.eval(x)?;
            let q = match mode {
                crate::reconstruct::SignMode::Real => Complex64::from(s.value.re.abs()),
                crate::reconstruct::SignMode::Imaginary => -Complex64::i() * s.value,
            };
            Some(vec![x, s.value.re, s.value.im, q.re, q.im])
        })
        .collect();
    let table = Table {
        header: ["x", "theta_re", "theta_im", "q_re", "q_im"].map(String::from).to_vec(),
        rows,
    };
    Outcome {
        records,
        table: Some(table),
    }
}

const E: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

fn kn_verify(
    job: &Job,
    n: usize,
    split: Option<&(GeodesicState, (f64, f64))>,
    hyperbolic: Option<&PlaneData>,
    ads: Option<&PlaneData>,
    s_span: (f64, f64),
) -> Outcome {
    let spec = &job.spec;
    let tol = job.scenario.tol;
    let pts = match sample(spec, n, job.scenario.seed) {
        Ok(p) => p,
        Err(e) => {
            return Outcome {
                records: vec![Record::failed("domain sampling", tol, e)],
                table: None,
            }
        }
    };
    let kps: Vec<KnPoint> = pts
        .iter()
        .map(|p| match *p {
            ChartPoint::Real4([x, phi, y, psi]) => KnPoint { x, phi, y, psi },
            _ => unreachable!("kn sampling yields 4D points"),
        })
        .collect();
    // [consistency, cr, identity, vanishing, closed, signature, η, fit, scalar]
    let per_point: Vec<Result<[f64; 9], String>> = kps
        .par_iter()
        .map(|p| {
            let s = |e: crate::kahler_norden::KnError| e.to_string();
            let consistency = kn_metric_consistency(spec, p).map_err(s)?;
            let (a, b) = cauchy_riemann_residual(spec.h(), p.x, p.y, CAUCHY_RIEMANN_STEP).map_err(s)?;
            let c = kn_christoffel_correspondence(spec, p).map_err(s)?;
            let sig = if c.signature
                == (Signature::Real {
                    negative: 2,
                    positive: 2,
                }) {
                0.0
            } else {
                1.0
            };
            let e = kn_einstein(spec, p).map_err(s)?;
            Ok([
                consistency,
                a.max(b),
                c.identity_max,
                c.vanishing_max,
                c.closed_vs_jets,
                sig,
                (e.eta + 2.0).abs(),
                e.fit_residual,
                (e.ricci_scalar + 8.0).abs(),
            ])
        })
        .collect();
    let mut m = [0.0f64; 9];
    for r in &per_point {
        match r {
            Ok(v) => {
                for i in 0..9 {
                    m[i] = worst(m[i], v[i]);
                }
            }
            Err(e) => {
                return Outcome {
                    records: vec![Record::failed("kn evaluation", tol, e)],
                    table: None,
                }
            }
        }
    }
    let mut records = vec![
        Record::upper("metric construction", n, m[0], METRIC_CONSISTENCY_TOL),
        Record::upper("cauchy-riemann residual", n, m[1], CAUCHY_RIEMANN_TOL),
        Record::upper("christoffel correspondence", n, m[2], CHRISTOFFEL_TOL),
        Record::upper("christoffel vanishing pattern", n, m[3], CHRISTOFFEL_TOL),
        Record::upper("christoffel closed form vs jets", n, m[4], CLOSED_FORM_TOL),
        Record::upper("neutral signature (2,2)", n, m[5], 0.0),
        Record::upper("einstein constant |η + 2|", n, m[6], tol),
        Record::upper("einstein fit residual", n, m[7], tol),
        Record::upper("ricci scalar |R + 8|", n, m[8], tol),
    ];
    let planes: Vec<(KnPoint, [f64; 4], [f64; 4])> = kps
        .iter()
        .flat_map(|p| [(*p, E[0], E[1]), (*p, E[0], E[2]), (*p, E[1], E[3]), (*p, E[0], E[3])])
        .collect();
    records.push(match kn_sectional_range(spec, &planes) {
        Ok((lo, hi)) => Record::lower("sectional curvature spread", planes.len(), hi - lo, SECTIONAL_SPREAD),
        Err(e) => Record::failed("sectional curvature spread", SECTIONAL_SPREAD, e),
    });

    if let Some((initial, span)) = split {
        match kn_geodesic_split(spec, initial, *span, INTEGRATION_TOL) {
            Ok(r) => {
                records.push(Record::upper(
                    "geodesic split (coordinates)",
                    r.samples,
                    r.base_diff.max(r.fibre_diff),
                    SPLIT_TOL,
                ));
                records.push(Record::upper(
                    "geodesic split (bases)",
                    r.samples,
                    r.basis_diff,
                    SPLIT_BASIS_TOL,
                ));
            }
            Err(e) => records.push(Record::failed("geodesic split", SPLIT_TOL, e)),
        }
    }
    for (plane, which, family, label) in [
        (hyperbolic, Submanifold::Hyperbolic, Family::Hyperbolic, "{y=0, psi=0}"),
        (ads, Submanifold::AntiDeSitter, Family::AntiDeSitterPlus, "{y=0, phi=0}"),
    ] {
        let Some(d) = plane else { continue };
        let r = spec
            .h()
            .to_real()
            .map_err(|e| e.to_string())
            .and_then(|h| GeometrySpec::new(family, h).map_err(|e| e.to_string()))
            .and_then(|planar| {
                kn_submanifold_check(spec, &planar, which, d.start, d.velocity, s_span, INTEGRATION_TOL)
                    .map_err(|e| e.to_string())
            });
        match r {
            Ok(r) => {
                records.push(Record::upper(
                    format!("submanifold {label} leak"),
                    200,
                    r.leak,
                    SUBMANIFOLD_TOL,
                ));
                records.push(Record::upper(
                    format!("submanifold {label} vs planar"),
                    200,
                    r.planar_diff,
                    SPLIT_TOL,
                ));
            }
            Err(e) => records.push(Record::failed(format!("submanifold {label}"), SUBMANIFOLD_TOL, e)),
        }
    }
    Outcome { records, table: None }
}
