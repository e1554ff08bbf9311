//! The four-dimensional real picture: the Kähler-Norden metric as the real
//! part of the holomorphic metric, its Christoffel symbols and geodesics.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::curve::grid;
use crate::expr::{ExprError, Expression, Mode};
use crate::geodesics::{explicit_from_trajectory, integrate_geodesic, GeodesicError, GeodesicState};
use crate::geometry::{
    check_kn, christoffel_at, curvature_at, kn_from_upsilon, kn_metric_via_complex, kn_sectional, metric_at,
    ChartPoint, ChristoffelValue, Family, GeometryError, GeometrySpec, Method, Signature,
};
use crate::reconstruct::{reconstruct_basis, BasisCheck, ReconstructError};

/// Agreement required between the 4D and complex integrations.
pub const SPLIT_TOL: f64 = 1e-8;
/// Agreement required between the two reconstructed bases.
pub const SPLIT_BASIS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KnError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("base velocity ẋ + iẏ vanishes")]
    TurningPoint,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// A point `(x, Φ, y, Ψ)` of the Kähler-Norden chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KnPoint {
    pub x: f64,
    pub phi: f64,
    pub y: f64,
    pub psi: f64,
}

impl KnPoint {
    /// Checked against the domain of `spec`.
    pub fn new(spec: &GeometrySpec, x: f64, phi: f64, y: f64, psi: f64) -> Result<Self, KnError> {
        let p = Self { x, phi, y, psi };
        check_kn(spec.guard(), spec.h_complex(p.z())?.value, phi, psi)?;
        Ok(p)
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn fibre(&self) -> Complex64 {
        Complex64::new(self.phi, self.psi)
    }

    pub fn delta_plus(&self) -> f64 {
        self.phi * self.phi + self.psi * self.psi
    }

    pub fn delta_minus(&self) -> f64 {
        self.phi * self.phi - self.psi * self.psi
    }

    /// `(h_Re, h_Im)` at `x + iy`.
    pub fn h_parts(&self, spec: &GeometrySpec) -> Result<(f64, f64), KnError> {
        let h = spec.h_complex(self.z())?.value;
        Ok((h.re, h.im))
    }

    pub fn chart(&self) -> ChartPoint {
        ChartPoint::kn(self.x, self.phi, self.y, self.psi)
    }
}

fn need_kn(spec: &GeometrySpec) -> Result<(), KnError> {
    if spec.family() == Family::KahlerNorden {
        Ok(())
    } else {
        Err(KnError::InvalidInput(format!(
            "expected the kn family, got {}",
            spec.family()
        )))
    }
}

/// `(|∂ₓh_Re − ∂_y h_Im|, |∂_y h_Re + ∂ₓh_Im|)` at `x + iy`, with the
/// partial derivatives taken by five-point differences of `h` along the
/// real and imaginary directions.
pub fn cauchy_riemann_residual(h: &Expression, x: f64, y: f64, step: f64) -> Result<(f64, f64), KnError> {
    if h.mode() != Mode::Complex {
        return Err(KnError::InvalidInput(
            "Cauchy-Riemann needs a complex-mode expression".into(),
        ));
    }
    if !(step > 0.0) {
        return Err(KnError::InvalidInput("step must be positive".into()));
    }
    let z = Complex64::new(x, y);
    let at = |w: Complex64| -> Result<Complex64, KnError> { Ok(h.jet(w)?.value) };
    let partial = |dir: Complex64| -> Result<Complex64, KnError> {
        let d = dir * step;
        Ok((at(z - 2.0 * d)? - 8.0 * at(z - d)? + 8.0 * at(z + d)? - at(z + 2.0 * d)?) / (12.0 * step))
    };
    let dx = partial(Complex64::new(1.0, 0.0))?;
    let dy = partial(Complex64::new(0.0, 1.0))?;
    Ok(((dx.re - dy.im).abs(), (dy.re + dx.im).abs()))
}

/// Max-norm difference between the explicit Kähler-Norden components and
/// `Re[G_ab dZ^a dZ^b]` at `p`.
pub fn kn_metric_consistency(spec: &GeometrySpec, p: &KnPoint) -> Result<f64, KnError> {
    need_kn(spec)?;
    let explicit = metric_at(spec, &p.chart())?.components;
    let built = kn_metric_via_complex(spec, &p.chart())?;
    let mut worst: f64 = 0.0;
    for (i, row) in built.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((explicit.get(i, j).re - v).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChristoffelCorrespondence {
    /// Largest violation of `Γ̂ = assembly of Υ`, with both sides from jets.
    pub identity_max: f64,
    /// Largest 4D symbol where the corresponding holomorphic symbol is zero.
    pub vanishing_max: f64,
    /// Closed-form against jet-differentiated 4D symbols.
    pub closed_vs_jets: f64,
    pub signature: Signature,
}

/// Check the real/imaginary-part correspondence between the 4D symbols and
/// the holomorphic symbols `Υ` at `p`.
pub fn kn_christoffel_correspondence(spec: &GeometrySpec, p: &KnPoint) -> Result<ChristoffelCorrespondence, KnError> {
    need_kn(spec)?;
    let chart = p.chart();
    let ChristoffelValue::Real4(jets) = christoffel_at(spec, &chart, Method::FromJets)? else {
        unreachable!("kn symbols are four-dimensional")
    };
    let ChristoffelValue::Real4(closed) = christoffel_at(spec, &chart, Method::ClosedForm)? else {
        unreachable!("kn symbols are four-dimensional")
    };
    let cs = spec.with_family(Family::ComplexSphere)?;
    let ChristoffelValue::Complex2(upsilon) =
        christoffel_at(&cs, &ChartPoint::complex(p.z(), p.fibre()), Method::FromJets)?
    else {
        unreachable!("complex symbols are two-dimensional")
    };
    let assembled = kn_from_upsilon(&upsilon);

    let scale = 1.0 + upsilon.iter().flatten().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let mut identity_max: f64 = 0.0;
    let mut vanishing_max: f64 = 0.0;
    let mut closed_vs_jets: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                identity_max = identity_max.max((jets[i][j][k] - assembled[i][j][k]).abs());
                closed_vs_jets = closed_vs_jets.max((jets[i][j][k] - closed[i][j][k]).abs());
                let (a, b, c) = (i % 2, j % 2, k % 2);
                if upsilon[a][b][c].norm() <= 1e-14 * scale {
                    vanishing_max = vanishing_max.max(jets[i][j][k].abs());
                }
            }
        }
    }
    Ok(ChristoffelCorrespondence {
        identity_max,
        vanishing_max,
        closed_vs_jets,
        signature: metric_at(spec, &chart)?.signature,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EinsteinRecord {
    pub eta: f64,
    pub fit_residual: f64,
    pub ricci_scalar: f64,
}

/// Least-squares Einstein constant and Ricci scalar at `p`.
pub fn kn_einstein(spec: &GeometrySpec, p: &KnPoint) -> Result<EinsteinRecord, KnError> {
    need_kn(spec)?;
    let r = curvature_at(spec, &p.chart())?;
    Ok(EinsteinRecord {
        eta: r.einstein_eta.unwrap_or(f64::NAN),
        fit_residual: r.einstein_residual.unwrap_or(f64::NAN),
        ricci_scalar: r.ricci_scalar.re,
    })
}

/// Smallest and largest sectional curvature over the given planes.
pub fn kn_sectional_range(
    spec: &GeometrySpec,
    planes: &[(KnPoint, [f64; 4], [f64; 4])],
) -> Result<(f64, f64), KnError> {
    need_kn(spec)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (p, u, v) in planes {
        let k = kn_sectional(spec, &p.chart(), u, v)?;
        lo = lo.min(k);
        hi = hi.max(k);
    }
    Ok((lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplitReport {
    /// `max |(x, y) − (Re z, Im z)|` over the compared parameters.
    pub base_diff: f64,
    /// `max |(Φ, Ψ) − (Re 𝔛, Im 𝔛)|`.
    pub fibre_diff: f64,
    /// Largest difference of the bases rebuilt from the two integrations.
    pub basis_diff: f64,
    pub samples: usize,
    pub s_end: f64,
    pub pass: bool,
}

fn complex_state(state: &GeodesicState) -> Result<GeodesicState, KnError> {
    match (state.coords, state.velocity) {
        (ChartPoint::Real4([x, phi, y, psi]), ChartPoint::Real4([vx, vphi, vy, vpsi])) => Ok(GeodesicState {
            coords: ChartPoint::complex(Complex64::new(x, y), Complex64::new(phi, psi)),
            velocity: ChartPoint::complex(Complex64::new(vx, vy), Complex64::new(vphi, vpsi)),
            s: state.s,
        }),
        _ => Err(KnError::InvalidInput(
            "the initial state needs four real coordinates".into(),
        )),
    }
}

/// Integrate the 4D geodesic and the complex geodesic with matched data
/// and compare them, together with the bases rebuilt from each.
pub fn kn_geodesic_split(
    spec: &GeometrySpec,
    initial: &GeodesicState,
    s_span: (f64, f64),
    tol: f64,
) -> Result<SplitReport, KnError> {
    need_kn(spec)?;
    let cs = spec.with_family(Family::ComplexSphere)?;
    let cinit = complex_state(initial)?;
    if let ChartPoint::Complex2([vz, _]) = cinit.velocity {
        if vz.norm() == 0.0 {
            return Err(KnError::TurningPoint);
        }
    }
    let t4 = integrate_geodesic(spec, initial, s_span, tol)?;
    let t2 = integrate_geodesic(&cs, &cinit, s_span, tol)?;
    let s_end = t4.s_range().1.min(t2.s_range().1);

    let ss: Vec<f64> = grid(s_span.0, s_end, 200).collect();
    let (mut base_diff, mut fibre_diff): (f64, f64) = (0.0, 0.0);
    for &s in &ss {
        let (a, b) = match (t4.state_at(s), t2.state_at(s)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        if let (ChartPoint::Real4([x, phi, y, psi]), ChartPoint::Complex2([z, q])) = (a.coords, b.coords) {
            base_diff = base_diff.max((x - z.re).abs()).max((y - z.im).abs());
            fibre_diff = fibre_diff.max((phi - q.re).abs()).max((psi - q.im).abs());
        }
    }

    let e4 = explicit_from_trajectory(&t4).map_err(|e| match e {
        GeodesicError::TurningPointAtStart => KnError::TurningPoint,
        e => e.into(),
    })?;
    let e2 = explicit_from_trajectory(&t2)?;
    let b4 = reconstruct_basis(&cs, &e4, e4.base_param(), None, 1e-10, BasisCheck::Unchecked)?;
    let b2 = reconstruct_basis(&cs, &e2, e2.base_param(), None, 1e-10, BasisCheck::Unchecked)?;
    let (lo, hi) = (e4.support().0.max(e2.support().0), e4.support().1.min(e2.support().1));
    let mut basis_diff: f64 = 0.0;
    for s in grid(lo, hi, 50) {
        for (u, v) in [(&b4.u_top, &b2.u_top), (&b4.u_bot, &b2.u_bot)] {
            if let (Some(a), Some(b)) = (u.eval(s), v.eval(s)) {
                basis_diff = basis_diff.max((a.value - b.value).norm());
            }
        }
    }
    Ok(SplitReport {
        base_diff,
        fibre_diff,
        basis_diff,
        samples: ss.len(),
        s_end,
        pass: base_diff <= SPLIT_TOL && fibre_diff <= SPLIT_TOL && basis_diff <= SPLIT_BASIS_TOL,
    })
}

/// Which totally geodesic plane of the 4D chart a real-data trajectory
/// should stay in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Submanifold {
    /// `{y = 0, Ψ = 0}`, carrying the hyperbolic metric.
    Hyperbolic,
    /// `{y = 0, Φ = 0}`, carrying the anti-de Sitter metric.
    AntiDeSitter,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubmanifoldReport {
    /// Largest excursion of the two coordinates that should stay zero.
    pub leak: f64,
    /// Largest difference to the planar geodesic.
    pub planar_diff: f64,
    pub s_end: f64,
}

/// Integrate from `(x0, q0)` with velocity `(vx, vq)` inside `which`, in
/// 4D and in the planar family `planar`, whose `h` must agree with the
/// Kähler-Norden `h` on the real axis.
#[allow(clippy::too_many_arguments)]
pub fn kn_submanifold_check(
    spec: &GeometrySpec,
    planar: &GeometrySpec,
    which: Submanifold,
    start: [f64; 2],
    velocity: [f64; 2],
    s_span: (f64, f64),
    tol: f64,
) -> Result<SubmanifoldReport, KnError> {
    need_kn(spec)?;
    let expected = match which {
        Submanifold::Hyperbolic => Family::Hyperbolic,
        Submanifold::AntiDeSitter => Family::AntiDeSitterPlus,
    };
    if planar.family() != expected {
        return Err(KnError::InvalidInput(format!("the planar family must be {expected}")));
    }
    let [x0, q0] = start;
    let hk = spec.h_complex(Complex64::new(x0, 0.0))?.value;
    let hp = planar.h_real(x0)?.value;
    if hk.im.abs() > 1e-12 * (1.0 + hk.norm()) || (hk.re - hp).abs() > 1e-12 * (1.0 + hp.abs()) {
        return Err(KnError::InvalidInput(
            "h must be real on the axis and equal the planar h".into(),
        ));
    }
    let (coords, vel) = match which {
        Submanifold::Hyperbolic => (
            ChartPoint::kn(x0, q0, 0.0, 0.0),
            ChartPoint::Real4([velocity[0], velocity[1], 0.0, 0.0]),
        ),
        Submanifold::AntiDeSitter => (
            ChartPoint::kn(x0, 0.0, 0.0, q0),
            ChartPoint::Real4([velocity[0], 0.0, 0.0, velocity[1]]),
        ),
    };
    let t4 = integrate_geodesic(
        spec,
        &GeodesicState {
            coords,
            velocity: vel,
            s: s_span.0,
        },
        s_span,
        tol,
    )?;
    let t2 = integrate_geodesic(
        planar,
        &GeodesicState {
            coords: ChartPoint::real(x0, q0),
            velocity: ChartPoint::Real2(velocity),
            s: s_span.0,
        },
        s_span,
        tol,
    )?;
    let s_end = t4.s_range().1.min(t2.s_range().1);
    let (mut leak, mut planar_diff): (f64, f64) = (0.0, 0.0);
    for s in grid(s_span.0, s_end, 200) {
        let (Some(a), Some(b)) = (t4.state_at(s), t2.state_at(s)) else {
            continue;
        };
        if let (ChartPoint::Real4([x, phi, y, psi]), ChartPoint::Real2([bx, bq])) = (a.coords, b.coords) {
            let (q, off) = match which {
                Submanifold::Hyperbolic => (phi, psi),
                Submanifold::AntiDeSitter => (psi, phi),
            };
            leak = leak.max(y.abs()).max(off.abs());
            planar_diff = planar_diff.max((x - bx).abs()).max((q - bq).abs());
        }
    }
    Ok(SubmanifoldReport {
        leak,
        planar_diff,
        s_end,
    })
}
