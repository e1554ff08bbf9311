//! The four metric families attached to `h`, their Christoffel symbols and
//! curvature.
//!
//! Every family has a two-sided chart: a base coordinate (`x` or `z`) and a
//! fibre coordinate (Φ, Ψ or 𝔛). The Kähler-Norden family uses the real 4D
//! chart `(x, Φ, y, Ψ)`.

mod families;
pub mod tensor;

use std::fmt;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{ExprError, Expression, Mode};
use crate::jet::{HyperJet, Jet2};
use crate::scalar::Scalar;
pub use families::{kn_from_upsilon, kn_metric, kn_metric_from_complex, metric2};
use tensor::{Matrix, Symbols};

/// Default width of the guard band around the singular sets.
pub const DEFAULT_GUARD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    Hyperbolic,
    AntiDeSitterPlus,
    AntiDeSitterMinus,
    ComplexSphere,
    KahlerNorden,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Hyperbolic,
        Family::AntiDeSitterPlus,
        Family::AntiDeSitterMinus,
        Family::ComplexSphere,
        Family::KahlerNorden,
    ];

    pub fn mode(self) -> Mode {
        match self {
            Family::ComplexSphere | Family::KahlerNorden => Mode::Complex,
            _ => Mode::Real,
        }
    }

    pub fn dim(self) -> usize {
        if self == Family::KahlerNorden {
            4
        } else {
            2
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Hyperbolic => "hyperbolic",
            Family::AntiDeSitterPlus => "ads+",
            Family::AntiDeSitterMinus => "ads-",
            Family::ComplexSphere => "complex",
            Family::KahlerNorden => "kn",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        match name.to_ascii_lowercase().as_str() {
            "hyperbolic" => Some(Family::Hyperbolic),
            "ads" | "ads+" | "adsplus" | "antidesitterplus" => Some(Family::AntiDeSitterPlus),
            "ads-" | "adsminus" | "antidesitterminus" => Some(Family::AntiDeSitterMinus),
            "complex" | "complexsphere" => Some(Family::ComplexSphere),
            "kn" | "kahlernorden" | "kahler-norden" => Some(Family::KahlerNorden),
            _ => None,
        }
    }

    pub fn is_ads(self) -> bool {
        matches!(self, Family::AntiDeSitterPlus | Family::AntiDeSitterMinus)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point outside the domain: {0}")]
    OutOfDomain(String),
    #[error("metric is singular at the point")]
    SingularMetric,
    #[error("{family} needs a {expected:?}-mode coefficient function")]
    ModeMismatch { family: Family, expected: Mode },
    #[error("{family} points have {expected} coordinates")]
    ChartMismatch { family: Family, expected: &'static str },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A metric family bound to a coefficient function.
#[derive(Clone, Debug)]
pub struct GeometrySpec {
    family: Family,
    h: Expression,
    guard: f64,
}

impl GeometrySpec {
    pub fn new(family: Family, h: Expression) -> Result<Self, GeometryError> {
        if h.mode() != family.mode() {
            return Err(GeometryError::ModeMismatch {
                family,
                expected: family.mode(),
            });
        }
        Ok(Self {
            family,
            h,
            guard: DEFAULT_GUARD,
        })
    }

    /// Parse `source` in the mode the family requires.
    pub fn parse(family: Family, source: &str) -> Result<Self, GeometryError> {
        Self::new(family, Expression::parse(source, family.mode())?)
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn h(&self) -> &Expression {
        &self.h
    }

    pub fn guard(&self) -> f64 {
        self.guard
    }

    /// Same `h` under another family of the same mode.
    pub fn with_family(&self, family: Family) -> Result<Self, GeometryError> {
        Ok(Self::new(family, self.h.clone())?.with_guard(self.guard))
    }

    pub fn h_real(&self, x: f64) -> Result<Jet2<f64>, GeometryError> {
        Ok(self.h.jet(x)?)
    }

    pub fn h_complex(&self, z: Complex64) -> Result<Jet2<Complex64>, GeometryError> {
        Ok(self.h.jet(z)?)
    }
}

/// Coordinates of a chart point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ChartPoint {
    /// `(x, Φ)` or `(x, Ψ)`.
    Real2([f64; 2]),
    /// `(z, 𝔛)`.
    Complex2([Complex64; 2]),
    /// `(x, Φ, y, Ψ)`.
    Real4([f64; 4]),
}

impl ChartPoint {
    pub fn real(x: f64, q: f64) -> Self {
        ChartPoint::Real2([x, q])
    }

    pub fn complex(z: Complex64, q: Complex64) -> Self {
        ChartPoint::Complex2([z, q])
    }

    pub fn kn(x: f64, phi: f64, y: f64, psi: f64) -> Self {
        ChartPoint::Real4([x, phi, y, psi])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    FromJets,
}

/// Symmetric rank-2 tensor in chart order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Tensor2 {
    Real2([[f64; 2]; 2]),
    Complex2([[Complex64; 2]; 2]),
    Real4([[f64; 4]; 4]),
}

impl Tensor2 {
    pub fn dim(&self) -> usize {
        match self {
            Tensor2::Real4(_) => 4,
            _ => 2,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            Tensor2::Real2(m) => m[i][j].into(),
            Tensor2::Complex2(m) => m[i][j],
            Tensor2::Real4(m) => m[i][j].into(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Signature {
    /// Counts of negative and positive eigenvalues.
    Real { negative: usize, positive: usize },
    /// Complex bilinear metric; no signature.
    Holomorphic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricValue {
    pub components: Tensor2,
    pub signature: Signature,
    /// `(Δ₊, Δ₋) = (Φ² + Ψ², Φ² − Ψ²)` for Kähler-Norden points.
    pub delta: Option<(f64, f64)>,
}

/// `Γ^i_jk` indexed `[i][j][k]`.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ChristoffelValue {
    Real2(Symbols<f64, 2>),
    Complex2(Symbols<Complex64, 2>),
    Real4(Symbols<f64, 4>),
}

impl ChristoffelValue {
    pub fn dim(&self) -> usize {
        match self {
            ChristoffelValue::Real4(_) => 4,
            _ => 2,
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        match self {
            ChristoffelValue::Real2(s) => s[i][j][k].into(),
            ChristoffelValue::Complex2(s) => s[i][j][k],
            ChristoffelValue::Real4(s) => s[i][j][k].into(),
        }
    }

    /// Largest component-wise difference, scaled by `max(1, |a|, |b|)`.
    pub fn max_relative_diff(&self, other: &ChristoffelValue) -> f64 {
        let n = self.dim();
        assert_eq!(n, other.dim(), "symbol arrays of different dimension");
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (a, b) = (self.get(i, j, k), other.get(i, j, k));
                    let scale = 1.0f64.max(a.norm()).max(b.norm());
                    worst = worst.max((a - b).norm() / scale);
                }
            }
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureReport {
    /// Sectional curvature of the chart plane for 2D families (holomorphic
    /// sectional curvature for the complex sphere). For Kähler-Norden points
    /// the sectional curvature of the `(x, Φ)` coordinate plane.
    pub sectional_or_holomorphic_k: Complex64,
    pub metric: Tensor2,
    pub ricci: Tensor2,
    pub ricci_scalar: Complex64,
    /// Least-squares `η` in `Ric = η g`, with the max-norm fit residual.
    pub einstein_eta: Option<f64>,
    pub einstein_residual: Option<f64>,
    pub point: ChartPoint,
}

fn out(cond: impl Into<String>) -> GeometryError {
    GeometryError::OutOfDomain(cond.into())
}

fn real2(spec: &GeometrySpec, p: &ChartPoint) -> Result<[f64; 2], GeometryError> {
    match p {
        ChartPoint::Real2(c) => Ok(*c),
        _ => Err(GeometryError::ChartMismatch {
            family: spec.family,
            expected: "two real",
        }),
    }
}

fn complex2(spec: &GeometrySpec, p: &ChartPoint) -> Result<[Complex64; 2], GeometryError> {
    match p {
        ChartPoint::Complex2(c) => Ok(*c),
        _ => Err(GeometryError::ChartMismatch {
            family: spec.family,
            expected: "two complex",
        }),
    }
}

fn real4(spec: &GeometrySpec, p: &ChartPoint) -> Result<[f64; 4], GeometryError> {
    match p {
        ChartPoint::Real4(c) => Ok(*c),
        _ => Err(GeometryError::ChartMismatch {
            family: spec.family,
            expected: "four real",
        }),
    }
}

/// Guard-band test for a real fibre coordinate given `h(x)`.
pub fn check_real(family: Family, guard: f64, h: f64, q: f64) -> Result<(), GeometryError> {
    if !(q.is_finite() && h.is_finite()) {
        return Err(out("non-finite coordinates"));
    }
    match family {
        Family::Hyperbolic => {
            if q <= guard {
                return Err(out("Φ > 0"));
            }
            if (q * q - h).abs() <= guard {
                return Err(out("Φ² ≠ h(x)"));
            }
        }
        _ => {
            if q <= guard {
                return Err(out("Ψ > 0"));
            }
            if (q * q + h).abs() <= guard {
                return Err(out("Ψ² ≠ −h(x)"));
            }
        }
    }
    Ok(())
}

pub fn check_complex(guard: f64, h: Complex64, q: Complex64) -> Result<(), GeometryError> {
    if !(q.is_finite() && h.is_finite()) {
        return Err(out("non-finite coordinates"));
    }
    if q.norm() <= guard {
        return Err(out("𝔛 ≠ 0"));
    }
    if (q * q - h).norm() <= guard {
        return Err(out("𝔛² ≠ h(z)"));
    }
    Ok(())
}

pub fn check_kn(guard: f64, h: Complex64, phi: f64, psi: f64) -> Result<(), GeometryError> {
    if !(phi.is_finite() && psi.is_finite() && h.is_finite()) {
        return Err(out("non-finite coordinates"));
    }
    if phi * phi + psi * psi <= guard {
        return Err(out("Δ₊ > 0"));
    }
    let w = Complex64::new(phi, psi);
    if (h - w * w).norm() <= guard {
        return Err(out("h(x + iy) ≠ (Φ + iΨ)²"));
    }
    Ok(())
}

/// Checks domain membership of `p`, including the guard band.
pub fn check_domain(spec: &GeometrySpec, p: &ChartPoint) -> Result<(), GeometryError> {
    match spec.family {
        Family::ComplexSphere => {
            let [z, q] = complex2(spec, p)?;
            check_complex(spec.guard, spec.h_complex(z)?.value, q)
        }
        Family::KahlerNorden => {
            let [x, phi, y, psi] = real4(spec, p)?;
            let h = spec.h_complex(Complex64::new(x, y))?.value;
            check_kn(spec.guard, h, phi, psi)
        }
        f => {
            let [x, q] = real2(spec, p)?;
            check_real(f, spec.guard, spec.h_real(x)?.value, q)
        }
    }
}

fn real_signature<const N: usize>(m: &Matrix<f64, N>) -> Signature {
    let mut negative = 0;
    let mut positive = 0;
    let mut count = |e: f64| {
        if e < 0.0 {
            negative += 1
        } else if e > 0.0 {
            positive += 1
        }
    };
    if N == 4 {
        let mat = Matrix4::from_fn(|i, j| m[i][j]);
        SymmetricEigen::new(mat).eigenvalues.iter().for_each(|&e| count(e));
    } else {
        // 2×2 symmetric: eigenvalues from trace and determinant.
        let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
        let tr = a + d;
        let disc = ((a - d) * (a - d) / 4.0 + b * b).sqrt();
        count(tr / 2.0 + disc);
        count(tr / 2.0 - disc);
    }
    Signature::Real { negative, positive }
}

/// Metric components at `p`.
pub fn metric_at(spec: &GeometrySpec, p: &ChartPoint) -> Result<MetricValue, GeometryError> {
    check_domain(spec, p)?;
    Ok(match spec.family {
        Family::ComplexSphere => {
            let [z, q] = complex2(spec, p)?;
            let h = spec.h_complex(z)?.value;
            MetricValue {
                components: Tensor2::Complex2(metric2(spec.family, h, q)),
                signature: Signature::Holomorphic,
                delta: None,
            }
        }
        Family::KahlerNorden => {
            let [x, phi, y, psi] = real4(spec, p)?;
            let h = spec.h_complex(Complex64::new(x, y))?.value;
            let g = kn_metric(h.re, h.im, phi, psi);
            MetricValue {
                components: Tensor2::Real4(g),
                signature: real_signature(&g),
                delta: Some((phi * phi + psi * psi, phi * phi - psi * psi)),
            }
        }
        f => {
            let [x, q] = real2(spec, p)?;
            let g = metric2(f, spec.h_real(x)?.value, q);
            MetricValue {
                components: Tensor2::Real2(g),
                signature: real_signature(&g),
                delta: None,
            }
        }
    })
}

/// Metric built as the real part of the holomorphic metric at
/// `z = x + iy`, `𝔛 = Φ + iΨ`.
pub fn kn_metric_via_complex(spec: &GeometrySpec, p: &ChartPoint) -> Result<[[f64; 4]; 4], GeometryError> {
    check_domain(spec, p)?;
    let [x, phi, y, psi] = real4(spec, p)?;
    let h = spec.h_complex(Complex64::new(x, y))?.value;
    let g = metric2(Family::ComplexSphere, h, Complex64::new(phi, psi));
    Ok(kn_metric_from_complex(&g))
}

/// Metric hyperjet for a 2D family at `(base, q)` over scalar `S`.
fn metric_jets2<S: Scalar>(family: Family, h: Jet2<S>, base: S, q: S) -> Matrix<HyperJet<S, 2>, 2> {
    let hj = h.lift(&HyperJet::seed(base, 0));
    metric2(family, hj, HyperJet::seed(q, 1))
}

fn kn_metric_jets(h: Jet2<Complex64>, c: [f64; 4]) -> Matrix<HyperJet<f64, 4>, 4> {
    let [x, phi, y, psi] = c;
    // z = x + iy as a complex hyperjet over (x, Φ, y, Ψ).
    let mut z = HyperJet::<Complex64, 4>::constant(Complex64::new(x, y));
    z.grad[0] = Complex64::new(1.0, 0.0);
    z.grad[2] = Complex64::new(0.0, 1.0);
    let hz = h.lift(&z);
    let hr = hz.map(|v| v.re);
    let hi = hz.map(|v| v.im);
    kn_metric(hr, hi, HyperJet::seed(phi, 1), HyperJet::seed(psi, 3))
}

/// Closed-form symbols for 2D real families at `(x, q)`; no domain check.
pub fn closed_real2(family: Family, h: Jet2<f64>, q: f64) -> Symbols<f64, 2> {
    match family {
        Family::Hyperbolic => families::closed_hyperbolic(h, q),
        _ => families::closed_ads(h, q),
    }
}

/// Closed-form holomorphic symbols `Υ` at `(z, 𝔛)`.
pub fn closed_complex2(h: Jet2<Complex64>, q: Complex64) -> Symbols<Complex64, 2> {
    families::closed_hyperbolic(h, q)
}

/// Closed-form Kähler-Norden symbols assembled from `Υ`; no domain check.
pub fn closed_kn(h: Jet2<Complex64>, phi: f64, psi: f64) -> Symbols<f64, 4> {
    kn_from_upsilon(&closed_complex2(h, Complex64::new(phi, psi)))
}

pub fn christoffel_at(spec: &GeometrySpec, p: &ChartPoint, method: Method) -> Result<ChristoffelValue, GeometryError> {
    check_domain(spec, p)?;
    Ok(match spec.family {
        Family::ComplexSphere => {
            let [z, q] = complex2(spec, p)?;
            let h = spec.h_complex(z)?;
            ChristoffelValue::Complex2(match method {
                Method::ClosedForm => closed_complex2(h, q),
                Method::FromJets => {
                    tensor::levi_civita(&metric_jets2(spec.family, h, z, q))
                        .ok_or(GeometryError::SingularMetric)?
                        .0
                }
            })
        }
        Family::KahlerNorden => {
            let c = real4(spec, p)?;
            let h = spec.h_complex(Complex64::new(c[0], c[2]))?;
            ChristoffelValue::Real4(match method {
                Method::ClosedForm => closed_kn(h, c[1], c[3]),
                Method::FromJets => {
                    tensor::levi_civita(&kn_metric_jets(h, c))
                        .ok_or(GeometryError::SingularMetric)?
                        .0
                }
            })
        }
        f => {
            let [x, q] = real2(spec, p)?;
            let h = spec.h_real(x)?;
            ChristoffelValue::Real2(match method {
                Method::ClosedForm => closed_real2(f, h, q),
                Method::FromJets => {
                    tensor::levi_civita(&metric_jets2(f, h, x, q))
                        .ok_or(GeometryError::SingularMetric)?
                        .0
                }
            })
        }
    })
}

struct Curvature<S, const N: usize> {
    g: Matrix<S, N>,
    ricci: Matrix<S, N>,
    scalar: S,
    lowered: tensor::Riemann<S, N>,
}

fn curvature_from_jets<S: Scalar, const N: usize>(
    g: &Matrix<HyperJet<S, N>, N>,
) -> Result<Curvature<S, N>, GeometryError> {
    let (gamma, dgamma) = tensor::levi_civita(g).ok_or(GeometryError::SingularMetric)?;
    let r = tensor::riemann(&gamma, &dgamma);
    let gv = tensor::values(g);
    let ginv = tensor::invert(&gv).ok_or(GeometryError::SingularMetric)?;
    let ricci = tensor::ricci(&r);
    Ok(Curvature {
        scalar: tensor::trace_with(&ginv, &ricci),
        lowered: tensor::lower(&gv, &r),
        g: gv,
        ricci,
    })
}

fn unit<S: Scalar, const N: usize>(i: usize) -> [S; N] {
    let mut v = [S::zero(); N];
    v[i] = S::one();
    v
}

/// Least-squares `η` for `Ric = η g` over the independent components, and
/// the max-norm residual of the fit.
pub fn einstein_fit<const N: usize>(ricci: &Matrix<f64, N>, g: &Matrix<f64, N>) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..N {
        for j in i..N {
            num += ricci[i][j] * g[i][j];
            den += g[i][j] * g[i][j];
        }
    }
    let eta = num / den;
    let mut resid = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            resid = resid.max((ricci[i][j] - eta * g[i][j]).abs());
        }
    }
    (eta, resid)
}

/// Curvature quantities from jet-differentiated metric components.
pub fn curvature_at(spec: &GeometrySpec, p: &ChartPoint) -> Result<CurvatureReport, GeometryError> {
    check_domain(spec, p)?;
    match spec.family {
        Family::ComplexSphere => {
            let [z, q] = complex2(spec, p)?;
            let c = curvature_from_jets(&metric_jets2(spec.family, spec.h_complex(z)?, z, q))?;
            let k = tensor::sectional(&c.g, &c.lowered, &unit(0), &unit(1));
            Ok(CurvatureReport {
                sectional_or_holomorphic_k: k,
                metric: Tensor2::Complex2(c.g),
                ricci: Tensor2::Complex2(c.ricci),
                ricci_scalar: c.scalar,
                einstein_eta: None,
                einstein_residual: None,
                point: *p,
            })
        }
        Family::KahlerNorden => {
            let co = real4(spec, p)?;
            let h = spec.h_complex(Complex64::new(co[0], co[2]))?;
            let c = curvature_from_jets(&kn_metric_jets(h, co))?;
            let k = tensor::sectional(&c.g, &c.lowered, &unit(0), &unit(1));
            let (eta, resid) = einstein_fit(&c.ricci, &c.g);
            Ok(CurvatureReport {
                sectional_or_holomorphic_k: k.into(),
                metric: Tensor2::Real4(c.g),
                ricci: Tensor2::Real4(c.ricci),
                ricci_scalar: c.scalar.into(),
                einstein_eta: Some(eta),
                einstein_residual: Some(resid),
                point: *p,
            })
        }
        f => {
            let [x, q] = real2(spec, p)?;
            let c = curvature_from_jets(&metric_jets2(f, spec.h_real(x)?, x, q))?;
            let k = tensor::sectional(&c.g, &c.lowered, &unit(0), &unit(1));
            Ok(CurvatureReport {
                sectional_or_holomorphic_k: k.into(),
                metric: Tensor2::Real2(c.g),
                ricci: Tensor2::Real2(c.ricci),
                ricci_scalar: c.scalar.into(),
                einstein_eta: None,
                einstein_residual: None,
                point: *p,
            })
        }
    }
}

/// Sectional curvature of the Kähler-Norden metric on the plane spanned by
/// `u` and `v` at `p`.
pub fn kn_sectional(spec: &GeometrySpec, p: &ChartPoint, u: &[f64; 4], v: &[f64; 4]) -> Result<f64, GeometryError> {
    check_domain(spec, p)?;
    let co = real4(spec, p)?;
    let h = spec.h_complex(Complex64::new(co[0], co[2]))?;
    let c = curvature_from_jets(&kn_metric_jets(h, co))?;
    Ok(tensor::sectional(&c.g, &c.lowered, u, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn metric_examples() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "0").unwrap();
        let m = metric_at(&spec, &ChartPoint::real(0.0, 1.0)).unwrap();
        assert_eq!(m.components, Tensor2::Real2([[1.0, 0.0], [0.0, 1.0]]));
        assert_eq!(
            m.signature,
            Signature::Real {
                negative: 0,
                positive: 2
            }
        );
        let spec = GeometrySpec::parse(Family::AntiDeSitterPlus, "0").unwrap();
        let m = metric_at(&spec, &ChartPoint::real(0.0, 1.0)).unwrap();
        assert_eq!(m.components, Tensor2::Real2([[-1.0, 0.0], [0.0, 1.0]]));
        assert_eq!(
            m.signature,
            Signature::Real {
                negative: 1,
                positive: 1
            }
        );
    }

    #[test]
    fn kn_restricts_to_hyperbolic_block() {
        let kn = GeometrySpec::parse(Family::KahlerNorden, "z^2 + 1").unwrap();
        let hyp = GeometrySpec::parse(Family::Hyperbolic, "x^2 + 1").unwrap();
        let (x, phi) = (0.4, 1.7);
        let g4 = metric_at(&kn, &ChartPoint::kn(x, phi, 0.0, 0.0)).unwrap().components;
        let g2 = metric_at(&hyp, &ChartPoint::real(x, phi)).unwrap().components;
        for i in 0..2 {
            for j in 0..2 {
                assert!((g4.get(i, j) - g2.get(i, j)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn domain_conditions() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "1").unwrap();
        assert!(matches!(
            metric_at(&spec, &ChartPoint::real(0.0, 1.0)),
            Err(GeometryError::OutOfDomain(_))
        ));
        assert!(matches!(
            metric_at(&spec, &ChartPoint::real(0.0, -1.0)),
            Err(GeometryError::OutOfDomain(_))
        ));
        assert!(matches!(
            metric_at(&spec, &ChartPoint::complex(c(0.0, 0.0), c(1.0, 0.0))),
            Err(GeometryError::ChartMismatch { .. })
        ));
        assert!(matches!(
            GeometrySpec::parse(Family::ComplexSphere, "x"),
            Err(GeometryError::Expr(ExprError::UnknownIdentifier { .. }))
        ));
        let ads = GeometrySpec::parse(Family::AntiDeSitterPlus, "-1").unwrap();
        assert!(metric_at(&ads, &ChartPoint::real(0.0, 1.0)).is_err());
    }

    #[test]
    fn christoffel_examples() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "sin(x) + 3").unwrap();
        let g = christoffel_at(&spec, &ChartPoint::real(0.2, 2.0), Method::ClosedForm).unwrap();
        assert_eq!(g.get(1, 1, 1), c(-0.5, 0.0));

        let ads = GeometrySpec::parse(Family::AntiDeSitterPlus, "1").unwrap();
        let g = christoffel_at(&ads, &ChartPoint::real(0.0, 1.0), Method::ClosedForm).unwrap();
        assert_eq!(g.get(0, 0, 1), c(0.0, 0.0));

        let cs = GeometrySpec::parse(Family::ComplexSphere, "z^2").unwrap();
        let p = ChartPoint::complex(c(1.0, 0.0), c(0.0, 2.0));
        let a = christoffel_at(&cs, &p, Method::ClosedForm).unwrap();
        let b = christoffel_at(&cs, &p, Method::FromJets).unwrap();
        assert!(a.max_relative_diff(&b) < 1e-9);
    }

    #[test]
    fn curvature_examples() {
        let spec = GeometrySpec::parse(Family::Hyperbolic, "sin(x) + 3").unwrap();
        let r = curvature_at(&spec, &ChartPoint::real(0.7, 1.3)).unwrap();
        assert!((r.sectional_or_holomorphic_k.re + 1.0).abs() < 1e-7);

        let minus = GeometrySpec::parse(Family::AntiDeSitterMinus, "x^2 + 2").unwrap();
        let r = curvature_at(&minus, &ChartPoint::real(0.3, 0.8)).unwrap();
        assert!((r.sectional_or_holomorphic_k.re - 1.0).abs() < 1e-7);

        let kn = GeometrySpec::parse(Family::KahlerNorden, "z^2 + 1").unwrap();
        let r = curvature_at(&kn, &ChartPoint::kn(0.3, 1.2, -0.5, 0.7)).unwrap();
        assert!((r.ricci_scalar.re + 8.0).abs() < 1e-6, "{:?}", r.ricci_scalar);
        assert!((r.einstein_eta.unwrap() + 2.0).abs() < 1e-6);
    }

    #[test]
    fn kn_signature_is_split() {
        let kn = GeometrySpec::parse(Family::KahlerNorden, "z^2 + 1").unwrap();
        let m = metric_at(&kn, &ChartPoint::kn(0.3, 1.2, -0.5, 0.7)).unwrap();
        assert_eq!(
            m.signature,
            Signature::Real {
                negative: 2,
                positive: 2
            }
        );
    }
}
