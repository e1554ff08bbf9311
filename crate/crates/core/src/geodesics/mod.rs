//! Geodesics in affine-parameter form and in explicit form (the fibre
//! coordinate as a function of the base coordinate).

mod affine;
mod explicit;
mod path;

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::curve::{CurveSample, SharedCurve};
use crate::geometry::{ChartPoint, Family, GeometryError};

pub use affine::{integrate_geodesic, integrate_geodesic_with, speed_squared, GeodesicTrajectory};
pub use explicit::{explicit_from_trajectory, explicit_second, geodesic_residual, integrate_explicit, Support};
pub use path::ComplexPath;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("initial data on the singular set: {0}")]
    StartOnSingularSet(String),
    #[error("step size underflow at parameter {reached}")]
    StepSizeUnderflow { reached: f64 },
    #[error("step limit exceeded at parameter {reached}")]
    MaxSteps { reached: f64 },
    #[error("base-coordinate velocity vanishes at the start; no explicit form")]
    TurningPointAtStart,
    #[error("parameter {0} outside the support")]
    OutsideSupport(f64),
    #[error("no second derivative available at parameter {0}")]
    NoSecondDerivative(f64),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Position and velocity on a geodesic at affine parameter `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeodesicState {
    pub coords: ChartPoint,
    /// Same arity as `coords`.
    pub velocity: ChartPoint,
    pub s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    RangeEnd,
    DomainBoundary,
    TurningPoint,
}

/// A solution of the explicit-form geodesic equation.
///
/// Values are indexed by a real parameter `t`: the base coordinate `x` for
/// real families, the path or affine parameter for complex ones. Slopes and
/// second derivatives are taken with respect to the chart variable.
#[derive(Clone)]
pub struct ExplicitGeodesic {
    family: Family,
    base_param: f64,
    curve: SharedCurve,
    nodes: Vec<f64>,
    termination: Termination,
}

impl std::fmt::Debug for ExplicitGeodesic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExplicitGeodesic")
            .field("family", &self.family)
            .field("base_param", &self.base_param)
            .field("support", &self.support())
            .field("nodes", &self.nodes.len())
            .field("termination", &self.termination)
            .finish()
    }
}

impl ExplicitGeodesic {
    /// Wrap an arbitrary curve. `family` selects the explicit equation the
    /// curve is meant to satisfy (AdS signs share one).
    pub fn from_curve(
        family: Family,
        base_param: f64,
        curve: SharedCurve,
        mut nodes: Vec<f64>,
        termination: Termination,
    ) -> Self {
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        Self {
            family: canonical(family),
            base_param,
            curve,
            nodes,
            termination,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_complex(&self) -> bool {
        self.family == Family::ComplexSphere
    }

    pub fn base_param(&self) -> f64 {
        self.base_param
    }

    pub fn base_point(&self) -> Complex64 {
        self.curve
            .eval(self.base_param)
            .map(|s| s.point)
            .unwrap_or(Complex64::new(self.base_param, 0.0))
    }

    pub fn support(&self) -> (f64, f64) {
        self.curve.domain()
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// Parameter values where the integrator placed nodes, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn at(&self, t: f64) -> Option<CurveSample> {
        self.curve.eval(t)
    }

    pub fn curve(&self) -> SharedCurve {
        Arc::clone(&self.curve)
    }

    /// Samples at the integration nodes.
    pub fn samples(&self) -> Vec<(f64, CurveSample)> {
        self.nodes.iter().filter_map(|&t| self.at(t).map(|s| (t, s))).collect()
    }

    /// Nodes refined by `per_step` equally spaced points inside each step.
    pub fn fine_grid(&self, per_step: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nodes.len() * (per_step + 1));
        for w in self.nodes.windows(2) {
            for k in 0..=per_step {
                out.push(w[0] + (w[1] - w[0]) * k as f64 / (per_step + 1) as f64);
            }
        }
        if let Some(&last) = self.nodes.last() {
            out.push(last);
        }
        out
    }
}

/// The explicit equation depends only on the sign class of the family.
fn canonical(family: Family) -> Family {
    match family {
        Family::AntiDeSitterMinus => Family::AntiDeSitterPlus,
        Family::KahlerNorden => Family::ComplexSphere,
        f => f,
    }
}
