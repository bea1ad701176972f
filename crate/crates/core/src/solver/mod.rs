//! FRIDA (exact and inexact proximal DC steps), the inner subproblem
//! solver, a gradient-descent baseline, and trace diagnostics.

mod export;
mod frida;
mod gd;
mod inner;
mod trace;

pub use export::{trace_csv, write_trace_csv, TRACE_COLUMNS};
pub use frida::{frida_solve, frida_step_exact, frida_step_inexact, StepOutcome, StepRequest};
pub use gd::gd_solve;
pub use inner::{inner_solve, InnerResult, StopRule, Subproblem};
pub use trace::{
    check_containment, check_descent, check_relative_error, complexity_check, rate_diagnostics,
    recheck_certificates, relative_error_constant, validate_trace, ComplexityReport,
    DescentReport, RateReport, RelativeErrorReport, TraceReport,
};

use crate::curvature::CurvatureError;
use crate::geometry::{GeometryError, Point};
use crate::regression::RegressionError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The inexactness constant of the inexact step.
pub const ZETA: f64 = 0.25;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("inner solver exhausted {iterations} iterations (residual {residual:e}, target {target:e})")]
    InnerBudget {
        iterations: usize,
        residual: f64,
        target: f64,
    },
    #[error("invariant breach: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    Exact,
    Inexact,
}

impl SolverMode {
    /// Per-step descent constant κ.
    pub fn kappa(self) -> f64 {
        match self {
            SolverMode::Exact => 0.5,
            SolverMode::Inexact => 0.25,
        }
    }
}

impl std::str::FromStr for SolverMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SolverMode::Exact),
            "inexact" => Ok(SolverMode::Inexact),
            other => Err(format!("unknown mode '{other}' (expected exact or inexact)")),
        }
    }
}

/// Summable tolerance sequence ε_k for the inexact step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonSchedule {
    /// ε_k = eps0 · ratio^k with 0 < ratio < 1.
    Geometric { eps0: f64, ratio: f64 },
    /// ε_k = eps0 / (k + 1)^power with power > 1.
    Polynomial { eps0: f64, power: f64 },
}

impl EpsilonSchedule {
    pub fn eps(&self, k: usize) -> f64 {
        match *self {
            EpsilonSchedule::Geometric { eps0, ratio } => eps0 * ratio.powi(k as i32),
            EpsilonSchedule::Polynomial { eps0, power } => eps0 / ((k + 1) as f64).powf(power),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EpsilonSchedule::Geometric { eps0, ratio } => eps0 > 0.0 && ratio > 0.0 && ratio < 1.0,
            EpsilonSchedule::Polynomial { eps0, power } => eps0 > 0.0 && power > 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidConfig(format!(
                "epsilon schedule {self:?} is not summable"
            )))
        }
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule::Polynomial {
            eps0: 1e-3,
            power: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub theta: f64,
    pub eta0: f64,
    pub epsilon: EpsilonSchedule,
    pub outer_max: usize,
    pub inner_max: usize,
    pub grad_tol: f64,
    /// Exact steps stop at ‖grad Φ‖ ≤ exact_rel_tol · max(1, ‖grad f(y_k)‖).
    pub exact_rel_tol: f64,
    /// Record Φ along inner iterations (diagnostics only).
    pub record_inner: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolverMode::Exact,
            theta: 0.9,
            eta0: 1e-2,
            epsilon: EpsilonSchedule::default(),
            outer_max: 500,
            inner_max: 1000,
            grad_tol: 1e-8,
            exact_rel_tol: 1e-10,
            record_inner: false,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn inexact() -> Self {
        SolverConfig {
            mode: SolverMode::Inexact,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "theta must lie in (0, 1), got {}",
                self.theta
            )));
        }
        if !(self.eta0 > 0.0) {
            return Err(SolverError::InvalidConfig("eta0 must be positive".into()));
        }
        if !(self.grad_tol > 0.0) || !(self.exact_rel_tol > 0.0) {
            return Err(SolverError::InvalidConfig("tolerances must be positive".into()));
        }
        if self.inner_max == 0 {
            return Err(SolverError::InvalidConfig("inner_max must be positive".into()));
        }
        self.epsilon.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Stationary,
    OuterBudget,
    /// An inner solve ran out of iterations; the last accepted iterate is kept.
    InnerBudget,
    InvariantBreach,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FridaExact,
    FridaInexact,
    GradientDescent,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::FridaExact => "frida_exact",
            Method::FridaInexact => "frida_inexact",
            Method::GradientDescent => "gd",
        }
    }
}

/// The two inequalities certified by an accepted inexact step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InexactCertificate {
    pub eps_k: f64,
    pub residual: f64,
    pub zeta_d: f64,
    pub phi_new: f64,
    pub phi_old: f64,
}

impl InexactCertificate {
    pub fn holds(&self) -> bool {
        self.residual <= self.eps_k.min(self.zeta_d) && self.phi_new <= self.phi_old
    }
}

/// One iterate y_k and, unless it is the last, the step to y_{k+1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub point: Point,
    pub f: f64,
    pub grad_norm: f64,
    pub step_dist: Option<f64>,
    pub tau: Option<f64>,
    pub r_k: Option<f64>,
    pub mu: Option<f64>,
    pub lipschitz: Option<f64>,
    pub grad_h_norm: Option<f64>,
    pub inner_iters: Option<usize>,
    pub inner_residual: Option<f64>,
    pub projections: Option<usize>,
    pub step_size: Option<f64>,
    pub certificate: Option<InexactCertificate>,
}

impl IterateRecord {
    pub fn new(k: usize, point: Point, f: f64, grad_norm: f64) -> Self {
        IterateRecord {
            k,
            point,
            f,
            grad_norm,
            step_dist: None,
            tau: None,
            r_k: None,
            mu: None,
            lipschitz: None,
            grad_h_norm: None,
            inner_iters: None,
            inner_residual: None,
            projections: None,
            step_size: None,
            certificate: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub method: Method,
    pub status: SolveStatus,
    pub point: Point,
    pub f: f64,
    pub grad_norm: f64,
    pub best_grad_norm: f64,
    pub trace: Vec<IterateRecord>,
    pub kappa: f64,
    pub tau_max: f64,
    /// Set when the inexact loop declared stationarity through the
    /// small-step escape rather than through the gradient tolerance.
    pub stationarity_escape: bool,
    pub message: String,
}

impl SolveResult {
    /// Number of accepted steps.
    pub fn outer_iterations(&self) -> usize {
        self.trace.iter().filter(|r| r.step_dist.is_some()).count()
    }

    pub fn inner_iterations(&self) -> usize {
        self.trace.iter().filter_map(|r| r.inner_iters).sum()
    }
}

#[cfg(test)]
mod tests;
