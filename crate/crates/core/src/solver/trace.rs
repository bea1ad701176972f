//! Post-hoc checks on solver traces: per-step descent, containment, the
//! complexity bound, the relative-error bound, inexact certificates, and
//! observational rate diagnostics.

use super::frida::{StepRequest, DESCENT_SLACK};
use super::inner::Subproblem;
use super::{IterateRecord, Method, Result, SolveResult, SolveStatus, SolverConfig, SolverMode, ZETA};
use crate::curvature;
use crate::regression::DcObjective;
use serde::{Deserialize, Serialize};

/// Consecutive record pairs (y_k, y_{k+1}) joined by a step.
fn steps(trace: &[IterateRecord]) -> impl Iterator<Item = (&IterateRecord, &IterateRecord, f64)> {
    trace
        .windows(2)
        .filter_map(|w| w[0].step_dist.map(|d| (&w[0], &w[1], d)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentReport {
    pub ok: bool,
    pub kappa: f64,
    pub steps: usize,
    pub violations: Vec<usize>,
    /// Smallest value of f_k − κd_k² + slack − f_{k+1}.
    pub worst_margin: f64,
}

/// f(y_{k+1}) ≤ f(y_k) − κ·d_k² + 1e-10·(1 + |f(y_k)|) on every step.
pub fn check_descent(trace: &[IterateRecord], kappa: f64) -> DescentReport {
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    let mut n = 0;
    for (a, b, d) in steps(trace) {
        n += 1;
        let margin = a.f - kappa * d * d + DESCENT_SLACK * (1.0 + a.f.abs()) - b.f;
        worst = worst.min(margin);
        if !(margin >= 0.0) {
            violations.push(a.k);
        }
    }
    DescentReport {
        ok: violations.is_empty(),
        kappa,
        steps: n,
        violations,
        worst_margin: worst,
    }
}

/// Largest d(c, y_k) over the trace and whether it stays within ρ_ex.
pub fn check_containment(obj: &DcObjective, trace: &[IterateRecord]) -> Result<(bool, f64)> {
    let ds = obj.dataset();
    let s = ds.safe_set();
    let mut worst: f64 = 0.0;
    for r in trace {
        worst = worst.max(ds.manifold().distance(&s.c, &r.point)?);
    }
    Ok((worst <= s.rho_ex, worst))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub ok: bool,
    pub prefixes: Vec<bool>,
    /// max over N of min_{k≤N} d_k divided by the bound.
    pub tightest_ratio: f64,
}

/// min_{k≤N} d_k ≤ √((f₀ − f_{N+1} + slack_N)/(κ(N+1))) for every N, where
/// slack_N accumulates the per-step descent allowance.
pub fn complexity_check(trace: &[IterateRecord], kappa: f64) -> ComplexityReport {
    let mut prefixes = Vec::new();
    let mut tightest: f64 = 0.0;
    let mut min_d = f64::INFINITY;
    let mut slack = 0.0;
    let Some(f0) = trace.first().map(|r| r.f) else {
        return ComplexityReport {
            ok: true,
            prefixes,
            tightest_ratio: 0.0,
        };
    };
    for (n, (a, b, d)) in steps(trace).enumerate() {
        min_d = min_d.min(d);
        slack += DESCENT_SLACK * (1.0 + a.f.abs());
        let gap = (f0 - b.f + slack).max(0.0);
        let bound = (gap / (kappa * (n + 1) as f64)).sqrt();
        let ratio = if bound > 0.0 {
            min_d / bound
        } else if min_d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        tightest = tightest.max(ratio);
        prefixes.push(min_d <= bound);
    }
    ComplexityReport {
        ok: prefixes.iter().all(|&b| b),
        prefixes,
        tightest_ratio: tightest,
    }
}

/// C_rel = L_log(ρ)·G_h + L_h + τ̄ (+ ζ for inexact steps) with
/// G_h = 2w₋(r + ρ_ex) bounding ‖grad h‖ on the existence ball and
/// L_h = 2w₋ζ_ex.
pub fn relative_error_constant(obj: &DcObjective, tau_max: f64, mode: SolverMode) -> Result<f64> {
    let s = obj.dataset().safe_set();
    let w_minus = obj.weights().w_minus;
    let l_a = curvature::l_log_pm(s.rho, obj.profile())?;
    let g_h = 2.0 * w_minus * (s.r + s.rho_ex);
    let l_h = 2.0 * w_minus * obj.zeta_ex();
    let extra = match mode {
        SolverMode::Exact => 0.0,
        SolverMode::Inexact => ZETA,
    };
    Ok(l_a * g_h + l_h + tau_max + extra)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeErrorReport {
    pub ok: bool,
    pub c_rel: f64,
    pub worst_ratio: f64,
    pub violations: Vec<usize>,
}

/// Absolute allowance for rounding in gradient evaluations.
const REL_ERROR_FLOOR: f64 = 1e-12;

/// ‖grad f(y_{k+1})‖ ≤ 1.05·C_rel·d_k on every step. For exact steps the
/// measured inner residual ‖grad Φ_k(y_{k+1})‖ is added, since the
/// subproblem is only solved to tolerance.
pub fn check_relative_error(trace: &[IterateRecord], c_rel: f64, mode: SolverMode) -> RelativeErrorReport {
    let mut violations = Vec::new();
    let mut worst: f64 = 0.0;
    for (a, b, d) in steps(trace) {
        let residual = match mode {
            SolverMode::Exact => a.inner_residual.unwrap_or(0.0),
            SolverMode::Inexact => 0.0,
        };
        let allowed = 1.05 * c_rel * d + residual + REL_ERROR_FLOOR;
        if c_rel * d > 0.0 {
            worst = worst.max((b.grad_norm - residual) / (c_rel * d));
        }
        if b.grad_norm > allowed {
            violations.push(a.k);
        }
    }
    RelativeErrorReport {
        ok: violations.is_empty(),
        c_rel,
        worst_ratio: worst,
        violations,
    }
}

/// Recomputes every stored inexact certificate from the objective alone.
pub fn recheck_certificates(obj: &DcObjective, trace: &[IterateRecord], cfg: &SolverConfig) -> Result<bool> {
    let m = obj.manifold();
    for (a, b, _) in steps(trace) {
        let Some(cert) = a.certificate else { continue };
        let req = StepRequest::assemble(obj, &a.point, cfg)?;
        let sub = Subproblem {
            obj,
            y_k: a.point.clone(),
            xi: req.xi.clone(),
            tau: req.tau,
            r_k: req.r_k,
            mu: req.mu,
            lipschitz: req.lipschitz,
        };
        let residual = sub.gradient(&b.point)?.norm();
        let d = m.distance(&a.point, &b.point)?;
        let eps_k = cfg.epsilon.eps(a.k);
        let ok = residual <= eps_k.min(ZETA * d)
            && sub.value(&b.point)? <= sub.value(&a.point)?
            && eps_k == cert.eps_k;
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub label: String,
    pub steps: usize,
    /// Least-squares slope of ln d_k against k over the tail.
    pub log_linear_slope: Option<f64>,
    /// Least-squares slope of ln d_k against ln(k + 1) over the tail.
    pub log_log_slope: Option<f64>,
    pub finite_termination: bool,
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Observational step-length diagnostics; nothing here is asserted.
pub fn rate_diagnostics(trace: &[IterateRecord]) -> RateReport {
    let d: Vec<f64> = trace.iter().filter_map(|r| r.step_dist).collect();
    let first_zero = d.iter().position(|&x| x == 0.0);
    let finite_termination = match first_zero {
        Some(i) => i > 0 && d[i..].iter().all(|&x| x == 0.0),
        None => false,
    };
    let mut report = RateReport {
        label: "diagnostic only".into(),
        steps: d.len(),
        log_linear_slope: None,
        log_log_slope: None,
        finite_termination,
    };
    if d.len() < 10 {
        return report;
    }
    let start = d.len() / 2;
    let (mut ks, mut lks, mut lds) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &x) in d.iter().enumerate().skip(start) {
        if x > 0.0 {
            ks.push(k as f64);
            lks.push(((k + 1) as f64).ln());
            lds.push(x.ln());
        }
    }
    report.log_linear_slope = ls_slope(&ks, &lds);
    report.log_log_slope = ls_slope(&lks, &lds);
    report
}

/// All runtime invariants of one solve, recomputed from its trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub descent: DescentReport,
    pub containment_ok: bool,
    pub max_center_distance: f64,
    pub tau_floor_ok: bool,
    pub tau_max: f64,
    pub certificates_ok: Option<bool>,
    pub relative_error: Option<RelativeErrorReport>,
    pub complexity: ComplexityReport,
    pub stationarity_ok: bool,
    pub rate: RateReport,
}

impl TraceReport {
    pub fn ok(&self) -> bool {
        self.descent.ok
            && self.containment_ok
            && self.tau_floor_ok
            && self.certificates_ok.unwrap_or(true)
            && self.relative_error.as_ref().is_none_or(|r| r.ok)
            && self.complexity.ok
            && self.stationarity_ok
    }
}

pub fn validate_trace(obj: &DcObjective, result: &SolveResult, cfg: &SolverConfig) -> Result<TraceReport> {
    let trace = &result.trace;
    let frida_mode = match result.method {
        Method::FridaExact => Some(SolverMode::Exact),
        Method::FridaInexact => Some(SolverMode::Inexact),
        Method::GradientDescent => None,
    };
    let kappa = result.kappa;
    let descent = match frida_mode {
        Some(_) => check_descent(trace, kappa),
        // Gradient descent promises monotonicity only.
        None => check_descent(trace, 0.0),
    };
    let (containment_ok, max_center_distance) = check_containment(obj, trace)?;
    let taus: Vec<f64> = trace.iter().filter_map(|r| r.tau).collect();
    let tau_max = taus.iter().copied().fold(0.0, f64::max);
    let tau_floor_ok = taus.iter().all(|&t| t >= 1.0);
    let (certificates_ok, relative_error) = match frida_mode {
        Some(mode) => {
            let cert = match mode {
                SolverMode::Inexact => Some(recheck_certificates(obj, trace, cfg)?),
                SolverMode::Exact => None,
            };
            let c_rel = relative_error_constant(obj, tau_max, mode)?;
            (cert, Some(check_relative_error(trace, c_rel, mode)))
        }
        None => (None, None),
    };
    let complexity = match frida_mode {
        Some(_) => complexity_check(trace, kappa),
        None => ComplexityReport {
            ok: true,
            prefixes: Vec::new(),
            tightest_ratio: 0.0,
        },
    };
    let stationarity_ok = result.status != SolveStatus::Stationary
        || result.grad_norm <= cfg.grad_tol
        || result.stationarity_escape;
    Ok(TraceReport {
        descent,
        containment_ok,
        max_center_distance,
        tau_floor_ok,
        tau_max,
        certificates_ok,
        relative_error,
        complexity,
        stationarity_ok,
        rate: rate_diagnostics(trace),
    })
}
