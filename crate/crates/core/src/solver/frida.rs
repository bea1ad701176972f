use super::inner::{inner_solve, InnerResult, StopRule, Subproblem};
use super::{
    InexactCertificate, IterateRecord, Method, Result, SolveResult, SolveStatus, SolverConfig,
    SolverError, SolverMode, ZETA,
};
use crate::curvature::{self, TauInputs};
use crate::geometry::{Point, Tangent};
use crate::regression::DcObjective;

/// Per-step descent slack relative to 1 + |f(y_k)|.
pub(crate) const DESCENT_SLACK: f64 = 1e-10;

/// Everything an outer step needs about the current iterate.
#[derive(Clone, Debug)]
pub struct StepRequest {
    pub y_k: Point,
    pub grad_f_norm: f64,
    /// grad h(y_k).
    pub xi: Tangent,
    pub r_k: f64,
    pub tau: f64,
    pub mu: f64,
    pub lipschitz: f64,
}

impl StepRequest {
    /// Assembles r_k, τ_k, μ_k and L_k at `y_k`.
    pub fn assemble(obj: &DcObjective, y_k: &Point, cfg: &SolverConfig) -> Result<Self> {
        let ds = obj.dataset();
        let s = ds.safe_set();
        let profile = obj.profile();
        let w = obj.weights();
        let eval = obj.evaluate(y_k)?;
        let grad_f_norm = eval.grad_f.norm();
        let grad_h_norm = eval.grad_h.norm();
        let r_k = curvature::trust_radius(ds.boundary_distance(y_k)?, cfg.theta, s.rho)?;
        let tau = curvature::tau(
            &TauInputs {
                r_k,
                grad_h_norm,
                grad_f_norm,
                w_plus: w.w_plus,
                w_minus: w.w_minus,
                delta_ex: obj.delta_ex(),
                eta0: cfg.eta0,
            },
            profile,
        )?;
        let (mu, lipschitz) = curvature::subproblem_moduli(
            r_k,
            grad_h_norm,
            tau,
            w.w_plus,
            obj.delta_ex(),
            obj.zeta_ex(),
            profile,
        )?;
        Ok(StepRequest {
            y_k: y_k.clone(),
            grad_f_norm,
            xi: eval.grad_h,
            r_k,
            tau,
            mu,
            lipschitz,
        })
    }

    fn subproblem<'o, 'a>(&self, obj: &'o DcObjective<'a>) -> Subproblem<'o, 'a> {
        Subproblem {
            obj,
            y_k: self.y_k.clone(),
            xi: self.xi.clone(),
            tau: self.tau,
            r_k: self.r_k,
            mu: self.mu,
            lipschitz: self.lipschitz,
        }
    }
}

/// Result of an inexact step.
#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    Step(InnerResult),
    /// The small-step escape fired: y_k is declared stationary.
    Stationary(InnerResult),
}

/// Minimizes Φ_k over the trust ball to ‖grad Φ_k‖ ≤ tol·max(1, ‖grad f(y_k)‖).
pub fn frida_step_exact(obj: &DcObjective, req: &StepRequest, cfg: &SolverConfig) -> Result<InnerResult> {
    let tol = cfg.exact_rel_tol * req.grad_f_norm.max(1.0);
    let res = inner_solve(&req.subproblem(obj), StopRule::Exact { tol }, cfg.inner_max, cfg.record_inner)?;
    if !(res.dist < req.r_k) {
        return Err(SolverError::Invariant(format!(
            "exact step landed on the trust-ball boundary (d = {}, r_k = {})",
            res.dist, req.r_k
        )));
    }
    if res.phi > res.phi_start + 1e-14 * (1.0 + res.phi_start.abs()) {
        return Err(SolverError::Invariant(format!(
            "exact step increased the subproblem objective ({} > {})",
            res.phi, res.phi_start
        )));
    }
    Ok(res)
}

/// Finds ŷ with ‖grad Φ_k(ŷ)‖ ≤ min(ε_k, ζ·d(y_k, ŷ)) and Φ_k(ŷ) ≤ Φ_k(y_k).
pub fn frida_step_inexact(
    obj: &DcObjective,
    req: &StepRequest,
    eps_k: f64,
    cfg: &SolverConfig,
) -> Result<StepOutcome> {
    let stop = StopRule::Inexact {
        eps: eps_k,
        grad_tol: cfg.grad_tol,
    };
    let res = inner_solve(&req.subproblem(obj), stop, cfg.inner_max, cfg.record_inner)?;
    Ok(if res.escaped {
        StepOutcome::Stationary(res)
    } else {
        StepOutcome::Step(res)
    })
}

struct Run {
    trace: Vec<IterateRecord>,
    tau_max: f64,
    best_grad: f64,
}

/// Runs FRIDA from `y0`, which must lie strictly inside the existence ball.
pub fn frida_solve(obj: &DcObjective, y0: &Point, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let ds = obj.dataset();
    let y0 = ds.manifold().point(y0.coords().to_vec())?;
    let slack = ds.boundary_distance(&y0).map_err(|e| SolverError::Precondition(e.to_string()))?;
    if !(slack > 0.0) {
        return Err(SolverError::Precondition(
            "initial point lies on the boundary of the existence ball".into(),
        ));
    }
    let method = match cfg.mode {
        SolverMode::Exact => Method::FridaExact,
        SolverMode::Inexact => Method::FridaInexact,
    };
    let kappa = cfg.mode.kappa();
    let mut run = Run {
        trace: Vec::new(),
        tau_max: 0.0,
        best_grad: f64::INFINITY,
    };
    let mut y = y0;
    let mut f = obj.value(&y)?;
    let mut gn = obj.gradient(&y)?.norm();
    let mut escape = false;
    let mut outcome: std::result::Result<SolveStatus, SolverError> = Ok(SolveStatus::OuterBudget);
    for k in 0..cfg.outer_max {
        run.best_grad = run.best_grad.min(gn);
        if gn <= cfg.grad_tol {
            outcome = Ok(SolveStatus::Stationary);
            break;
        }
        match outer_step(obj, &y, f, k, cfg, kappa) {
            Ok(Some((record, next, f_next, gn_next))) => {
                run.tau_max = run.tau_max.max(record.tau.unwrap_or(0.0));
                run.trace.push(record);
                y = next;
                f = f_next;
                gn = gn_next;
            }
            Ok(None) => {
                escape = true;
                outcome = Ok(SolveStatus::Stationary);
                break;
            }
            Err(e) => {
                outcome = Err(e);
                break;
            }
        }
    }
    if matches!(outcome, Ok(SolveStatus::OuterBudget)) && gn <= cfg.grad_tol {
        outcome = Ok(SolveStatus::Stationary);
    }
    run.best_grad = run.best_grad.min(gn);
    let k_final = run.trace.len();
    run.trace.push(IterateRecord::new(k_final, y.clone(), f, gn));
    let (status, message) = match outcome {
        // Near the boundary r_k can drop below grad_tol, so the escape may
        // fire while the gradient itself is still large; say so.
        Ok(SolveStatus::Stationary) if escape && gn > cfg.grad_tol => (
            SolveStatus::Stationary,
            format!(
                "stationary: inexact step collapsed below the gradient tolerance \
                 (|grad f| = {gn:e}, distance to the existence-ball boundary {:e})",
                ds.boundary_distance(&y).unwrap_or(f64::NAN)
            ),
        ),
        Ok(SolveStatus::Stationary) if escape => (
            SolveStatus::Stationary,
            "stationary: inexact step collapsed below the gradient tolerance".to_string(),
        ),
        Ok(SolveStatus::Stationary) => (SolveStatus::Stationary, "gradient tolerance reached".into()),
        Ok(s) => (s, format!("outer budget of {} iterations exhausted", cfg.outer_max)),
        Err(e @ SolverError::InnerBudget { .. }) => (SolveStatus::InnerBudget, e.to_string()),
        Err(e) => (SolveStatus::InvariantBreach, e.to_string()),
    };
    Ok(SolveResult {
        method,
        status,
        point: y,
        f,
        grad_norm: gn,
        best_grad_norm: run.best_grad,
        trace: run.trace,
        kappa,
        tau_max: run.tau_max,
        stationarity_escape: escape,
        message,
    })
}

/// One outer iteration with the runtime descent and containment checks.
/// `Ok(None)` signals the inexact stationarity escape.
fn outer_step(
    obj: &DcObjective,
    y: &Point,
    f: f64,
    k: usize,
    cfg: &SolverConfig,
    kappa: f64,
) -> Result<Option<(IterateRecord, Point, f64, f64)>> {
    let ds = obj.dataset();
    let m = ds.manifold();
    let req = StepRequest::assemble(obj, y, cfg)?;
    let mut record = IterateRecord::new(k, y.clone(), f, req.grad_f_norm);
    let inner = match cfg.mode {
        SolverMode::Exact => frida_step_exact(obj, &req, cfg)?,
        SolverMode::Inexact => {
            let eps_k = cfg.epsilon.eps(k);
            match frida_step_inexact(obj, &req, eps_k, cfg)? {
                StepOutcome::Stationary(_) => return Ok(None),
                StepOutcome::Step(res) => {
                    let cert = InexactCertificate {
                        eps_k,
                        residual: res.residual,
                        zeta_d: ZETA * res.dist,
                        phi_new: res.phi,
                        phi_old: res.phi_start,
                    };
                    if !cert.holds() {
                        return Err(SolverError::Invariant(format!(
                            "inexact certificate failed at k = {k}: {cert:?}"
                        )));
                    }
                    record.certificate = Some(cert);
                    res
                }
            }
        }
    };
    let next = inner.point;
    let d = m.distance(y, &next)?;
    let f_next = obj.value(&next)?;
    let gn_next = obj.gradient(&next)?.norm();
    if f_next > f - kappa * d * d + DESCENT_SLACK * (1.0 + f.abs()) {
        return Err(SolverError::Invariant(format!(
            "descent failed at k = {k}: f = {f}, f_next = {f_next}, d = {d}, kappa = {kappa}"
        )));
    }
    let dc = m.distance(&ds.safe_set().c, &next)?;
    if dc > ds.safe_set().rho_ex {
        return Err(SolverError::Invariant(format!(
            "iterate {} left the existence ball (d(c, y) = {dc}, rho_ex = {})",
            k + 1,
            ds.safe_set().rho_ex
        )));
    }
    record.step_dist = Some(d);
    record.tau = Some(req.tau);
    record.r_k = Some(req.r_k);
    record.mu = Some(req.mu);
    record.lipschitz = Some(req.lipschitz);
    record.grad_h_norm = Some(req.xi.norm());
    record.inner_iters = Some(inner.iters);
    record.inner_residual = Some(inner.residual);
    record.projections = Some(inner.projections);
    Ok(Some((record, next, f_next, gn_next)))
}
