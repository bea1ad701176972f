use super::{IterateRecord, Method, Result, SolveResult, SolveStatus, SolverConfig, SolverError};
use crate::geometry::Point;
use crate::regression::DcObjective;

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_HALVINGS: usize = 60;
/// Rounding allowance in the sufficient-decrease test, relative to 1 + |f|.
const ROUNDING_SLACK: f64 = 1e-15;

/// Riemannian gradient descent with Armijo backtracking, started at
/// t₀ = 1/(2w₊ζ_ex + 2w₋ζ_ex). Trial points outside the existence ball are
/// rejected like insufficient-decrease points.
pub fn gd_solve(obj: &DcObjective, y0: &Point, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let ds = obj.dataset();
    let m = ds.manifold();
    let s = ds.safe_set();
    let y0 = m.point(y0.coords().to_vec())?;
    let slack = ds
        .boundary_distance(&y0)
        .map_err(|e| SolverError::Precondition(e.to_string()))?;
    if !(slack > 0.0) {
        return Err(SolverError::Precondition(
            "initial point lies on the boundary of the existence ball".into(),
        ));
    }
    let w = obj.weights();
    let t0 = 1.0 / (2.0 * (w.w_plus + w.w_minus) * obj.zeta_ex());
    let mut y = y0;
    let mut f = obj.value(&y)?;
    let mut grad = obj.gradient(&y)?;
    let mut best = grad.norm();
    let mut trace = Vec::new();
    let mut status = SolveStatus::OuterBudget;
    let mut message = format!("outer budget of {} iterations exhausted", cfg.outer_max);
    for k in 0..cfg.outer_max {
        let gn = grad.norm();
        best = best.min(gn);
        if gn <= cfg.grad_tol {
            status = SolveStatus::Stationary;
            message = "gradient tolerance reached".into();
            break;
        }
        let mut t = t0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = m.exp(&y, &grad.scaled(-t))?;
            if m.distance(&s.c, &trial)? < s.rho_ex {
                let ft = obj.value(&trial)?;
                if ft <= f - ARMIJO_C * t * gn * gn + ROUNDING_SLACK * (1.0 + f.abs()) {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= BACKTRACK;
        }
        let Some((next, f_next)) = accepted else {
            message = format!("line search stalled at k = {k}");
            break;
        };
        let mut rec = IterateRecord::new(k, y.clone(), f, gn);
        rec.step_dist = Some(m.distance(&y, &next)?);
        rec.step_size = Some(t);
        trace.push(rec);
        y = next;
        f = f_next;
        grad = obj.gradient(&y)?;
    }
    let gn = grad.norm();
    if status != SolveStatus::Stationary && gn <= cfg.grad_tol {
        status = SolveStatus::Stationary;
        message = "gradient tolerance reached".into();
    }
    best = best.min(gn);
    trace.push(IterateRecord::new(trace.len(), y.clone(), f, gn));
    Ok(SolveResult {
        method: Method::GradientDescent,
        status,
        point: y,
        f,
        grad_norm: gn,
        best_grad_norm: best,
        trace,
        kappa: 0.0,
        tau_max: 0.0,
        stationarity_escape: false,
        message,
    })
}
