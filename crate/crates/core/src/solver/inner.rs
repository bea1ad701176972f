use super::{Result, SolverError, ZETA};
use crate::geometry::{Point, Tangent};
use crate::regression::DcObjective;

/// Φ_k(y) = g(y) − ⟨grad h(y_k), log_{y_k}(y)⟩ + (τ/2)·d²(y_k, y) on the
/// closed ball of radius `r_k` about `y_k`.
#[derive(Clone, Debug)]
pub struct Subproblem<'o, 'a> {
    pub obj: &'o DcObjective<'a>,
    pub y_k: Point,
    /// grad h(y_k).
    pub xi: Tangent,
    pub tau: f64,
    pub r_k: f64,
    pub mu: f64,
    pub lipschitz: f64,
}

impl Subproblem<'_, '_> {
    pub fn value(&self, y: &Point) -> Result<f64> {
        let m = self.obj.manifold();
        let l = m.log(&self.y_k, y)?;
        let d = l.norm();
        Ok(self.obj.value_g(y)? - self.xi.dot(&l) + 0.5 * self.tau * d * d)
    }

    /// grad Φ(y) = grad g(y) − (d log_{y_k})*_y(ξ) − τ·log_y(y_k).
    pub fn gradient(&self, y: &Point) -> Result<Tangent> {
        let m = self.obj.manifold();
        let mut g = self.obj.grad_g(y)?;
        g.axpy(-1.0, &m.dlog_adjoint(&self.y_k, y, &self.xi)?);
        g.axpy(-self.tau, &m.log(y, &self.y_k)?);
        Ok(g)
    }
}

/// When the inner loop may stop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// ‖grad Φ‖ ≤ tol.
    Exact { tol: f64 },
    /// ‖grad Φ(ŷ)‖ ≤ min(ε_k, ζ·d(y_k, ŷ)) and Φ(ŷ) ≤ Φ(y_k). If the loop
    /// stalls at a point with ‖grad Φ‖ ≤ min(ε_k, grad_tol) and
    /// d(y_k, ŷ) ≤ grad_tol, y_k is reported stationary instead.
    Inexact { eps: f64, grad_tol: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerResult {
    pub point: Point,
    pub iters: usize,
    pub residual: f64,
    pub dist: f64,
    pub phi: f64,
    pub phi_start: f64,
    pub projections: usize,
    pub escaped: bool,
    pub phi_history: Vec<f64>,
}

/// Stall detection: no 10% residual improvement within this many iterations.
const STALL_WINDOW: usize = 25;

/// Projected Riemannian gradient descent with step 1/L; iterates leaving the
/// trust ball are pulled back radially along log_{y_k}.
pub fn inner_solve(
    sub: &Subproblem,
    stop: StopRule,
    inner_max: usize,
    record: bool,
) -> Result<InnerResult> {
    let m = sub.obj.manifold();
    let phi_start = sub.value(&sub.y_k)?;
    let mut y = sub.y_k.clone();
    let mut projections = 0;
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut best_at = 0;
    let mut residual = f64::INFINITY;
    let mut target = 0.0;
    for it in 0..=inner_max {
        let grad = sub.gradient(&y)?;
        residual = grad.norm();
        let dist = m.distance(&sub.y_k, &y)?;
        if record {
            history.push(sub.value(&y)?);
        }
        let finish = |point: Point, phi: f64, escaped: bool, history: Vec<f64>| InnerResult {
            point,
            iters: it,
            residual,
            dist,
            phi,
            phi_start,
            projections,
            escaped,
            phi_history: history,
        };
        match stop {
            StopRule::Exact { tol } => {
                target = tol;
                if residual <= tol {
                    let phi = sub.value(&y)?;
                    return Ok(finish(y, phi, false, history));
                }
            }
            StopRule::Inexact { eps, grad_tol } => {
                target = eps.min(ZETA * dist);
                if residual <= target {
                    let phi = sub.value(&y)?;
                    if phi <= phi_start {
                        return Ok(finish(y, phi, false, history));
                    }
                }
                if residual < 0.9 * best {
                    best = residual;
                    best_at = it;
                }
                let stalled = it - best_at >= STALL_WINDOW || it == inner_max;
                if stalled && residual <= eps.min(grad_tol) && dist <= grad_tol {
                    return Ok(finish(sub.y_k.clone(), phi_start, true, history));
                }
            }
        }
        if it == inner_max {
            break;
        }
        let trial = m.exp(&y, &grad.scaled(-1.0 / sub.lipschitz))?;
        let v = m.log(&sub.y_k, &trial)?;
        let vn = v.norm();
        y = if vn > sub.r_k {
            projections += 1;
            m.exp(&sub.y_k, &v.scaled(sub.r_k / vn))?
        } else {
            trial
        };
    }
    Err(SolverError::InnerBudget {
        iterations: inner_max,
        residual,
        target,
    })
}
