//! Curvature comparison constants and the scalar parameters of the proximal
//! DC iteration (trust radius, proximal weight τ, subproblem moduli).

use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Below this value of t·√Λ the closed forms switch to Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("radius {t} is outside the comparison domain [0, {limit})")]
    Domain { t: f64, limit: f64 },
    #[error("boundary distance {0} is not positive: the iterate left the existence ball")]
    LeftExistenceBall(f64),
    #[error("subproblem is not strongly convex (mu = {0})")]
    NotStronglyConvex(f64),
    #[error("invalid safe set: {0}")]
    InvalidSafeSet(String),
}

pub type Result<T> = std::result::Result<T, CurvatureError>;

/// Curvature bounds −Λ₋ ≤ sec ≤ Λ₊, ‖∇R‖ ≤ L_R and ‖R‖ ≤ c_n·Λ₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub l_r: f64,
    pub c_n: f64,
    pub lambda_zero: f64,
}

impl CurvatureProfile {
    pub fn new(lambda_minus: f64, lambda_plus: f64, l_r: f64, c_n: f64) -> Self {
        CurvatureProfile {
            lambda_minus,
            lambda_plus,
            l_r,
            c_n,
            lambda_zero: lambda_minus.max(lambda_plus),
        }
    }

    pub fn flat() -> Self {
        Self::new(0.0, 0.0, 0.0, 2.0)
    }

    /// Bounds valid on a product of manifolds with profiles `self` and `other`.
    pub fn join(&self, other: &CurvatureProfile) -> Self {
        Self::new(
            self.lambda_minus.max(other.lambda_minus),
            self.lambda_plus.max(other.lambda_plus),
            self.l_r.max(other.l_r),
            self.c_n.max(other.c_n),
        )
    }

    /// π/√Λ₊, or infinity when Λ₊ = 0.
    pub fn conjugate_radius(&self) -> f64 {
        if self.lambda_plus > 0.0 {
            PI / self.lambda_plus.sqrt()
        } else {
            f64::INFINITY
        }
    }
}

fn check_upper(t: f64, lambda_plus: f64) -> Result<f64> {
    let x = t * lambda_plus.sqrt();
    if !(t >= 0.0) || x >= PI {
        return Err(CurvatureError::Domain {
            t,
            limit: if lambda_plus > 0.0 {
                PI / lambda_plus.sqrt()
            } else {
                f64::INFINITY
            },
        });
    }
    Ok(x)
}

/// δ₊(t) = t√Λ₊·cot(t√Λ₊), or 1 when Λ₊ = 0.
pub fn delta_plus(t: f64, lambda_plus: f64) -> Result<f64> {
    let x = check_upper(t, lambda_plus)?;
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        return Ok(1.0 - x2 / 3.0 - x2 * x2 / 45.0 - 2.0 * x2 * x2 * x2 / 945.0);
    }
    Ok(x / x.tan())
}

/// ζ₋(t) = t√Λ₋·coth(t√Λ₋), or 1 when Λ₋ = 0.
pub fn zeta_minus(t: f64, lambda_minus: f64) -> f64 {
    let x = t.max(0.0) * lambda_minus.sqrt();
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        return 1.0 + x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0;
    }
    x / x.tanh()
}

/// α₊(t) = t√Λ₊ / sin(t√Λ₊).
pub fn alpha_plus(t: f64, lambda_plus: f64) -> Result<f64> {
    let x = check_upper(t, lambda_plus)?;
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        return Ok(1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0 + 31.0 * x2 * x2 * x2 / 15120.0);
    }
    Ok(x / x.sin())
}

/// b₋(t) = sinh(t√Λ₋) / (t√Λ₋).
pub fn b_minus(t: f64, lambda_minus: f64) -> f64 {
    let x = t.max(0.0) * lambda_minus.sqrt();
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        return 1.0 + x2 / 6.0 + x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0;
    }
    x.sinh() / x
}

/// c₋(t) = cosh(t√Λ₋).
pub fn c_minus(t: f64, lambda_minus: f64) -> f64 {
    (t.max(0.0) * lambda_minus.sqrt()).cosh()
}

/// Bound on the Hessian of y ↦ ⟨ξ, log_p(y)⟩ per unit ‖ξ‖ at radius t.
pub fn l_log_pm(t: f64, profile: &CurvatureProfile) -> Result<f64> {
    let a = alpha_plus(t, profile.lambda_plus)?;
    let b = b_minus(t, profile.lambda_minus);
    let c = c_minus(t, profile.lambda_minus);
    let bracket = profile.l_r * t * t * b.powi(3) / 6.0
        + 5.0 / 6.0 * profile.c_n * profile.lambda_zero * t * b * b * c;
    Ok(a.powi(3) * bracket)
}

/// r_k = min(θ·dist(y_k, ∂M_ex), ρ).
pub fn trust_radius(dist_to_boundary: f64, theta: f64, rho: f64) -> Result<f64> {
    if !(dist_to_boundary > 0.0) {
        return Err(CurvatureError::LeftExistenceBall(dist_to_boundary));
    }
    Ok((theta * dist_to_boundary).min(rho))
}

/// Inputs of the proximal weight τ_k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauInputs {
    pub r_k: f64,
    pub grad_h_norm: f64,
    pub grad_f_norm: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub delta_ex: f64,
    pub eta0: f64,
}

/// The three candidates whose maximum is τ_k.
pub fn tau_branches(inp: &TauInputs, profile: &CurvatureProfile) -> Result<[f64; 3]> {
    let dk = delta_plus(inp.r_k, profile.lambda_plus)?;
    let ll = l_log_pm(inp.r_k, profile)?;
    let first = (ll * inp.grad_h_norm - 2.0 * inp.w_plus * inp.delta_ex) / dk
        + 2.0 * inp.grad_f_norm / (dk * inp.r_k)
        + inp.eta0;
    Ok([first, 1.0 - 2.0 * inp.w_minus * inp.delta_ex, 1.0])
}

pub fn tau(inp: &TauInputs, profile: &CurvatureProfile) -> Result<f64> {
    let b = tau_branches(inp, profile)?;
    Ok(b[0].max(b[1]).max(b[2]))
}

/// Strong-convexity modulus μ and smoothness L of the proximal subproblem on
/// the trust ball of radius `r_k`.
#[allow(clippy::too_many_arguments)]
pub fn subproblem_moduli(
    r_k: f64,
    grad_h_norm: f64,
    tau_k: f64,
    w_plus: f64,
    delta_ex: f64,
    zeta_ex: f64,
    profile: &CurvatureProfile,
) -> Result<(f64, f64)> {
    let ll = l_log_pm(r_k, profile)?;
    let mu = 2.0 * w_plus * delta_ex + tau_k * delta_plus(r_k, profile.lambda_plus)?
        - ll * grad_h_norm;
    let l = 2.0 * w_plus * zeta_ex + ll * grad_h_norm + tau_k * zeta_minus(r_k, profile.lambda_minus);
    if !(mu > 0.0) {
        return Err(CurvatureError::NotStronglyConvex(mu));
    }
    Ok((mu, l))
}

/// Centre, data radius, existence radius, algorithmic radius and injectivity
/// bound of the region the solver works in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafeSetGeometry {
    pub c: Point,
    pub r: f64,
    pub rho_ex: f64,
    pub rho: f64,
    pub iota: f64,
}

impl SafeSetGeometry {
    /// Upper limit for ρ_ex: min(ι, π/√Λ₊) − r.
    pub fn rho_ex_limit(r: f64, iota: f64, profile: &CurvatureProfile) -> f64 {
        iota.min(profile.conjugate_radius()) - r
    }

    /// Upper limit for ρ: min(ι/2, π/(2√Λ₊)).
    pub fn rho_limit(iota: f64, profile: &CurvatureProfile) -> f64 {
        (0.5 * iota).min(0.5 * profile.conjugate_radius())
    }

    /// Places ρ_ex and ρ at fractions `lambda_ex`, `lambda_rho` of their
    /// admissible open intervals (r, limit).
    pub fn interpolate(
        c: Point,
        r: f64,
        iota: f64,
        profile: &CurvatureProfile,
        lambda_ex: f64,
        lambda_rho: f64,
    ) -> Result<Self> {
        let ex_hi = Self::rho_ex_limit(r, iota, profile);
        let rho_hi = Self::rho_limit(iota, profile);
        let s = SafeSetGeometry {
            c,
            r,
            rho_ex: r + lambda_ex * (ex_hi - r),
            rho: r + lambda_rho * (rho_hi - r),
            iota,
        };
        s.validate(profile)?;
        Ok(s)
    }

    pub fn validate(&self, profile: &CurvatureProfile) -> Result<()> {
        let ex_hi = Self::rho_ex_limit(self.r, self.iota, profile);
        let rho_hi = Self::rho_limit(self.iota, profile);
        if !(self.r > 0.0) {
            return Err(CurvatureError::InvalidSafeSet(format!(
                "data radius {} must be positive",
                self.r
            )));
        }
        if !(self.r < self.rho_ex && self.rho_ex < ex_hi) {
            return Err(CurvatureError::InvalidSafeSet(format!(
                "need r < rho_ex < {ex_hi} (r = {}, rho_ex = {})",
                self.r, self.rho_ex
            )));
        }
        if !(self.r < self.rho && self.rho < rho_hi) {
            return Err(CurvatureError::InvalidSafeSet(format!(
                "need r < rho < {rho_hi} (r = {}, rho = {})",
                self.r, self.rho
            )));
        }
        Ok(())
    }

    /// δ_ex = δ₊(r + ρ_ex).
    pub fn delta_ex(&self, profile: &CurvatureProfile) -> Result<f64> {
        delta_plus(self.r + self.rho_ex, profile.lambda_plus)
    }

    /// ζ_ex = ζ₋(r + ρ_ex).
    pub fn zeta_ex(&self, profile: &CurvatureProfile) -> f64 {
        zeta_minus(self.r + self.rho_ex, profile.lambda_minus)
    }
}
