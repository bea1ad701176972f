use super::{RegressionDataset, RegressionError, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Regression weights split into their nonnegative and negative parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    pub w_plus: f64,
    pub w_minus: f64,
    pub negative_indices: Vec<usize>,
}

impl WeightVector {
    /// Splits raw weights; a weight is negative iff it is strictly below zero.
    pub fn from_weights(weights: Vec<f64>) -> Self {
        let mut w_plus = 0.0;
        let mut w_minus = 0.0;
        let mut negative_indices = Vec::new();
        for (i, &w) in weights.iter().enumerate() {
            if w < 0.0 {
                w_minus -= w;
                negative_indices.push(i);
            } else {
                w_plus += w;
            }
        }
        WeightVector {
            weights,
            w_plus,
            w_minus,
            negative_indices,
        }
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn has_negative(&self) -> bool {
        !self.negative_indices.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Gaussian,
    Epanechnikov,
    Quartic,
}

impl Kernel {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Kernel::Gaussian => (-0.5 * u * u).exp() / (2.0 * PI).sqrt(),
            Kernel::Epanechnikov => 0.75 * (1.0 - u * u).max(0.0),
            Kernel::Quartic => {
                let t = (1.0 - u * u).max(0.0);
                15.0 / 16.0 * t * t
            }
        }
    }

    /// K_h(u) = K(u/h)/h.
    pub fn scaled(self, u: f64, h: f64) -> f64 {
        self.eval(u / h) / h
    }
}

impl std::str::FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Kernel::Gaussian),
            "epanechnikov" => Ok(Kernel::Epanechnikov),
            "quartic" | "biweight" => Ok(Kernel::Quartic),
            other => Err(format!("unknown kernel '{other}'")),
        }
    }
}

/// Sufficient conditions for an interior minimizer, reported independently.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafeRegionReport {
    /// w₋ < (ρ_ex − r)/(2r).
    pub interior_guaranteed: bool,
    /// (x − μ̂)ᵀΣ̂⁻¹(x − μ̂) < (ρ_ex/r)² − 1.
    pub ellipsoid_ok: bool,
    pub w_minus: f64,
    pub w_minus_bound: f64,
    pub mahalanobis_sq: f64,
    pub ellipsoid_bound: f64,
}

impl SafeRegionReport {
    pub fn outside(&self) -> bool {
        !self.interior_guaranteed && !self.ellipsoid_ok
    }
}

impl RegressionDataset {
    /// Global affine weights w_i = (1/m)(1 + (x_i − μ̂)ᵀΣ̂⁻¹(x − μ̂)).
    pub fn global_weights(&self, x: &[f64]) -> Result<WeightVector> {
        let z = &self.sigma_inv * self.centered(x)?;
        let m = self.len() as f64;
        let weights = self
            .predictors
            .iter()
            .map(|xi| {
                let d = DVector::from_column_slice(xi) - &self.mu_hat;
                (1.0 + d.dot(&z)) / m
            })
            .collect();
        Ok(WeightVector::from_weights(weights))
    }

    /// Local-linear weights for a scalar predictor.
    pub fn local_weights(&self, x: f64, kernel: Kernel, h: f64) -> Result<WeightVector> {
        if self.predictor_dim() != 1 {
            return Err(RegressionError::NotScalar(self.predictor_dim()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(RegressionError::InvalidBandwidth(h));
        }
        let m = self.len() as f64;
        let k: Vec<f64> = self
            .predictors
            .iter()
            .map(|xi| kernel.scaled(xi[0] - x, h))
            .collect();
        let (mut mu0, mut mu1, mut mu2) = (0.0, 0.0, 0.0);
        for (xi, ki) in self.predictors.iter().zip(&k) {
            let d = xi[0] - x;
            mu0 += ki;
            mu1 += ki * d;
            mu2 += ki * d * d;
        }
        mu0 /= m;
        mu1 /= m;
        mu2 /= m;
        let denominator = mu0 * mu2 - mu1 * mu1;
        if !(mu0 > 0.0) || !(denominator > 1e-12 * mu0 * mu2) {
            return Err(RegressionError::DegenerateLocalDesign { x, denominator });
        }
        let weights = self
            .predictors
            .iter()
            .zip(&k)
            .map(|(xi, ki)| ki * (mu2 - mu1 * (xi[0] - x)) / (m * denominator))
            .collect();
        Ok(WeightVector::from_weights(weights))
    }

    /// True iff every global weight at x is nonnegative, decided in whitened
    /// coordinates: x̃_iᵀx̃ ≥ −1 for all i.
    pub fn nonneg_region_check(&self, x: &[f64]) -> Result<bool> {
        let xt = &self.sigma_inv_sqrt * self.centered(x)?;
        Ok(self.predictors.iter().all(|xi| {
            let xit = &self.sigma_inv_sqrt * (DVector::from_column_slice(xi) - &self.mu_hat);
            xit.dot(&xt) >= -1.0
        }))
    }

    pub fn safe_region_check(&self, weights: &WeightVector, x: &[f64]) -> Result<SafeRegionReport> {
        let s = &self.safe_set;
        let w_minus_bound = (s.rho_ex - s.r) / (2.0 * s.r);
        let mahalanobis_sq = self.mahalanobis_sq(x)?;
        let ellipsoid_bound = (s.rho_ex / s.r).powi(2) - 1.0;
        Ok(SafeRegionReport {
            interior_guaranteed: weights.w_minus < w_minus_bound,
            ellipsoid_ok: mahalanobis_sq < ellipsoid_bound,
            w_minus: weights.w_minus,
            w_minus_bound,
            mahalanobis_sq,
            ellipsoid_bound,
        })
    }
}
