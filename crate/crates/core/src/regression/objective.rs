use super::{RegressionDataset, Result, WeightVector};
use crate::curvature::CurvatureProfile;
use crate::geometry::{Manifold, Point, Tangent};

/// The signed objective f(y) = Σ w_i d²(y, y_i) = g(y) − h(y) at one query.
#[derive(Clone, Debug)]
pub struct DcObjective<'a> {
    dataset: &'a RegressionDataset,
    query: Vec<f64>,
    weights: WeightVector,
    delta_ex: f64,
    zeta_ex: f64,
}

/// Values and gradients of f, g and h at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub grad_f: Tangent,
    pub grad_g: Tangent,
    pub grad_h: Tangent,
}

impl<'a> DcObjective<'a> {
    /// Objective with explicit weights (any affine combination).
    pub fn new(dataset: &'a RegressionDataset, query: Vec<f64>, weights: WeightVector) -> Result<Self> {
        if weights.weights.len() != dataset.len() {
            return Err(super::RegressionError::LengthMismatch {
                predictors: weights.weights.len(),
                responses: dataset.len(),
            });
        }
        Ok(DcObjective {
            delta_ex: dataset.delta_ex()?,
            zeta_ex: dataset.zeta_ex(),
            dataset,
            query,
            weights,
        })
    }

    /// Objective with global affine weights at `x`.
    pub fn global(dataset: &'a RegressionDataset, x: &[f64]) -> Result<Self> {
        let w = dataset.global_weights(x)?;
        Self::new(dataset, x.to_vec(), w)
    }

    pub fn dataset(&self) -> &'a RegressionDataset {
        self.dataset
    }

    pub fn manifold(&self) -> &'a Manifold {
        self.dataset.manifold()
    }

    pub fn profile(&self) -> &'a CurvatureProfile {
        self.dataset.profile()
    }

    pub fn query(&self) -> &[f64] {
        &self.query
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn delta_ex(&self) -> f64 {
        self.delta_ex
    }

    pub fn zeta_ex(&self) -> f64 {
        self.zeta_ex
    }

    /// (g(y), h(y)).
    pub fn split_values(&self, y: &Point) -> Result<(f64, f64)> {
        let m = self.manifold();
        let (mut g, mut h) = (0.0, 0.0);
        for (yi, &w) in self.dataset.responses().iter().zip(&self.weights.weights) {
            let d = m.distance(y, yi)?;
            if w < 0.0 {
                h -= w * d * d;
            } else {
                g += w * d * d;
            }
        }
        Ok((g, h))
    }

    pub fn value(&self, y: &Point) -> Result<f64> {
        let (g, h) = self.split_values(y)?;
        Ok(g - h)
    }

    pub fn value_g(&self, y: &Point) -> Result<f64> {
        Ok(self.split_values(y)?.0)
    }

    pub fn value_h(&self, y: &Point) -> Result<f64> {
        Ok(self.split_values(y)?.1)
    }

    /// grad g = −2 Σ_{w_i ≥ 0} w_i log_y(y_i) and grad h = 2 Σ_{w_j < 0} w_j log_y(y_j).
    pub fn split_gradients(&self, y: &Point) -> Result<(Tangent, Tangent)> {
        let m = self.manifold();
        let mut gg = m.zero_tangent();
        let mut gh = m.zero_tangent();
        for (yi, &w) in self.dataset.responses().iter().zip(&self.weights.weights) {
            if w == 0.0 {
                continue;
            }
            let l = m.log(y, yi)?;
            if w < 0.0 {
                gh.axpy(2.0 * w, &l);
            } else {
                gg.axpy(-2.0 * w, &l);
            }
        }
        Ok((gg, gh))
    }

    pub fn grad_g(&self, y: &Point) -> Result<Tangent> {
        Ok(self.split_gradients(y)?.0)
    }

    pub fn grad_h(&self, y: &Point) -> Result<Tangent> {
        Ok(self.split_gradients(y)?.1)
    }

    pub fn gradient(&self, y: &Point) -> Result<Tangent> {
        let (gg, gh) = self.split_gradients(y)?;
        Ok(gg.sub(&gh))
    }

    pub fn evaluate(&self, y: &Point) -> Result<Evaluation> {
        let (g, h) = self.split_values(y)?;
        let (grad_g, grad_h) = self.split_gradients(y)?;
        Ok(Evaluation {
            f: g - h,
            g,
            h,
            grad_f: grad_g.sub(&grad_h),
            grad_g,
            grad_h,
        })
    }
}
