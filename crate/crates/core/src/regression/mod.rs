//! Regression datasets, affine and local-linear weights, and the signed
//! objective f = g − h.

mod io;
mod objective;
mod weights;

pub use io::{DatasetFile, SafeSetRule, DATASET_FORMAT};
pub use objective::{DcObjective, Evaluation};
pub use weights::{Kernel, SafeRegionReport, WeightVector};

use crate::curvature::{CurvatureError, CurvatureProfile, SafeSetGeometry};
use crate::geometry::{GeometryError, Manifold, Point};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("dataset is empty")]
    Empty,
    #[error("{predictors} predictors but {responses} responses")]
    LengthMismatch { predictors: usize, responses: usize },
    #[error("predictor {index} has dimension {found}, expected {expected}")]
    PredictorDimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("predictor covariance is singular (eigenvalue ratio {ratio:e})")]
    SingularCovariance { ratio: f64 },
    #[error("local weights need a scalar predictor, dataset has dimension {0}")]
    NotScalar(usize),
    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("no effective local data near x = {x} (denominator {denominator:e})")]
    DegenerateLocalDesign { x: f64, denominator: f64 },
    #[error("response {index} is at distance {distance} from the centre, beyond r = {r}")]
    ResponseOutsideSafeSet { index: usize, distance: f64, r: f64 },
    #[error("point at distance {distance} from the centre lies outside the existence ball (radius {rho_ex})")]
    OutsideExistenceBall { distance: f64, rho_ex: f64 },
    #[error("existence ball (radius {rho_ex}) does not fit inside the torus patch: {reason}")]
    PatchTooSmall { rho_ex: f64, reason: String },
    #[error("dataset file: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RegressionError>;

/// Predictors in R^q, manifold responses, empirical moments and safe set.
#[derive(Clone, Debug)]
pub struct RegressionDataset {
    manifold: Manifold,
    predictors: Vec<Vec<f64>>,
    responses: Vec<Point>,
    mu_hat: DVector<f64>,
    sigma_hat: DMatrix<f64>,
    sigma_inv: DMatrix<f64>,
    sigma_inv_sqrt: DMatrix<f64>,
    safe_set: SafeSetGeometry,
    profile: CurvatureProfile,
}

/// Eigenvalue ratio below which the covariance counts as singular.
const CONDITION_FLOOR: f64 = 1e-10;

impl RegressionDataset {
    /// Builds a dataset with an explicit safe set.
    pub fn new(
        manifold: Manifold,
        predictors: Vec<Vec<f64>>,
        responses: Vec<Point>,
        safe_set: SafeSetGeometry,
    ) -> Result<Self> {
        manifold.validate()?;
        let q = check_shapes(&predictors, &responses)?;
        let profile = manifold.curvature_profile();
        let (mu_hat, sigma_hat) = moments(&predictors, q);
        let (sigma_inv, sigma_inv_sqrt) = invert_covariance(&sigma_hat)?;
        let ds = RegressionDataset {
            manifold,
            predictors,
            responses,
            mu_hat,
            sigma_hat,
            sigma_inv,
            sigma_inv_sqrt,
            safe_set,
            profile,
        };
        ds.validate_safe_set()?;
        Ok(ds)
    }

    /// Builds a dataset whose safe set is derived from the responses: the
    /// centre is their Fréchet mean, r the largest distance to it inflated by
    /// `rule.radius_inflation`, and ρ_ex, ρ are placed inside their admissible
    /// intervals by `rule`.
    pub fn with_safe_set_rule(
        manifold: Manifold,
        predictors: Vec<Vec<f64>>,
        responses: Vec<Point>,
        rule: &SafeSetRule,
    ) -> Result<Self> {
        manifold.validate()?;
        check_shapes(&predictors, &responses)?;
        let safe_set = derive_safe_set(&manifold, &responses, rule)?;
        Self::new(manifold, predictors, responses, safe_set)
    }

    fn validate_safe_set(&self) -> Result<()> {
        let s = &self.safe_set;
        self.manifold.point(s.c.coords().to_vec())?;
        s.validate(&self.profile)?;
        for (index, y) in self.responses.iter().enumerate() {
            let distance = self.manifold.distance(&s.c, y)?;
            if distance > s.r {
                return Err(RegressionError::ResponseOutsideSafeSet {
                    index,
                    distance,
                    r: s.r,
                });
            }
        }
        check_patch_containment(&self.manifold, s)?;
        Ok(())
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn predictors(&self) -> &[Vec<f64>] {
        &self.predictors
    }

    pub fn responses(&self) -> &[Point] {
        &self.responses
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn predictor_dim(&self) -> usize {
        self.mu_hat.len()
    }

    pub fn mu_hat(&self) -> &DVector<f64> {
        &self.mu_hat
    }

    pub fn sigma_hat(&self) -> &DMatrix<f64> {
        &self.sigma_hat
    }

    pub fn sigma_inv(&self) -> &DMatrix<f64> {
        &self.sigma_inv
    }

    pub fn safe_set(&self) -> &SafeSetGeometry {
        &self.safe_set
    }

    pub fn profile(&self) -> &CurvatureProfile {
        &self.profile
    }

    /// δ₊(r + ρ_ex).
    pub fn delta_ex(&self) -> Result<f64> {
        Ok(self.safe_set.delta_ex(&self.profile)?)
    }

    /// ζ₋(r + ρ_ex).
    pub fn zeta_ex(&self) -> f64 {
        self.safe_set.zeta_ex(&self.profile)
    }

    /// ρ_ex − d(c, y); fails when y lies outside the existence ball.
    pub fn boundary_distance(&self, y: &Point) -> Result<f64> {
        let distance = self.manifold.distance(&self.safe_set.c, y)?;
        if distance > self.safe_set.rho_ex {
            return Err(RegressionError::OutsideExistenceBall {
                distance,
                rho_ex: self.safe_set.rho_ex,
            });
        }
        Ok(self.safe_set.rho_ex - distance)
    }

    /// (x − μ̂)ᵀ Σ̂⁻¹ (x − μ̂).
    pub fn mahalanobis_sq(&self, x: &[f64]) -> Result<f64> {
        let d = self.centered(x)?;
        Ok(d.dot(&(&self.sigma_inv * &d)))
    }

    fn centered(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.predictor_dim() {
            return Err(RegressionError::PredictorDimension {
                index: usize::MAX,
                expected: self.predictor_dim(),
                found: x.len(),
            });
        }
        Ok(DVector::from_column_slice(x) - &self.mu_hat)
    }
}

fn check_shapes(predictors: &[Vec<f64>], responses: &[Point]) -> Result<usize> {
    if predictors.is_empty() {
        return Err(RegressionError::Empty);
    }
    if predictors.len() != responses.len() {
        return Err(RegressionError::LengthMismatch {
            predictors: predictors.len(),
            responses: responses.len(),
        });
    }
    let q = predictors[0].len();
    for (index, x) in predictors.iter().enumerate() {
        if x.len() != q || q == 0 {
            return Err(RegressionError::PredictorDimension {
                index,
                expected: q,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(RegressionError::Format(format!(
                "predictor {index} is not finite"
            )));
        }
    }
    Ok(q)
}

fn moments(predictors: &[Vec<f64>], q: usize) -> (DVector<f64>, DMatrix<f64>) {
    let m = predictors.len() as f64;
    let mut mu = DVector::zeros(q);
    for x in predictors {
        mu += DVector::from_column_slice(x);
    }
    mu /= m;
    let mut sigma = DMatrix::zeros(q, q);
    for x in predictors {
        let d = DVector::from_column_slice(x) - &mu;
        sigma += &d * d.transpose();
    }
    sigma /= m;
    (mu, sigma)
}

/// Σ⁻¹ and Σ^{-1/2} through a symmetric eigendecomposition.
fn invert_covariance(sigma: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(sigma.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0) || min <= CONDITION_FLOOR * max {
        return Err(RegressionError::SingularCovariance {
            ratio: if max > 0.0 { min / max } else { 0.0 },
        });
    }
    let v = &eig.eigenvectors;
    let inv = v * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l)) * v.transpose();
    let inv_sqrt =
        v * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt())) * v.transpose();
    Ok((inv, inv_sqrt))
}

fn derive_safe_set(manifold: &Manifold, responses: &[Point], rule: &SafeSetRule) -> Result<SafeSetGeometry> {
    let m = responses.len();
    let c = manifold.frechet_mean(responses, &vec![1.0 / m as f64; m])?;
    let mut r: f64 = 0.0;
    for y in responses {
        r = r.max(manifold.distance(&c, y)?);
    }
    // A single response (or identical ones) still needs a positive radius.
    let r = (r * (1.0 + rule.radius_inflation)).max(rule.min_radius);
    let profile = manifold.curvature_profile();
    let iota = manifold.inj_lower();
    Ok(SafeSetGeometry::interpolate(
        c,
        r,
        iota,
        &profile,
        rule.lambda_ex,
        rule.lambda_rho,
    )?)
}

/// Torus factors must contain the whole existence ball in their patch.
fn check_patch_containment(manifold: &Manifold, s: &SafeSetGeometry) -> Result<()> {
    let factors: Vec<(&Manifold, usize)> = match manifold {
        Manifold::Product { factors } => {
            let mut off = 0;
            factors
                .iter()
                .map(|f| {
                    let o = off;
                    off += f.coord_len();
                    (f, o)
                })
                .collect()
        }
        other => vec![(other, 0)],
    };
    for (f, off) in factors {
        if let Manifold::TorusPatch(t) = f {
            let c = Point::from_raw(s.c.coords()[off..off + 2].to_vec());
            let centre = Point::from_raw(t.center.to_vec());
            let d = f.distance(&centre, &c)?;
            if d + s.rho_ex > t.radius {
                return Err(RegressionError::PatchTooSmall {
                    rho_ex: s.rho_ex,
                    reason: format!(
                        "centre offset {d} plus rho_ex exceeds patch radius {}",
                        t.radius
                    ),
                });
            }
        }
    }
    Ok(())
}
