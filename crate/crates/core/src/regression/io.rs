//! JSON dataset files.
//!
//! ```json
//! {
//!   "format": "frida-dataset/1",
//!   "manifold": {"kind": "sphere", "dim": 2},
//!   "predictors": [[0.0], [0.5], [1.0]],
//!   "responses": [[1.0, 0.0, 0.0], ...],
//!   "safe_set": {"c": [...], "r": 0.5, "rho_ex": 1.4, "rho": 0.6, "iota": 3.14},
//!   "safe_set_rule": {"lambda_ex": 0.5, "lambda_rho": 0.1, ...},
//!   "metadata": {}
//! }
//! ```
//!
//! `safe_set` and `safe_set_rule` are optional; an explicit safe set wins,
//! otherwise the rule (or its default) derives one from the responses.
//! Floats are written in shortest round-trip form, so write → read → write
//! is byte-stable.

use super::{RegressionDataset, RegressionError, Result};
use crate::curvature::SafeSetGeometry;
use crate::geometry::Manifold;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::Path;

pub const DATASET_FORMAT: &str = "frida-dataset/1";

/// How the safe set is placed when it is derived from the responses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafeSetRule {
    /// Fraction of the admissible interval (r, min(ι, π/√Λ₊) − r) used for ρ_ex.
    pub lambda_ex: f64,
    /// Fraction of the admissible interval (r, min(ι/2, π/(2√Λ₊))) used for ρ.
    pub lambda_rho: f64,
    /// Relative inflation of the largest centre-to-response distance.
    pub radius_inflation: f64,
    /// Lower bound on r.
    pub min_radius: f64,
}

impl Default for SafeSetRule {
    fn default() -> Self {
        SafeSetRule {
            lambda_ex: 0.5,
            lambda_rho: 0.1,
            radius_inflation: 0.01,
            min_radius: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub format: String,
    pub manifold: Manifold,
    pub predictors: Vec<Vec<f64>>,
    pub responses: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safe_set: Option<SafeSetGeometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safe_set_rule: Option<SafeSetRule>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub metadata: Map<String, Value>,
}

impl DatasetFile {
    pub fn from_dataset(ds: &RegressionDataset, metadata: Map<String, Value>) -> Self {
        DatasetFile {
            format: DATASET_FORMAT.to_string(),
            manifold: ds.manifold().clone(),
            predictors: ds.predictors().to_vec(),
            responses: ds.responses().iter().map(|p| p.coords().to_vec()).collect(),
            safe_set: Some(ds.safe_set().clone()),
            safe_set_rule: None,
            metadata,
        }
    }

    pub fn into_dataset(self) -> Result<RegressionDataset> {
        if self.format != DATASET_FORMAT {
            return Err(RegressionError::Format(format!(
                "unsupported format '{}', expected '{DATASET_FORMAT}'",
                self.format
            )));
        }
        self.manifold.validate()?;
        let responses = self
            .responses
            .into_iter()
            .map(|c| self.manifold.point(c))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        match self.safe_set {
            Some(s) => {
                let c = self.manifold.point(s.c.into_coords())?;
                let s = SafeSetGeometry { c, ..s };
                RegressionDataset::new(self.manifold, self.predictors, responses, s)
            }
            None => RegressionDataset::with_safe_set_rule(
                self.manifold,
                self.predictors,
                responses,
                &self.safe_set_rule.unwrap_or_default(),
            ),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
