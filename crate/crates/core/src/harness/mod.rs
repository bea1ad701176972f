//! Experiment presets, deterministic data generators, artifact writing and
//! the invariant check suite.

mod artifacts;
pub mod check;
mod experiment;
pub mod generators;
pub mod rng;

pub use artifacts::{verify_manifest, write_objective_grid, Manifest, ManifestEntry, GRID_LAT, GRID_LON};
pub use experiment::{
    fit_dataset, random_starts, run_experiment, ExperimentOptions, FitOptions, QueryRecord, RunArtifact, RunRecord,
    Scope, Summary, TraceSummary, WeightDiagnostics,
};

use crate::geometry::GeometryError;
use crate::regression::RegressionError;
use crate::solver::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("manifest check failed: {0}")]
    Manifest(String),
}

impl From<crate::curvature::CurvatureError> for HarnessError {
    fn from(e: crate::curvature::CurvatureError) -> Self {
        HarnessError::Regression(e.into())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Named experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Preset {
    SphereGeodesic,
    SphereNoisyGeodesic,
    SphereSpiral,
    S2xS1Compare,
    TorusLocal,
    TorusGlobal,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::SphereGeodesic,
        Preset::SphereNoisyGeodesic,
        Preset::SphereSpiral,
        Preset::S2xS1Compare,
        Preset::TorusLocal,
        Preset::TorusGlobal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::SphereGeodesic => "sphere-geodesic",
            Preset::SphereNoisyGeodesic => "sphere-noisy-geodesic",
            Preset::SphereSpiral => "sphere-spiral",
            Preset::S2xS1Compare => "s2xs1-compare",
            Preset::TorusLocal => "torus-local",
            Preset::TorusGlobal => "torus-global",
        }
    }

    pub fn is_sphere(self) -> bool {
        matches!(
            self,
            Preset::SphereGeodesic | Preset::SphereNoisyGeodesic | Preset::SphereSpiral
        )
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Preset {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HarnessError::UnknownPreset(s.to_string()))
    }
}
