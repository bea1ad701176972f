//! Signed Fréchet regression on Riemannian manifolds.
//!
//! Affine Fréchet regression weights may be negative, which turns the
//! weighted barycenter problem into a difference of geodesically convex
//! functions. This crate solves it with a Riemannian proximal DC method
//! (FRIDA) whose step parameters are derived from curvature comparison
//! bounds, and checks the resulting descent guarantees at runtime.
//!
//! Modules:
//! - [`geometry`]: exp/log/transport on spheres, the circle, a torus patch, products.
//! - [`curvature`]: comparison constants and step parameters.
//! - [`regression`]: datasets, global and local weights, the signed objective.
//! - [`solver`]: FRIDA (exact and inexact), gradient descent, trace checks.
//! - [`harness`]: experiment presets, artifacts and the check suite.

pub mod curvature;
pub mod geometry;
pub mod harness;
pub mod regression;
pub mod solver;

pub use curvature::{CurvatureProfile, SafeSetGeometry};
pub use geometry::{GeometryCaps, Manifold, Point, Tangent, TorusPatch};
pub use regression::{DcObjective, Kernel, RegressionDataset, WeightVector};
pub use solver::{
    frida_solve, gd_solve, Method, SolveResult, SolveStatus, SolverConfig, SolverMode,
};
