//! Closed-form Riemannian primitives for the manifold catalog: spheres, the
//! circle, a flat-chart torus patch, and products of those factors.
//!
//! Every catalog manifold stores tangent vectors in coordinates where the
//! Riemannian metric is the Euclidean dot product (ambient coordinates on
//! spheres, orthonormal chart frames on flat factors, concatenation on
//! products), so [`Tangent::dot`] is the metric.

mod flat;
mod sphere;

pub use flat::{canonical_angle, curvature_at as torus_curvature, wrap_diff, TorusPatch};

use crate::curvature::{self, CurvatureProfile};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point is not on the manifold: {0}")]
    NotOnManifold(String),
    #[error("tangent vector is not tangent at its base point (normal component {0:e})")]
    NotTangent(f64),
    #[error("points at distance {distance} are outside the injectivity domain (limit {limit})")]
    OutsideInjectivity { distance: f64, limit: f64 },
    #[error("torus point at distance {distance} from the centre lies outside the patch radius {radius}")]
    OutsidePatch { distance: f64, radius: f64 },
    #[error("invalid manifold: {0}")]
    InvalidManifold(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("Fréchet mean did not converge after {iterations} iterations (gradient norm {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point given by its coordinates. Only [`Manifold::point`] produces
/// validated points; the manifold is passed alongside at every call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// A tangent vector in metric-orthonormal coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tangent(Vec<f64>);

impl Tangent {
    pub fn new(coords: Vec<f64>) -> Self {
        Tangent(coords)
    }

    pub fn zeros(len: usize) -> Self {
        Tangent(vec![0.0; len])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &Tangent) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scaled(&self, a: f64) -> Tangent {
        Tangent(self.0.iter().map(|x| a * x).collect())
    }

    /// self += a·x
    pub fn axpy(&mut self, a: f64, x: &Tangent) {
        self.0.iter_mut().zip(&x.0).for_each(|(s, v)| *s += a * v);
    }

    pub fn add(&self, other: &Tangent) -> Tangent {
        Tangent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Tangent) -> Tangent {
        Tangent(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

/// Dimension, injectivity and curvature data of a manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryCaps {
    pub dim: usize,
    pub inj_lower: f64,
    pub curvature: CurvatureProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Manifold {
    Sphere { dim: usize },
    Circle,
    TorusPatch(TorusPatch),
    Product { factors: Vec<Manifold> },
}

impl Manifold {
    pub fn sphere(dim: usize) -> Result<Self> {
        let m = Manifold::Sphere { dim };
        m.validate()?;
        Ok(m)
    }

    pub fn circle() -> Self {
        Manifold::Circle
    }

    pub fn torus_patch(major: f64, minor: f64, center: [f64; 2], radius: f64) -> Result<Self> {
        Ok(Manifold::TorusPatch(TorusPatch::new(major, minor, center, radius)?))
    }

    pub fn product(factors: Vec<Manifold>) -> Result<Self> {
        let m = Manifold::Product { factors };
        m.validate()?;
        Ok(m)
    }

    /// Checks structural invariants; deserialized values should be validated.
    pub fn validate(&self) -> Result<()> {
        match self {
            Manifold::Sphere { dim } if *dim == 0 => Err(GeometryError::InvalidManifold(
                "sphere dimension must be at least 1".into(),
            )),
            Manifold::Sphere { .. } | Manifold::Circle => Ok(()),
            Manifold::TorusPatch(t) => t.validate(),
            Manifold::Product { factors } => {
                if factors.is_empty() {
                    return Err(GeometryError::InvalidManifold(
                        "product needs at least one factor".into(),
                    ));
                }
                for f in factors {
                    if matches!(f, Manifold::Product { .. }) {
                        return Err(GeometryError::InvalidManifold(
                            "products of products are not supported".into(),
                        ));
                    }
                    f.validate()?;
                }
                Ok(())
            }
        }
    }

    fn factors(&self) -> &[Manifold] {
        match self {
            Manifold::Product { factors } => factors,
            other => std::slice::from_ref(other),
        }
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self {
            Manifold::Sphere { dim } => *dim,
            Manifold::Circle => 1,
            Manifold::TorusPatch(_) => 2,
            Manifold::Product { factors } => factors.iter().map(Manifold::dim).sum(),
        }
    }

    /// Number of point coordinates.
    pub fn coord_len(&self) -> usize {
        match self {
            Manifold::Sphere { dim } => dim + 1,
            Manifold::Circle => 1,
            Manifold::TorusPatch(_) => 2,
            Manifold::Product { factors } => factors.iter().map(Manifold::coord_len).sum(),
        }
    }

    /// Number of tangent coordinates.
    pub fn tangent_len(&self) -> usize {
        match self {
            Manifold::Sphere { dim } => dim + 1,
            Manifold::Circle => 1,
            Manifold::TorusPatch(_) => 2,
            Manifold::Product { factors } => factors.iter().map(Manifold::tangent_len).sum(),
        }
    }

    pub fn caps(&self) -> GeometryCaps {
        GeometryCaps {
            dim: self.dim(),
            inj_lower: self.inj_lower(),
            curvature: self.curvature_profile(),
        }
    }

    pub fn inj_lower(&self) -> f64 {
        match self {
            Manifold::Sphere { .. } | Manifold::Circle => PI,
            Manifold::TorusPatch(t) => t.radius,
            Manifold::Product { factors } => factors
                .iter()
                .map(Manifold::inj_lower)
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn curvature_profile(&self) -> CurvatureProfile {
        match self {
            Manifold::Sphere { dim } if *dim >= 2 => CurvatureProfile::new(0.0, 1.0, 0.0, 2.0),
            // S^1 has no sectional curvature.
            Manifold::Sphere { .. } | Manifold::Circle | Manifold::TorusPatch(_) => {
                CurvatureProfile::flat()
            }
            Manifold::Product { factors } => factors
                .iter()
                .map(Manifold::curvature_profile)
                .reduce(|a, b| a.join(&b))
                .unwrap_or_else(CurvatureProfile::flat),
        }
    }

    fn check_len(&self, found: usize, tangent: bool) -> Result<()> {
        let expected = if tangent {
            self.tangent_len()
        } else {
            self.coord_len()
        };
        if found != expected {
            return Err(GeometryError::DimensionMismatch { expected, found });
        }
        Ok(())
    }

    /// Validates and canonicalizes coordinates: sphere blocks are
    /// normalized, angles mapped into [0, 2π), torus points checked against
    /// the patch.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        self.check_len(coords.len(), false)?;
        let mut out = Vec::with_capacity(coords.len());
        let mut off = 0;
        for f in self.factors() {
            let n = f.coord_len();
            let block = &coords[off..off + n];
            let v = match f {
                Manifold::Sphere { .. } => sphere::validate(block)?,
                Manifold::Circle => flat::circle::validate(block)?,
                Manifold::TorusPatch(t) => t.validate_point(block)?,
                Manifold::Product { .. } => unreachable!("validated"),
            };
            out.extend(v);
            off += n;
        }
        Ok(Point(out))
    }

    /// Validates a tangent vector at `p`.
    pub fn tangent(&self, p: &Point, coords: Vec<f64>) -> Result<Tangent> {
        self.check_len(coords.len(), true)?;
        let v = Tangent(coords);
        let proj = self.project_tangent(p, v.coords());
        let off = v.sub(&proj).norm();
        if off > 1e-10 * v.norm().max(1.0) {
            return Err(GeometryError::NotTangent(off));
        }
        Ok(proj)
    }

    fn check_points(&self, p: &Point, q: &Point) -> Result<()> {
        self.check_len(p.0.len(), false)?;
        self.check_len(q.0.len(), false)
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_points(p, q)?;
        Ok(self.distance_unchecked(&p.0, &q.0))
    }

    fn distance_unchecked(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Manifold::Sphere { .. } => sphere::distance(p, q),
            Manifold::Circle => flat::circle::distance(p, q),
            Manifold::TorusPatch(t) => t.raw_distance(p, q),
            Manifold::Product { factors } => {
                let mut off = 0;
                let mut s = 0.0;
                for f in factors {
                    let n = f.coord_len();
                    let d = f.distance_unchecked(&p[off..off + n], &q[off..off + n]);
                    s += d * d;
                    off += n;
                }
                s.sqrt()
            }
        }
    }

    pub fn exp(&self, p: &Point, v: &Tangent) -> Result<Point> {
        self.check_len(p.0.len(), false)?;
        self.check_len(v.0.len(), true)?;
        let mut out = Vec::with_capacity(p.0.len());
        let (mut po, mut vo) = (0, 0);
        for f in self.factors() {
            let (pn, vn) = (f.coord_len(), f.tangent_len());
            let (pb, vb) = (&p.0[po..po + pn], &v.0[vo..vo + vn]);
            let block = match f {
                Manifold::Sphere { .. } => sphere::exp(pb, vb),
                Manifold::Circle => flat::circle::exp(pb, vb),
                Manifold::TorusPatch(t) => t.exp(pb, vb),
                Manifold::Product { .. } => unreachable!("validated"),
            };
            out.extend(block);
            po += pn;
            vo += vn;
        }
        Ok(Point(out))
    }

    pub fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        self.check_points(p, q)?;
        let mut out = Vec::with_capacity(self.tangent_len());
        let mut po = 0;
        for f in self.factors() {
            let pn = f.coord_len();
            let (pb, qb) = (&p.0[po..po + pn], &q.0[po..po + pn]);
            let block = match f {
                Manifold::Sphere { .. } => sphere::log(pb, qb)?,
                Manifold::Circle => flat::circle::log(pb, qb)?,
                Manifold::TorusPatch(t) => t.log(pb, qb)?,
                Manifold::Product { .. } => unreachable!("validated"),
            };
            out.extend(block);
            po += pn;
        }
        Ok(Tangent(out))
    }

    /// Parallel transport of `v` from `p` to `q` along the minimizing geodesic.
    pub fn transport(&self, p: &Point, q: &Point, v: &Tangent) -> Result<Tangent> {
        self.check_points(p, q)?;
        self.check_len(v.0.len(), true)?;
        let mut out = Vec::with_capacity(v.0.len());
        let (mut po, mut vo) = (0, 0);
        for f in self.factors() {
            let (pn, vn) = (f.coord_len(), f.tangent_len());
            let vb = &v.0[vo..vo + vn];
            let block = match f {
                Manifold::Sphere { .. } => sphere::transport(&p.0[po..po + pn], &q.0[po..po + pn], vb)?,
                Manifold::Circle => {
                    flat::circle::log(&p.0[po..po + pn], &q.0[po..po + pn])?;
                    vb.to_vec()
                }
                Manifold::TorusPatch(t) => {
                    t.log(&p.0[po..po + pn], &q.0[po..po + pn])?;
                    vb.to_vec()
                }
                Manifold::Product { .. } => unreachable!("validated"),
            };
            out.extend(block);
            po += pn;
            vo += vn;
        }
        Ok(Tangent(out))
    }

    /// Adjoint of the differential of `log_p` at `y`, applied to `xi ∈ T_p M`;
    /// the result lives in `T_y M`. Satisfies
    /// `⟨dlog_adjoint(p, y, ξ), w⟩ = d/dt ⟨ξ, log_p(exp_y(t w))⟩` at t = 0.
    pub fn dlog_adjoint(&self, p: &Point, y: &Point, xi: &Tangent) -> Result<Tangent> {
        self.check_points(p, y)?;
        self.check_len(xi.0.len(), true)?;
        let mut out = Vec::with_capacity(xi.0.len());
        let (mut po, mut vo) = (0, 0);
        for f in self.factors() {
            let (pn, vn) = (f.coord_len(), f.tangent_len());
            let (pb, yb, xb) = (&p.0[po..po + pn], &y.0[po..po + pn], &xi.0[vo..vo + vn]);
            let block = match f {
                Manifold::Sphere { dim: 1 } => {
                    // S^1 is flat: transport only.
                    sphere::transport(pb, yb, xb)?
                }
                Manifold::Sphere { .. } => sphere::dlog_adjoint(pb, yb, xb)?,
                Manifold::Circle => {
                    flat::circle::log(pb, yb)?;
                    xb.to_vec()
                }
                Manifold::TorusPatch(t) => {
                    t.log(pb, yb)?;
                    xb.to_vec()
                }
                Manifold::Product { .. } => unreachable!("validated"),
            };
            out.extend(block);
            po += pn;
            vo += vn;
        }
        Ok(Tangent(out))
    }

    /// Orthogonal projection of an ambient vector onto `T_p M`.
    pub fn project_tangent(&self, p: &Point, v: &[f64]) -> Tangent {
        let mut out = Vec::with_capacity(v.len());
        let (mut po, mut vo) = (0, 0);
        for f in self.factors() {
            let (pn, vn) = (f.coord_len(), f.tangent_len());
            match f {
                Manifold::Sphere { .. } => out.extend(sphere::project(&p.0[po..po + pn], &v[vo..vo + vn])),
                _ => out.extend_from_slice(&v[vo..vo + vn]),
            }
            po += pn;
            vo += vn;
        }
        Tangent(out)
    }

    /// An orthonormal basis of `T_p M` with `dim()` elements.
    pub fn tangent_basis(&self, p: &Point) -> Vec<Tangent> {
        let total = self.tangent_len();
        let mut basis = Vec::with_capacity(self.dim());
        let (mut po, mut vo) = (0, 0);
        for f in self.factors() {
            let (pn, vn) = (f.coord_len(), f.tangent_len());
            let local: Vec<Vec<f64>> = match f {
                Manifold::Sphere { .. } => sphere::tangent_basis(&p.0[po..po + pn]),
                _ => (0..vn)
                    .map(|i| {
                        let mut e = vec![0.0; vn];
                        e[i] = 1.0;
                        e
                    })
                    .collect(),
            };
            for b in local {
                let mut e = vec![0.0; total];
                e[vo..vo + vn].copy_from_slice(&b);
                basis.push(Tangent(e));
            }
            po += pn;
            vo += vn;
        }
        basis
    }

    pub fn zero_tangent(&self) -> Tangent {
        Tangent::zeros(self.tangent_len())
    }

    /// Central-difference gradient of `f` at `y` in normal coordinates.
    pub fn numerical_gradient<E, F>(&self, y: &Point, mut f: F, h: f64) -> std::result::Result<Tangent, E>
    where
        E: From<GeometryError>,
        F: FnMut(&Point) -> std::result::Result<f64, E>,
    {
        let mut g = self.zero_tangent();
        for e in self.tangent_basis(y) {
            let fp = f(&self.exp(y, &e.scaled(h))?)?;
            let fm = f(&self.exp(y, &e.scaled(-h))?)?;
            g.axpy((fp - fm) / (2.0 * h), &e);
        }
        Ok(g)
    }

    /// Second difference (f(exp_y(hv)) − 2f(y) + f(exp_y(−hv))) / h² along
    /// the geodesic through `y` with velocity `v`.
    pub fn second_difference<E, F>(&self, y: &Point, v: &Tangent, mut f: F, h: f64) -> std::result::Result<f64, E>
    where
        E: From<GeometryError>,
        F: FnMut(&Point) -> std::result::Result<f64, E>,
    {
        let fp = f(&self.exp(y, &v.scaled(h))?)?;
        let f0 = f(y)?;
        let fm = f(&self.exp(y, &v.scaled(-h))?)?;
        Ok((fp - 2.0 * f0 + fm) / (h * h))
    }

    /// Weighted Fréchet mean by Riemannian gradient iteration with step
    /// 1/ζ, started from the most heavily weighted point.
    pub fn frechet_mean(&self, points: &[Point], weights: &[f64]) -> Result<Point> {
        const MAX_ITERS: usize = 10_000;
        const TOL: f64 = 1e-10;
        if points.is_empty() || points.len() != weights.len() {
            return Err(GeometryError::InvalidWeights(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(GeometryError::InvalidWeights("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(GeometryError::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let start = weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mut y = points[start].clone();
        let lambda_minus = self.curvature_profile().lambda_minus;
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITERS {
            let mut step = self.zero_tangent();
            let mut spread: f64 = 0.0;
            for (p, w) in points.iter().zip(weights) {
                if *w == 0.0 {
                    continue;
                }
                let l = self.log(&y, p)?;
                spread = spread.max(l.norm());
                step.axpy(*w, &l);
            }
            residual = step.norm();
            if residual <= TOL {
                return Ok(y);
            }
            let zeta = curvature::zeta_minus(2.0 * spread, lambda_minus);
            y = self.exp(&y, &step.scaled(1.0 / zeta))?;
        }
        Err(GeometryError::NoConvergence {
            iterations: MAX_ITERS,
            residual,
        })
    }
}

#[cfg(test)]
mod tests;
