//! Flat factors: the unit circle and a torus patch carrying a frozen metric.

use super::GeometryError;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

const CUT_MARGIN: f64 = 1e-12;

/// Maps an angle into [0, 2π).
pub fn canonical_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shortest signed angular difference b − a, in [−π, π].
pub fn wrap_diff(a: f64, b: f64) -> f64 {
    let d = b - a;
    d - TAU * (d / TAU).round()
}

fn check_cut(delta: f64, distance: f64, limit: f64) -> Result<(), GeometryError> {
    if delta.abs() >= PI * (1.0 - CUT_MARGIN) {
        Err(GeometryError::OutsideInjectivity { distance, limit })
    } else {
        Ok(())
    }
}

pub(super) mod circle {
    use super::*;

    pub fn validate(coords: &[f64]) -> Result<Vec<f64>, GeometryError> {
        if !coords[0].is_finite() {
            return Err(GeometryError::NotOnManifold("angle must be finite".into()));
        }
        Ok(vec![canonical_angle(coords[0])])
    }

    pub fn distance(p: &[f64], q: &[f64]) -> f64 {
        wrap_diff(p[0], q[0]).abs()
    }

    pub fn exp(p: &[f64], v: &[f64]) -> Vec<f64> {
        vec![canonical_angle(p[0] + v[0])]
    }

    pub fn log(p: &[f64], q: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let d = wrap_diff(p[0], q[0]);
        check_cut(d, d.abs(), PI)?;
        Ok(vec![d])
    }
}

/// A patch of the embedded torus with major radius `major` (R) and minor
/// radius `minor` (r), centred at angles `center = (θ_c, φ_c)`.
///
/// The metric is frozen at the patch centre: with A = R + r·cos φ_c,
/// ds² = A²dθ² + r²dφ². The patch is therefore a flat torus, and tangent
/// vectors are stored in the orthonormal frame (A·dθ, r·dφ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPatch {
    pub major: f64,
    pub minor: f64,
    pub center: [f64; 2],
    pub radius: f64,
}

impl TorusPatch {
    pub fn new(major: f64, minor: f64, center: [f64; 2], radius: f64) -> Result<Self, GeometryError> {
        let t = TorusPatch {
            major,
            minor,
            center: [canonical_angle(center[0]), canonical_angle(center[1])],
            radius,
        };
        t.validate()?;
        Ok(t)
    }

    pub(super) fn validate(&self) -> Result<(), GeometryError> {
        let ok = self.major.is_finite()
            && self.minor.is_finite()
            && self.minor > 0.0
            && self.major > self.minor;
        if !ok {
            return Err(GeometryError::InvalidManifold(format!(
                "torus radii must satisfy R > r > 0 (got R = {}, r = {})",
                self.major, self.minor
            )));
        }
        if !(self.radius > 0.0 && self.radius <= self.flat_injectivity()) {
            return Err(GeometryError::InvalidManifold(format!(
                "patch radius {} must lie in (0, {}]",
                self.radius,
                self.flat_injectivity()
            )));
        }
        Ok(())
    }

    /// The frozen θ-scale A = R + r·cos φ_c.
    pub fn theta_scale(&self) -> f64 {
        self.major + self.minor * self.center[1].cos()
    }

    /// Injectivity radius of the flat torus defined by the frozen metric.
    pub fn flat_injectivity(&self) -> f64 {
        PI * self.theta_scale().min(self.minor)
    }

    /// Gaussian curvature of the embedded torus at latitude φ.
    pub fn gaussian_curvature(&self, phi: f64) -> f64 {
        curvature_at(self.major, self.minor, phi)
    }

    pub(super) fn raw_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let a = self.theta_scale() * wrap_diff(p[0], q[0]);
        let b = self.minor * wrap_diff(p[1], q[1]);
        a.hypot(b)
    }

    pub(super) fn validate_point(&self, coords: &[f64]) -> Result<Vec<f64>, GeometryError> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NotOnManifold("angles must be finite".into()));
        }
        let p = vec![canonical_angle(coords[0]), canonical_angle(coords[1])];
        let d = self.raw_distance(&self.center, &p);
        if d > self.radius * (1.0 + 1e-9) {
            return Err(GeometryError::OutsidePatch {
                distance: d,
                radius: self.radius,
            });
        }
        Ok(p)
    }

    pub(super) fn exp(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        vec![
            canonical_angle(p[0] + v[0] / self.theta_scale()),
            canonical_angle(p[1] + v[1] / self.minor),
        ]
    }

    pub(super) fn log(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let dt = wrap_diff(p[0], q[0]);
        let dp = wrap_diff(p[1], q[1]);
        let v = vec![self.theta_scale() * dt, self.minor * dp];
        let d = v[0].hypot(v[1]);
        check_cut(dt, d, self.flat_injectivity())?;
        check_cut(dp, d, self.flat_injectivity())?;
        Ok(v)
    }
}

/// Gaussian curvature K(φ) = cos φ / (r (R + r cos φ)) of the standard torus.
pub fn curvature_at(major: f64, minor: f64, phi: f64) -> f64 {
    phi.cos() / (minor * (major + minor * phi.cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_angle_range() {
        for a in [-1e-17, -TAU, TAU, 3.0 * TAU + 0.1, -0.5] {
            let c = canonical_angle(a);
            assert!((0.0..TAU).contains(&c), "{a} -> {c}");
        }
    }

    #[test]
    fn wrap_is_shortest() {
        assert!((wrap_diff(0.1, TAU - 0.1) + 0.2).abs() < 1e-15);
        assert!((wrap_diff(TAU - 0.1, 0.1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn torus_rejects_bad_radii() {
        assert!(TorusPatch::new(0.5, 0.7, [0.0, 0.0], 0.1).is_err());
        assert!(TorusPatch::new(2.0, 0.7, [0.0, 0.0], 10.0).is_err());
    }

    #[test]
    fn curvature_extremes_closed_form() {
        let (r_maj, r_min) = (2.0, 0.7);
        assert!((curvature_at(r_maj, r_min, 0.0) - 1.0 / (r_min * (r_maj + r_min))).abs() < 1e-15);
        assert!((curvature_at(r_maj, r_min, PI) + 1.0 / (r_min * (r_maj - r_min))).abs() < 1e-15);
    }
}
