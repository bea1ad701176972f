//! Synthetic data for each experiment. Every generator is a pure function
//! of its seed; noise is drawn from named streams.

use super::rng::{stream, Stream};
use super::Result;
use crate::geometry::{canonical_angle, torus_curvature, wrap_diff, Manifold, Point, Tangent};
use crate::regression::{RegressionDataset, SafeSetRule};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, TAU};

/// A generated dataset with the noiseless response at every predictor.
#[derive(Clone, Debug)]
pub struct Generated {
    pub dataset: RegressionDataset,
    pub truth: Vec<Point>,
    pub metadata: Map<String, Value>,
}

fn s2() -> Manifold {
    Manifold::Sphere { dim: 2 }
}

fn normal(rng: &mut Stream) -> f64 {
    rng.sample(StandardNormal)
}

fn normal3(rng: &mut Stream) -> [f64; 3] {
    [normal(rng), normal(rng), normal(rng)]
}

/// z − ⟨z, p⟩p for unit p.
fn project(p: &Point, z: [f64; 3]) -> Tangent {
    let c = p.coords();
    let ip: f64 = (0..3).map(|i| z[i] * c[i]).sum();
    Tangent::new((0..3).map(|i| z[i] - ip * c[i]).collect())
}

fn equispaced(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn to_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

// ---------------------------------------------------------------- sphere

/// Base point, direction and segment length of the sphere geodesic. These
/// are conventions; the experiment never states the actual points.
pub const GEODESIC_BASE: [f64; 3] = [1.0, 0.0, 0.0];
pub const GEODESIC_DIRECTION: [f64; 3] = [0.0, 1.0, 0.0];
pub const GEODESIC_LENGTH: f64 = 1.0;
pub const GEODESIC_X_TEST: f64 = 1.87;

/// γ(x) = exp_{y₀}(x·L·e), defined for every real x.
pub fn geodesic_point(x: f64) -> Point {
    let s = x * GEODESIC_LENGTH;
    let b = GEODESIC_BASE;
    let e = GEODESIC_DIRECTION;
    Point::from_raw((0..3).map(|i| s.cos() * b[i] + s.sin() * e[i]).collect())
}

fn geodesic_metadata() -> Value {
    json!({
        "base_point": GEODESIC_BASE,
        "direction": GEODESIC_DIRECTION,
        "segment_length": GEODESIC_LENGTH,
        "conventions": ["base_point", "direction", "segment_length"],
    })
}

pub fn gen_sphere_geodesic(_seed: u64) -> Result<Generated> {
    let xs = [0.0, 0.5, 1.0];
    let truth: Vec<Point> = xs.iter().map(|&x| geodesic_point(x)).collect();
    let rule = SafeSetRule {
        lambda_ex: 0.45,
        ..SafeSetRule::default()
    };
    let dataset = RegressionDataset::with_safe_set_rule(
        s2(),
        xs.iter().map(|&x| vec![x]).collect(),
        truth.clone(),
        &rule,
    )?;
    let mut metadata = to_map(geodesic_metadata());
    metadata.insert("x_test".into(), json!(GEODESIC_X_TEST));
    metadata.insert("safe_set_rule".into(), serde_json::to_value(&rule)?);
    Ok(Generated {
        dataset,
        truth,
        metadata,
    })
}

/// Adds tangent noise σ(z − ⟨z, y⟩y), z ~ N(0, I₃), and maps back by exp.
fn sphere_noise(m: &Manifold, y: &Point, sigma: f64, rng: &mut Stream) -> Result<Point> {
    let v = project(y, normal3(rng)).scaled(sigma);
    Ok(m.exp(y, &v)?)
}

pub const NOISY_GEODESIC_N: usize = 20;
pub const NOISY_GEODESIC_SIGMA: f64 = 0.1;

pub fn gen_sphere_noisy_geodesic(seed: u64, sigma: f64) -> Result<Generated> {
    let m = s2();
    let xs = equispaced(NOISY_GEODESIC_N, 0.0, 1.0);
    let truth: Vec<Point> = xs.iter().map(|&x| geodesic_point(x)).collect();
    let mut rng = stream("sphere-noisy-geodesic", seed, "noise");
    let responses = truth
        .iter()
        .map(|y| sphere_noise(&m, y, sigma, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let rule = SafeSetRule::default();
    let dataset = RegressionDataset::with_safe_set_rule(
        m,
        xs.iter().map(|&x| vec![x]).collect(),
        responses,
        &rule,
    )?;
    let mut metadata = to_map(geodesic_metadata());
    metadata.insert("sigma".into(), json!(sigma));
    metadata.insert("safe_set_rule".into(), serde_json::to_value(&rule)?);
    Ok(Generated {
        dataset,
        truth,
        metadata,
    })
}

pub const SPIRAL_N: usize = 50;
/// Not given for the spiral experiment; chosen as a convention.
pub const SPIRAL_SIGMA: f64 = 0.05;

/// m(x) = (√(1−x²)cos πx, √(1−x²)sin πx, x).
pub fn spiral_point(x: f64) -> Point {
    let s = (1.0 - x * x).max(0.0).sqrt();
    Point::from_raw(vec![s * (PI * x).cos(), s * (PI * x).sin(), x])
}

pub fn gen_sphere_spiral(seed: u64) -> Result<Generated> {
    let m = s2();
    let xs: Vec<f64> = (0..SPIRAL_N)
        .map(|i| (i as f64 + 0.5) / SPIRAL_N as f64)
        .collect();
    let truth: Vec<Point> = xs.iter().map(|&x| spiral_point(x)).collect();
    let mut rng = stream("sphere-spiral", seed, "noise");
    let responses = truth
        .iter()
        .map(|y| sphere_noise(&m, y, SPIRAL_SIGMA, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let rule = SafeSetRule::default();
    let dataset = RegressionDataset::with_safe_set_rule(
        m,
        xs.iter().map(|&x| vec![x]).collect(),
        responses,
        &rule,
    )?;
    let metadata = to_map(json!({
        "n": SPIRAL_N,
        "sigma": SPIRAL_SIGMA,
        "conventions": ["n", "sigma", "predictor grid (i + 0.5)/n"],
        "safe_set_rule": rule,
    }));
    Ok(Generated {
        dataset,
        truth,
        metadata,
    })
}

// ---------------------------------------------------------------- S² × S¹

pub const S2XS1_N: usize = 40;
pub const S2XS1_SIGMA_SPHERE: f64 = 0.045;
pub const S2XS1_SIGMA_CIRCLE: f64 = 0.035;
pub const S2XS1_ALPHA_MAX: f64 = 1.40;

/// α(x) = 1.40·(3x² − 2x³).
pub fn s2xs1_alpha(x: f64) -> f64 {
    S2XS1_ALPHA_MAX * (3.0 * x * x - 2.0 * x * x * x)
}

pub fn s2xs1_manifold() -> Manifold {
    Manifold::Product {
        factors: vec![s2(), Manifold::Circle],
    }
}

/// m(x) = ((sin α, 0, cos α), 0.80πx mod 2π).
pub fn s2xs1_point(x: f64) -> Point {
    let a = s2xs1_alpha(x);
    Point::from_raw(vec![a.sin(), 0.0, a.cos(), canonical_angle(0.8 * PI * x)])
}

pub fn s2xs1_rule() -> SafeSetRule {
    SafeSetRule {
        lambda_ex: 0.1,
        ..SafeSetRule::default()
    }
}

pub fn gen_s2xs1(seed: u64) -> Result<Generated> {
    let m = s2xs1_manifold();
    let sphere = s2();
    let xs = equispaced(S2XS1_N, 0.0, 1.0);
    let truth: Vec<Point> = xs.iter().map(|&x| s2xs1_point(x)).collect();
    let mut rng = stream("s2xs1-compare", seed, "noise");
    let mut responses = Vec::with_capacity(xs.len());
    for y in &truth {
        let c = y.coords();
        let p = Point::from_raw(c[..3].to_vec());
        let u = project(&p, normal3(&mut rng));
        let amp = S2XS1_SIGMA_SPHERE * normal(&mut rng);
        let p_new = sphere.exp(&p, &u.scaled(amp / u.norm()))?;
        let theta = c[3] + S2XS1_SIGMA_CIRCLE * normal(&mut rng);
        let mut coords = p_new.into_coords();
        coords.push(theta);
        responses.push(m.point(coords)?);
    }
    let rule = s2xs1_rule();
    let dataset = RegressionDataset::with_safe_set_rule(
        m,
        xs.iter().map(|&x| vec![x]).collect(),
        responses,
        &rule,
    )?;
    let metadata = to_map(json!({
        "n": S2XS1_N,
        "sigma_sphere": S2XS1_SIGMA_SPHERE,
        "sigma_circle": S2XS1_SIGMA_CIRCLE,
        "alpha_max": S2XS1_ALPHA_MAX,
        "base_point": [0.0, 0.0, 1.0, 0.0],
        "safe_set_rule": rule,
    }));
    Ok(Generated {
        dataset,
        truth,
        metadata,
    })
}

/// Largest sectional curvature of planes spanned by the velocity of the
/// noiseless curve and a direction orthogonal to it, at predictor `x`.
/// Only the S² part of a mixed plane is curved, so a plane containing the
/// unit velocity (u_s, u_c) has curvature at most |u_s|²; this is the
/// along-curve estimate reported by the experiment.
pub fn s2xs1_curve_curvature(x: f64) -> f64 {
    let da = S2XS1_ALPHA_MAX * (6.0 * x - 6.0 * x * x);
    let dt = 0.8 * PI;
    da * da / (da * da + dt * dt)
}

// ---------------------------------------------------------------- torus

pub const TORUS_MAJOR: f64 = 2.0;
pub const TORUS_MINOR: f64 = 0.7;

pub const TORUS_LOCAL_N: usize = 40;
pub const TORUS_LOCAL_SIGMA: f64 = 0.04;
pub const TORUS_LOCAL_LENGTH: f64 = 1.45;
pub const TORUS_LOCAL_ANGLE: f64 = FRAC_PI_3;
pub const TORUS_LOCAL_CENTER: [f64; 2] = [0.0, FRAC_PI_2];
pub const TORUS_LOCAL_PATCH_RADIUS: f64 = 2.1;

pub fn torus_local_manifold() -> Result<Manifold> {
    Ok(Manifold::torus_patch(
        TORUS_MAJOR,
        TORUS_MINOR,
        TORUS_LOCAL_CENTER,
        TORUS_LOCAL_PATCH_RADIUS,
    )?)
}

fn torus_local_a0() -> f64 {
    TORUS_MAJOR + TORUS_MINOR * TORUS_LOCAL_CENTER[1].cos()
}

/// Unwrapped (θ(x), φ(x)) of the straight line through the patch centre.
pub fn torus_local_angles(x: f64) -> [f64; 2] {
    let a0 = torus_local_a0();
    let l = TORUS_LOCAL_LENGTH;
    [
        TORUS_LOCAL_CENTER[0] + l * TORUS_LOCAL_ANGLE.cos() / a0 * (x - 0.5),
        TORUS_LOCAL_CENTER[1] + l * TORUS_LOCAL_ANGLE.sin() / TORUS_MINOR * (x - 0.5),
    ]
}

/// Extremes of K(φ) over `samples` points of the noiseless local curve.
pub fn torus_local_curvature_range(samples: usize) -> (f64, f64) {
    equispaced(samples, 0.0, 1.0)
        .into_iter()
        .map(|x| torus_curvature(TORUS_MAJOR, TORUS_MINOR, torus_local_angles(x)[1]))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| (lo.min(k), hi.max(k)))
}

/// Extremes of K(φ) over a full revolution in φ.
pub fn torus_curvature_extremes(samples: usize) -> (f64, f64) {
    (0..samples)
        .map(|i| torus_curvature(TORUS_MAJOR, TORUS_MINOR, TAU * i as f64 / samples as f64))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| (lo.min(k), hi.max(k)))
}

pub fn gen_torus_local(seed: u64) -> Result<Generated> {
    let m = torus_local_manifold()?;
    let xs = equispaced(TORUS_LOCAL_N, 0.0, 1.0);
    let a0 = torus_local_a0();
    let mut rng = stream("torus-local", seed, "noise");
    let mut truth = Vec::with_capacity(xs.len());
    let mut responses = Vec::with_capacity(xs.len());
    for &x in &xs {
        let [t, p] = torus_local_angles(x);
        truth.push(m.point(vec![t, p])?);
        let et = normal(&mut rng);
        let ep = normal(&mut rng);
        responses.push(m.point(vec![
            t + TORUS_LOCAL_SIGMA / a0 * et,
            p + TORUS_LOCAL_SIGMA / TORUS_MINOR * ep,
        ])?);
    }
    let rule = SafeSetRule::default();
    let dataset = RegressionDataset::with_safe_set_rule(
        m,
        xs.iter().map(|&x| vec![x]).collect(),
        responses,
        &rule,
    )?;
    let (k_lo, k_hi) = torus_local_curvature_range(100_001);
    let metadata = to_map(json!({
        "major": TORUS_MAJOR,
        "minor": TORUS_MINOR,
        "center": TORUS_LOCAL_CENTER,
        "patch_radius": TORUS_LOCAL_PATCH_RADIUS,
        "length": TORUS_LOCAL_LENGTH,
        "angle": TORUS_LOCAL_ANGLE,
        "sigma": TORUS_LOCAL_SIGMA,
        "curvature_range_computed": [k_lo, k_hi],
        "curvature_range_stated": [-0.767, 0.397],
        "curvature_range_mismatch": (k_hi - 0.397).abs() > 5e-3 || (k_lo + 0.767).abs() > 5e-3,
        "safe_set_rule": rule,
    }));
    Ok(Generated {
        dataset,
        truth,
        metadata,
    })
}

pub const TORUS_GLOBAL_N: usize = 300;
pub const TORUS_GLOBAL_X_MAX: f64 = 6.0;
pub const TORUS_GLOBAL_SIGMA: f64 = 0.035;
pub const TORUS_GLOBAL_WINDINGS: [f64; 2] = [1.0, 6.0];
pub const TORUS_GLOBAL_RHO_SAFE: f64 = 0.55;
pub const TORUS_GLOBAL_MIN_POINTS: usize = 8;
pub const TORUS_GLOBAL_HALF_WIDTH: [f64; 2] = [0.04, 0.35];

/// Unwrapped (θ(x), φ(x)) of the closed curve winding once in θ and six
/// times in φ over [0, 6].
pub fn torus_global_angles(x: f64) -> [f64; 2] {
    let s = x / TORUS_GLOBAL_X_MAX;
    [TAU * TORUS_GLOBAL_WINDINGS[0] * s, TAU * TORUS_GLOBAL_WINDINGS[1] * s]
}

/// Chart-metric speed of the noiseless curve at x under the metric frozen
/// at φ(x).
pub fn torus_global_speed(x: f64) -> f64 {
    let [_, phi] = torus_global_angles(x);
    let dt = TAU * TORUS_GLOBAL_WINDINGS[0] / TORUS_GLOBAL_X_MAX;
    let dp = TAU * TORUS_GLOBAL_WINDINGS[1] / TORUS_GLOBAL_X_MAX;
    let a = TORUS_MAJOR + TORUS_MINOR * phi.cos();
    (a * dt).hypot(TORUS_MINOR * dp)
}

/// Signed periodic predictor offset x − x₀ in (−3, 3].
pub fn periodic_offset(x: f64, x0: f64) -> f64 {
    let p = TORUS_GLOBAL_X_MAX;
    let d = (x - x0).rem_euclid(p);
    if d > 0.5 * p {
        d - p
    } else {
        d
    }
}

/// The local regression around one query of the global torus experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub speed: f64,
    pub half_width: f64,
    pub bandwidth: f64,
    pub indices: Vec<usize>,
    /// Whether the nearest-neighbour fallback filled the window up to the
    /// minimum size.
    pub padded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGlobal {
    pub major: f64,
    pub minor: f64,
    pub predictors: Vec<f64>,
    /// Observed angles (θ, φ), wrapped to [0, 2π).
    pub angles: Vec<[f64; 2]>,
    pub sigma: f64,
}

pub fn gen_torus_global(seed: u64) -> TorusGlobal {
    let mut rng = stream("torus-global", seed, "noise");
    let predictors: Vec<f64> = (0..TORUS_GLOBAL_N)
        .map(|i| TORUS_GLOBAL_X_MAX * i as f64 / TORUS_GLOBAL_N as f64)
        .collect();
    let angles = predictors
        .iter()
        .map(|&x| {
            let [t, p] = torus_global_angles(x);
            let et = normal(&mut rng);
            let ep = normal(&mut rng);
            [
                canonical_angle(t + TORUS_GLOBAL_SIGMA * et),
                canonical_angle(p + TORUS_GLOBAL_SIGMA * ep),
            ]
        })
        .collect();
    TorusGlobal {
        major: TORUS_MAJOR,
        minor: TORUS_MINOR,
        predictors,
        angles,
        sigma: TORUS_GLOBAL_SIGMA,
    }
}

impl TorusGlobal {
    pub fn window(&self, x0: f64) -> Window {
        let speed = torus_global_speed(x0);
        let [lo, hi] = TORUS_GLOBAL_HALF_WIDTH;
        let half_width = (0.85 * TORUS_GLOBAL_RHO_SAFE / speed.max(1e-12)).clamp(lo, hi);
        let mut by_distance: Vec<(f64, usize)> = self
            .predictors
            .iter()
            .enumerate()
            .map(|(i, &x)| (periodic_offset(x, x0).abs(), i))
            .collect();
        by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let inside = by_distance.iter().filter(|(d, _)| *d <= half_width).count();
        let take = inside.max(TORUS_GLOBAL_MIN_POINTS);
        let mut indices: Vec<usize> = by_distance[..take].iter().map(|&(_, i)| i).collect();
        indices.sort_unstable();
        Window {
            x0,
            speed,
            half_width,
            bandwidth: 0.45 * half_width,
            indices,
            padded: inside < TORUS_GLOBAL_MIN_POINTS,
        }
    }

    /// The window's data as a regression problem on a torus patch centred at
    /// the circular mean of its angles, with predictors x − x₀.
    pub fn window_dataset(&self, w: &Window) -> Result<RegressionDataset> {
        let first = self.angles[w.indices[0]];
        let n = w.indices.len() as f64;
        let mut mean = [0.0; 2];
        for &i in &w.indices {
            for (k, m) in mean.iter_mut().enumerate() {
                *m += wrap_diff(first[k], self.angles[i][k]) / n;
            }
        }
        let center = [first[0] + mean[0], first[1] + mean[1]];
        let a_c = self.major + self.minor * center[1].cos();
        let radius = 0.95 * PI * a_c.min(self.minor);
        let m = Manifold::torus_patch(self.major, self.minor, center, radius)?;
        let responses = w
            .indices
            .iter()
            .map(|&i| m.point(self.angles[i].to_vec()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let predictors = w
            .indices
            .iter()
            .map(|&i| vec![periodic_offset(self.predictors[i], w.x0)])
            .collect();
        Ok(RegressionDataset::with_safe_set_rule(
            m,
            predictors,
            responses,
            &SafeSetRule::default(),
        )?)
    }

    pub fn metadata(&self) -> Map<String, Value> {
        let (k_lo, k_hi) = torus_curvature_extremes(100_000);
        to_map(json!({
            "major": self.major,
            "minor": self.minor,
            "n": self.predictors.len(),
            "x_max": TORUS_GLOBAL_X_MAX,
            "windings": TORUS_GLOBAL_WINDINGS,
            "sigma": self.sigma,
            "rho_safe": TORUS_GLOBAL_RHO_SAFE,
            "half_width_clamp": TORUS_GLOBAL_HALF_WIDTH,
            "min_points": TORUS_GLOBAL_MIN_POINTS,
            "curvature_extremes": [k_lo, k_hi],
        }))
    }
}

/// Truth of the global torus curve at x as wrapped angles.
pub fn torus_global_truth(x: f64) -> [f64; 2] {
    let [t, p] = torus_global_angles(x);
    [canonical_angle(t), canonical_angle(p)]
}

#[cfg(test)]
#[path = "generators_tests.rs"]
mod tests;
