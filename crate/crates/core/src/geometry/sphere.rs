//! Unit sphere S^n embedded in R^{n+1}. Tangent vectors are ambient vectors
//! orthogonal to the base point, so the metric is the Euclidean dot product.

use super::{dot, norm, GeometryError};
use std::f64::consts::PI;

/// Points closer than this to antipodal are treated as cut-locus pairs.
const ANTIPODAL_MARGIN: f64 = 1e-8;

pub(super) fn validate(coords: &[f64]) -> Result<Vec<f64>, GeometryError> {
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(GeometryError::NotOnManifold(
            "sphere coordinates must be finite".into(),
        ));
    }
    let n = norm(coords);
    if (n - 1.0).abs() > 1e-6 {
        return Err(GeometryError::NotOnManifold(format!(
            "sphere point has norm {n}, expected 1"
        )));
    }
    if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
        // Already normalized; leaving the bits alone keeps file round trips stable.
        return Ok(coords.to_vec());
    }
    Ok(coords.iter().map(|c| c / n).collect())
}

pub(super) fn distance(p: &[f64], q: &[f64]) -> f64 {
    // 2·atan2(|p−q|, |p+q|) is accurate at both ends of [0, π], unlike arccos.
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (a, b) in p.iter().zip(q) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// sin(t)/t with a series branch near zero.
fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

pub(super) fn exp(p: &[f64], v: &[f64]) -> Vec<f64> {
    let t = norm(v);
    if t == 0.0 {
        return p.to_vec();
    }
    let (c, s) = (t.cos(), sinc(t));
    let mut out: Vec<f64> = p.iter().zip(v).map(|(a, b)| c * a + s * b).collect();
    let n = norm(&out);
    out.iter_mut().for_each(|x| *x /= n);
    out
}

pub(super) fn log(p: &[f64], q: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let d = distance(p, q);
    if d >= PI - ANTIPODAL_MARGIN {
        return Err(GeometryError::OutsideInjectivity {
            distance: d,
            limit: PI,
        });
    }
    // Projection of q − p onto T_p; written via the difference to limit cancellation.
    let diff: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let c = dot(p, &diff);
    let u: Vec<f64> = diff.iter().zip(p).map(|(a, b)| a - c * b).collect();
    if d < 1e-8 {
        return Ok(u);
    }
    let un = norm(&u);
    if un == 0.0 {
        return Ok(vec![0.0; p.len()]);
    }
    Ok(u.iter().map(|x| x * d / un).collect())
}

pub(super) fn transport(p: &[f64], q: &[f64], v: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let pq = dot(p, q);
    if 1.0 + pq <= 1e-15 || distance(p, q) >= PI - ANTIPODAL_MARGIN {
        return Err(GeometryError::OutsideInjectivity {
            distance: distance(p, q),
            limit: PI,
        });
    }
    let coef = dot(q, v) / (1.0 + pq);
    Ok(v
        .iter()
        .zip(p.iter().zip(q))
        .map(|(x, (a, b))| x - coef * (a + b))
        .collect())
}

/// s/sin(s) with a series branch near zero.
pub(super) fn jacobi_scale(s: f64) -> f64 {
    if s < 1e-4 {
        let s2 = s * s;
        1.0 + s2 / 6.0 + 7.0 * s2 * s2 / 360.0
    } else {
        s / s.sin()
    }
}

pub(super) fn dlog_adjoint(p: &[f64], y: &[f64], xi: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let s = distance(p, y);
    if s == 0.0 {
        return Ok(xi.to_vec());
    }
    let l = log(p, y)?;
    let ln = norm(&l);
    if ln == 0.0 {
        return Ok(xi.to_vec());
    }
    let u: Vec<f64> = l.iter().map(|x| x / ln).collect();
    let a = dot(xi, &u);
    let sigma = jacobi_scale(s);
    let mixed: Vec<f64> = xi
        .iter()
        .zip(&u)
        .map(|(x, ui)| a * ui + sigma * (x - a * ui))
        .collect();
    transport(p, y, &mixed)
}

pub(super) fn project(p: &[f64], v: &[f64]) -> Vec<f64> {
    let c = dot(p, v);
    v.iter().zip(p).map(|(x, a)| x - c * a).collect()
}

/// Orthonormal basis of the tangent space at p via Gram–Schmidt on the
/// standard basis.
pub(super) fn tangent_basis(p: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    // Start from the axes least aligned with p for numerical stability.
    order.sort_by(|&i, &j| p[i].abs().total_cmp(&p[j].abs()));
    for &i in &order {
        if basis.len() == n - 1 {
            break;
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let mut v = project(p, &e);
        for b in &basis {
            let c = dot(b, &v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let vn = norm(&v);
        if vn > 1e-6 {
            v.iter_mut().for_each(|x| *x /= vn);
            basis.push(v);
        }
    }
    basis
}
