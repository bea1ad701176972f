use super::*;
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

fn s2() -> Manifold {
    Manifold::sphere(2).unwrap()
}

fn pt(m: &Manifold, c: &[f64]) -> Point {
    m.point(c.to_vec()).unwrap()
}

fn torus() -> Manifold {
    Manifold::torus_patch(2.0, 0.7, [0.0, FRAC_PI_2], 2.1).unwrap()
}

fn s2xs1() -> Manifold {
    Manifold::product(vec![s2(), Manifold::circle()]).unwrap()
}

fn catalog() -> Vec<Manifold> {
    vec![
        s2(),
        Manifold::sphere(3).unwrap(),
        Manifold::circle(),
        torus(),
        s2xs1(),
    ]
}

fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn sphere_distance_examples() {
    let m = s2();
    let e1 = pt(&m, &[1.0, 0.0, 0.0]);
    let e2 = pt(&m, &[0.0, 1.0, 0.0]);
    let m1 = pt(&m, &[-1.0, 0.0, 0.0]);
    assert_eq!(m.distance(&e1, &e1).unwrap(), 0.0);
    assert!((m.distance(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);
    assert!((m.distance(&e1, &m1).unwrap() - PI).abs() < 1e-15);
}

#[test]
fn sphere_exp_log_examples() {
    let m = s2();
    let e1 = pt(&m, &[1.0, 0.0, 0.0]);
    let e2 = pt(&m, &[0.0, 1.0, 0.0]);
    let v = Tangent::new(vec![0.0, FRAC_PI_2, 0.0]);
    assert_vec_close(m.exp(&e1, &v).unwrap().coords(), e2.coords(), 1e-15);
    assert_vec_close(m.log(&e1, &e2).unwrap().coords(), v.coords(), 1e-15);
    assert_eq!(m.exp(&e1, &m.zero_tangent()).unwrap(), e1);
    assert_eq!(m.log(&e1, &e1).unwrap().norm(), 0.0);
    let anti = pt(&m, &[-1.0, 0.0, 0.0]);
    assert!(matches!(
        m.log(&e1, &anti),
        Err(GeometryError::OutsideInjectivity { .. })
    ));
}

#[test]
fn circle_exp_is_angle_addition() {
    let m = Manifold::circle();
    let p = pt(&m, &[0.3]);
    let q = m.exp(&p, &Tangent::new(vec![0.5])).unwrap();
    assert!((q.coords()[0] - 0.8).abs() < 1e-15);
    let wrapped = m.exp(&pt(&m, &[6.0]), &Tangent::new(vec![0.5])).unwrap();
    assert!((wrapped.coords()[0] - (6.5 - TAU)).abs() < 1e-15);
}

use std::f64::consts::TAU;

#[test]
fn transport_examples() {
    let m = s2();
    let p = pt(&m, &[1.0, 0.0, 0.0]);
    let q = pt(&m, &[0.6, 0.8, 0.0]);
    let v = Tangent::new(vec![0.0, 0.3, -0.4]);
    assert_eq!(m.transport(&p, &p, &v).unwrap(), v);
    // Geodesics are auto-parallel: the velocity at p transports to the velocity at q.
    let lp = m.log(&p, &q).unwrap();
    let lq = m.log(&q, &p).unwrap().scaled(-1.0);
    assert_vec_close(m.transport(&p, &q, &lp).unwrap().coords(), lq.coords(), 1e-14);
}

#[test]
fn dlog_adjoint_examples() {
    let m = s2();
    let p = pt(&m, &[1.0, 0.0, 0.0]);
    let y = pt(&m, &[1f64.cos(), 1f64.sin(), 0.0]);
    let xi = Tangent::new(vec![0.0, 0.2, -0.7]);
    assert_eq!(m.dlog_adjoint(&p, &p, &xi).unwrap(), xi);
    // Radial: plain transport.
    let radial = Tangent::new(vec![0.0, 0.4, 0.0]);
    let a = m.dlog_adjoint(&p, &y, &radial).unwrap();
    let t = m.transport(&p, &y, &radial).unwrap();
    assert_vec_close(a.coords(), t.coords(), 1e-15);
    // Orthogonal at s = 1: scaled by 1/sin(1).
    let orth = Tangent::new(vec![0.0, 0.0, 1.0]);
    let a = m.dlog_adjoint(&p, &y, &orth).unwrap();
    assert!((a.norm() - 1.188_395_105_778_121_22).abs() < 1e-14);
    // Finite-difference oracle for ψ(y) = ⟨ξ, log_p(y)⟩.
    let fd = m
        .numerical_gradient::<GeometryError, _>(&y, |z| Ok(orth.dot(&m.log(&p, z)?)), 1e-5)
        .unwrap();
    assert!(fd.sub(&a).norm() < 1e-5 * a.norm());
}

#[test]
fn frechet_mean_examples() {
    let m = s2();
    let a = pt(&m, &[1.0, 0.0, 0.0]);
    let b = pt(&m, &[0.0, 1.0, 0.0]);
    let c = pt(&m, &[0.0, 0.0, 1.0]);
    assert_eq!(m.frechet_mean(&[a.clone()], &[1.0]).unwrap(), a);
    let mid = m.frechet_mean(&[a.clone(), b.clone()], &[0.5, 0.5]).unwrap();
    let expect = m.exp(&a, &m.log(&a, &b).unwrap().scaled(0.5)).unwrap();
    assert_vec_close(mid.coords(), expect.coords(), 1e-10);
    let first = m
        .frechet_mean(&[a.clone(), b.clone(), c.clone()], &[1.0, 0.0, 0.0])
        .unwrap();
    assert_eq!(first, a);
    assert!(m.frechet_mean(&[a, b], &[0.7, 0.7]).is_err());
}

#[test]
fn point_validation() {
    let m = s2();
    assert!(matches!(
        m.point(vec![1.0, 0.0]),
        Err(GeometryError::DimensionMismatch { .. })
    ));
    assert!(m.point(vec![2.0, 0.0, 0.0]).is_err());
    let p = m.point(vec![1.0 + 1e-9, 0.0, 0.0]).unwrap();
    assert!((norm(p.coords()) - 1.0).abs() < 1e-15);
    let t = torus();
    assert!(matches!(
        t.point(vec![PI, FRAC_PI_2]),
        Err(GeometryError::OutsidePatch { .. })
    ));
    assert!(Manifold::product(vec![]).is_err());
    assert!(Manifold::product(vec![s2xs1()]).is_err());
    assert!(Manifold::sphere(0).is_err());
}

#[test]
fn tangent_validation() {
    let m = s2();
    let p = pt(&m, &[1.0, 0.0, 0.0]);
    assert!(m.tangent(&p, vec![0.0, 1.0, 0.0]).is_ok());
    assert!(matches!(m.tangent(&p, vec![0.1, 1.0, 0.0]), Err(GeometryError::NotTangent(_))));
}

#[test]
fn torus_distance_matches_frozen_formula() {
    let m = torus();
    let Manifold::TorusPatch(t) = &m else { unreachable!() };
    let a = 2.0 + 0.7 * FRAC_PI_2.cos();
    for (p, q) in [([0.1, 1.2], [6.2, 1.9]), ([0.0, 1.5], [0.3, 2.0])] {
        let (pp, qq) = (pt(&m, &p), pt(&m, &q));
        let dth = wrap_diff(pp.coords()[0], qq.coords()[0]);
        let dph = wrap_diff(pp.coords()[1], qq.coords()[1]);
        let expect = (a * dth).hypot(0.7 * dph);
        assert_eq!(m.distance(&pp, &qq).unwrap(), expect);
        assert_eq!(t.theta_scale(), a);
    }
}

#[test]
fn caps_and_profiles() {
    assert_eq!(s2().caps().inj_lower, PI);
    assert_eq!(torus().caps().inj_lower, 2.1);
    assert_eq!(s2xs1().caps().dim, 3);
    assert_eq!(s2xs1().curvature_profile(), CurvatureProfile::new(0.0, 1.0, 0.0, 2.0));
    assert_eq!(Manifold::circle().curvature_profile(), CurvatureProfile::flat());
    assert_eq!(torus().curvature_profile(), CurvatureProfile::flat());
}

#[test]
fn manifold_serde_roundtrip() {
    for m in catalog() {
        let s = serde_json::to_string(&m).unwrap();
        let back: Manifold = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}

// Property tests: random base point near a reference, random tangent.

fn raw_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

/// A base point drawn from a ball of radius `spread` around a reference
/// point (keeps torus points inside the patch).
fn base_point(m: &Manifold, raw: &[f64], spread: f64) -> Point {
    let anchor = match m {
        Manifold::Sphere { dim } => {
            let mut c = vec![0.0; dim + 1];
            c[0] = 1.0;
            c
        }
        Manifold::Circle => vec![1.0],
        Manifold::TorusPatch(t) => t.center.to_vec(),
        Manifold::Product { .. } => vec![1.0, 0.0, 0.0, 1.0],
    };
    let anchor = m.point(anchor).unwrap();
    let v = m.project_tangent(&anchor, &raw[..m.tangent_len()]);
    let n = v.norm().max(1e-12);
    m.exp(&anchor, &v.scaled(spread * raw[m.tangent_len()].abs() / n)).unwrap()
}

fn direction(m: &Manifold, p: &Point, raw: &[f64]) -> Tangent {
    let v = m.project_tangent(p, raw);
    let n = v.norm();
    if n < 1e-3 {
        m.tangent_basis(p)[0].clone()
    } else {
        v.scaled(1.0 / n)
    }
}

fn manifold_index() -> impl Strategy<Value = usize> {
    0usize..5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exp_log_inversion(i in manifold_index(), a in raw_vec(8), b in raw_vec(8), frac in 0.0f64..0.9) {
        let m = &catalog()[i];
        let spread = if matches!(m, Manifold::TorusPatch(_)) { 0.3 } else { 1.0 };
        let p = base_point(m, &a, spread);
        let u = direction(m, &p, &b[..m.tangent_len()]);
        let v = u.scaled(frac * m.inj_lower());
        let q = m.exp(&p, &v).unwrap();
        let back = m.log(&p, &q).unwrap();
        prop_assert!(back.sub(&v).norm() <= 1e-9 * v.norm().max(1.0));
        // Metric compatibility.
        prop_assert!((m.distance(&p, &q).unwrap() - v.norm()).abs() <= 1e-9);
        prop_assert!((back.norm() - m.distance(&p, &q).unwrap()).abs() <= 1e-10);
        let again = m.exp(&p, &back).unwrap();
        prop_assert!(m.distance(&again, &q).unwrap() <= 1e-10);
    }

    #[test]
    fn transport_is_isometric(i in manifold_index(), a in raw_vec(8), b in raw_vec(8), c in raw_vec(8), frac in 0.0f64..0.9) {
        let m = &catalog()[i];
        let spread = if matches!(m, Manifold::TorusPatch(_)) { 0.3 } else { 1.0 };
        let p = base_point(m, &a, spread);
        let q = m.exp(&p, &direction(m, &p, &b[..m.tangent_len()]).scaled(frac * m.inj_lower())).unwrap();
        let v = m.project_tangent(&p, &c[..m.tangent_len()]);
        let tv = m.transport(&p, &q, &v).unwrap();
        prop_assert!((tv.norm() - v.norm()).abs() <= 1e-10);
        // Angle with the connecting geodesic is preserved.
        let lp = m.log(&p, &q).unwrap();
        let lq = m.log(&q, &p).unwrap().scaled(-1.0);
        prop_assert!((tv.dot(&lq) - v.dot(&lp)).abs() <= 1e-10 * (1.0 + lp.norm()));
        // Result is tangent at q.
        let proj = m.project_tangent(&q, tv.coords());
        prop_assert!(proj.sub(&tv).norm() <= 1e-10);
    }

    #[test]
    fn product_distance_is_additive(a in raw_vec(8), b in raw_vec(8)) {
        let m = s2xs1();
        let s = s2();
        let c = Manifold::circle();
        let p = base_point(&m, &a, 1.0);
        let q = base_point(&m, &b, 1.0);
        let d = m.distance(&p, &q).unwrap();
        let ds = s.distance(&pt(&s, &p.coords()[..3]), &pt(&s, &q.coords()[..3])).unwrap();
        let dc = c.distance(&pt(&c, &p.coords()[3..]), &pt(&c, &q.coords()[3..])).unwrap();
        let sum = ds * ds + dc * dc;
        prop_assert!((d * d - sum).abs() <= 4.0 * f64::EPSILON * sum.max(f64::MIN_POSITIVE));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn half_squared_distance_gradient(i in manifold_index(), a in raw_vec(8), b in raw_vec(8), frac in 0.05f64..0.85) {
        let m = &catalog()[i];
        let spread = if matches!(m, Manifold::TorusPatch(_)) { 0.3 } else { 1.0 };
        let y = base_point(m, &a, spread);
        let z = m.exp(&y, &direction(m, &y, &b[..m.tangent_len()]).scaled(frac * m.inj_lower())).unwrap();
        let analytic = m.log(&y, &z).unwrap().scaled(-1.0);
        let fd = m.numerical_gradient::<GeometryError, _>(&y, |w| {
            let d = m.distance(&z, w)?;
            Ok(0.5 * d * d)
        }, 1e-5).unwrap();
        prop_assert!(fd.sub(&analytic).norm() <= 1e-5 * analytic.norm().max(1e-3), "{:?} vs {:?}", fd, analytic);
    }

    #[test]
    fn dlog_adjoint_matches_finite_differences(i in manifold_index(), a in raw_vec(8), b in raw_vec(8), c in raw_vec(8), frac in 0.05f64..0.8) {
        let m = &catalog()[i];
        let spread = if matches!(m, Manifold::TorusPatch(_)) { 0.3 } else { 1.0 };
        let p = base_point(m, &a, spread);
        let y = m.exp(&p, &direction(m, &p, &b[..m.tangent_len()]).scaled(frac * m.inj_lower())).unwrap();
        let xi = m.project_tangent(&p, &c[..m.tangent_len()]);
        prop_assume!(xi.norm() > 1e-3);
        let analytic = m.dlog_adjoint(&p, &y, &xi).unwrap();
        let fd = m.numerical_gradient::<GeometryError, _>(&y, |w| Ok(xi.dot(&m.log(&p, w)?)), 1e-5).unwrap();
        prop_assert!(fd.sub(&analytic).norm() <= 1e-5 * analytic.norm(), "{:?} vs {:?}", fd, analytic);
    }
}
