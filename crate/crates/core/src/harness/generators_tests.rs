use super::*;
use crate::regression::Kernel;

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

fn json_of(g: &Generated) -> String {
    serde_json::to_string(&(g.dataset.predictors(), g.dataset.responses(), g.dataset.safe_set())).unwrap()
}

#[test]
fn geodesic_responses_are_collinear() {
    let g = gen_sphere_geodesic(0).unwrap();
    let m = g.dataset.manifold();
    let y = g.dataset.responses();
    let half = m.log(&y[0], &y[2]).unwrap().scaled(0.5);
    let mid = m.exp(&y[0], &half).unwrap();
    assert!(m.distance(&mid, &y[1]).unwrap() <= 1e-12);
    let xs: Vec<f64> = g.dataset.predictors().iter().map(|p| p[0]).collect();
    assert_eq!(xs, vec![0.0, 0.5, 1.0]);
    assert_eq!(g.metadata["x_test"], 1.87);
}

#[test]
fn x_test_has_a_negative_weight() {
    let g = gen_sphere_geodesic(0).unwrap();
    let w = g.dataset.global_weights(&[GEODESIC_X_TEST]).unwrap();
    assert!(w.has_negative());
    assert!(!g.dataset.nonneg_region_check(&[GEODESIC_X_TEST]).unwrap());
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(json_of(&gen_sphere_geodesic(3).unwrap()), json_of(&gen_sphere_geodesic(3).unwrap()));
    assert_eq!(
        json_of(&gen_sphere_noisy_geodesic(3, 0.1).unwrap()),
        json_of(&gen_sphere_noisy_geodesic(3, 0.1).unwrap())
    );
    assert_eq!(json_of(&gen_s2xs1(3).unwrap()), json_of(&gen_s2xs1(3).unwrap()));
    assert_eq!(json_of(&gen_torus_local(3).unwrap()), json_of(&gen_torus_local(3).unwrap()));
    assert_eq!(gen_torus_global(3), gen_torus_global(3));
    assert_ne!(
        json_of(&gen_sphere_spiral(3).unwrap()),
        json_of(&gen_sphere_spiral(4).unwrap())
    );
}

#[test]
fn zero_noise_recovers_the_geodesic() {
    let g = gen_sphere_noisy_geodesic(5, 0.0).unwrap();
    for (y, t) in g.dataset.responses().iter().zip(&g.truth) {
        assert_eq!(y, t);
    }
}

#[test]
fn noisy_geodesic_layout_and_noise_level() {
    let g = gen_sphere_noisy_geodesic(0, NOISY_GEODESIC_SIGMA).unwrap();
    let xs: Vec<f64> = g.dataset.predictors().iter().map(|p| p[0]).collect();
    assert_eq!(xs.len(), 20);
    for w in xs.windows(2) {
        close(w[1] - w[0], 1.0 / 19.0, 1e-15);
    }
    for y in g.dataset.responses() {
        let n: f64 = y.coords().iter().map(|c| c * c).sum();
        close(n, 1.0, 1e-12);
    }
    // E‖projected z‖ for a 2-dimensional tangent plane is √(π/2).
    let expected = NOISY_GEODESIC_SIGMA * (PI / 2.0).sqrt();
    let within = (0..10)
        .filter(|&seed| {
            let g = gen_sphere_noisy_geodesic(seed, NOISY_GEODESIC_SIGMA).unwrap();
            let m = g.dataset.manifold();
            let mean = g
                .dataset
                .responses()
                .iter()
                .zip(&g.truth)
                .map(|(y, t)| m.distance(y, t).unwrap())
                .sum::<f64>()
                / 20.0;
            (mean / expected - 1.0).abs() <= 0.2
        })
        .count();
    assert!(within >= 8, "{within} of 10 seeds in the band");
}

#[test]
fn spiral_is_on_the_sphere_and_reaches_the_pole() {
    for i in 0..=100 {
        let p = spiral_point(i as f64 / 100.0);
        let n: f64 = p.coords().iter().map(|c| c * c).sum();
        close(n, 1.0, 1e-12);
    }
    let near = spiral_point(1.0 - 1e-9);
    let s2 = Manifold::sphere(2).unwrap();
    let pole = s2.point(vec![0.0, 0.0, 1.0]).unwrap();
    assert!(s2.distance(&near, &pole).unwrap() < 1e-4);
    let g = gen_sphere_spiral(0).unwrap();
    assert_eq!(g.dataset.len(), SPIRAL_N);
    for x in [0.2, 0.5, 0.8] {
        let w = g.dataset.local_weights(x, Kernel::Gaussian, 0.1).unwrap();
        close(w.sum(), 1.0, 1e-9);
    }
}

#[test]
fn s2xs1_curve_identities() {
    close(s2xs1_alpha(0.0), 0.0, 0.0);
    close(s2xs1_alpha(1.0), 1.40, 1e-15);
    let h = 1e-6;
    close((s2xs1_alpha(h) - s2xs1_alpha(0.0)) / h, 0.0, 1e-5);
    close((s2xs1_alpha(1.0) - s2xs1_alpha(1.0 - h)) / h, 0.0, 1e-5);
    let g = gen_s2xs1(0).unwrap();
    let max_angle = g
        .truth
        .iter()
        .map(|p| p.coords()[2].clamp(-1.0, 1.0).acos())
        .fold(0.0, f64::max);
    close(max_angle, 1.40, 1e-12);
    close(s2xs1_point(1.0).coords()[3], 0.8 * PI, 1e-15);
    assert_eq!(g.dataset.len(), S2XS1_N);
    let k = (0..=1000).map(|i| s2xs1_curve_curvature(i as f64 / 1000.0)).fold(0.0, f64::max);
    assert!(k > 0.40 && k < 0.42, "{k}");
}

#[test]
fn torus_local_line_is_centred_with_constant_speed() {
    assert_eq!(torus_local_angles(0.5), TORUS_LOCAL_CENTER);
    let a0 = TORUS_MAJOR;
    let arc = |x0: f64, x1: f64| {
        let [t0, p0] = torus_local_angles(x0);
        let [t1, p1] = torus_local_angles(x1);
        (a0 * (t1 - t0)).hypot(TORUS_MINOR * (p1 - p0))
    };
    let step = 1.0 / (TORUS_LOCAL_N - 1) as f64;
    let first = arc(0.0, step);
    for i in 1..TORUS_LOCAL_N - 1 {
        let x = i as f64 * step;
        close(arc(x, x + step), first, 1e-12);
    }
    close(arc(0.0, 1.0), TORUS_LOCAL_LENGTH, 1e-12);
}

#[test]
fn torus_local_curvature_range_is_flagged() {
    let (lo, hi) = torus_local_curvature_range(100_001);
    close(lo, -0.7683, 1e-3);
    close(hi, 0.4383, 1e-3);
    let g = gen_torus_local(0).unwrap();
    assert_eq!(g.metadata["curvature_range_mismatch"], true);
    assert_eq!(g.metadata["curvature_range_stated"], serde_json::json!([-0.767, 0.397]));
}

#[test]
fn torus_curvature_extremes_match_closed_form() {
    let (lo, hi) = torus_curvature_extremes(100_000);
    close(lo, -1.0 / (TORUS_MINOR * (TORUS_MAJOR - TORUS_MINOR)), 1e-9);
    close(hi, 1.0 / (TORUS_MINOR * (TORUS_MAJOR + TORUS_MINOR)), 1e-9);
    close(lo, -1.099, 5e-4);
    close(hi, 0.529, 5e-4);
}

#[test]
fn torus_global_windows() {
    let data = gen_torus_global(0);
    assert_eq!(data.predictors.len(), TORUS_GLOBAL_N);
    let [lo, hi] = TORUS_GLOBAL_HALF_WIDTH;
    for j in 0..120 {
        let x0 = TORUS_GLOBAL_X_MAX * j as f64 / 120.0;
        let w = data.window(x0);
        assert!(w.indices.len() >= TORUS_GLOBAL_MIN_POINTS);
        assert!(w.half_width >= lo && w.half_width <= hi);
        close(w.bandwidth, 0.45 * w.half_width, 1e-15);
        if !w.padded {
            for &i in &w.indices {
                assert!(periodic_offset(data.predictors[i], x0).abs() <= w.half_width);
            }
        }
        if j % 10 == 0 {
            let ds = data.window_dataset(&w).unwrap();
            let s = ds.safe_set();
            for y in ds.responses() {
                assert!(ds.manifold().distance(&s.c, y).unwrap() <= s.r);
            }
        }
    }
}

#[test]
fn periodic_offset_wraps() {
    close(periodic_offset(5.9, 0.1), -0.2, 1e-12);
    close(periodic_offset(0.1, 5.9), 0.2, 1e-12);
    close(periodic_offset(2.0, 1.0), 1.0, 1e-15);
}

#[test]
fn responses_lie_in_the_safe_ball() {
    for g in [
        gen_sphere_geodesic(1).unwrap(),
        gen_sphere_noisy_geodesic(1, 0.1).unwrap(),
        gen_sphere_spiral(1).unwrap(),
        gen_s2xs1(1).unwrap(),
        gen_torus_local(1).unwrap(),
    ] {
        let s = g.dataset.safe_set();
        for y in g.dataset.responses() {
            assert!(g.dataset.manifold().distance(&s.c, y).unwrap() <= s.r);
        }
    }
}
