use super::*;
use crate::curvature;
use crate::geometry::{Manifold, Point, Tangent};
use crate::regression::{DcObjective, RegressionDataset, SafeSetRule, WeightVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn s2() -> Manifold {
    Manifold::sphere(2).unwrap()
}

fn circle_dataset() -> RegressionDataset {
    let m = Manifold::circle();
    let responses = [1.0, 1.2, 1.5]
        .iter()
        .map(|&t| m.point(vec![t]).unwrap())
        .collect();
    RegressionDataset::with_safe_set_rule(
        m,
        vec![vec![0.0], vec![1.0], vec![2.0]],
        responses,
        &SafeSetRule::default(),
    )
    .unwrap()
}

/// Three equator points with predictors 0, 2, 4; at x = 0.5 the third
/// weight is −1/24.
fn signed_dataset() -> RegressionDataset {
    let s = s2();
    let responses = [0.0f64, 0.3, 0.6]
        .iter()
        .map(|t| s.point(vec![t.cos(), t.sin(), 0.0]).unwrap())
        .collect();
    RegressionDataset::with_safe_set_rule(
        s,
        vec![vec![0.0], vec![2.0], vec![4.0]],
        responses,
        &SafeSetRule::default(),
    )
    .unwrap()
}

fn random_sphere_dataset(seed: u64, m: usize) -> RegressionDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = s2();
    let pole = s.point(vec![0.0, 0.0, 1.0]).unwrap();
    let mut predictors = Vec::new();
    let mut responses = Vec::new();
    for _ in 0..m {
        let x: f64 = rng.random_range(-1.0..1.0);
        let v = Tangent::new(vec![0.4 * x, 0.1 * rng.random_range(-1.0..1.0), 0.0]);
        predictors.push(vec![x]);
        responses.push(s.exp(&pole, &v).unwrap());
    }
    RegressionDataset::with_safe_set_rule(s, predictors, responses, &SafeSetRule::default()).unwrap()
}

fn start_point(ds: &RegressionDataset) -> Point {
    ds.safe_set().c.clone()
}

#[test]
fn exact_step_matches_flat_closed_form() {
    // On a flat circle with positive weights, Φ is a quadratic in the angle
    // and the exact step moves 2w₊/(2w₊ + τ) of the way to the weighted mean.
    let ds = circle_dataset();
    let m = ds.manifold();
    let obj = DcObjective::global(&ds, &[1.0]).unwrap();
    assert!(!obj.weights().has_negative());
    let mean: f64 = ds
        .responses()
        .iter()
        .zip(&obj.weights().weights)
        .map(|(p, w)| w * p.coords()[0])
        .sum();
    let y_k = m.point(vec![1.3]).unwrap();
    let cfg = SolverConfig::exact();
    let req = StepRequest::assemble(&obj, &y_k, &cfg).unwrap();
    let res = frida_step_exact(&obj, &req, &cfg).unwrap();
    let wp = obj.weights().w_plus;
    let expect = 1.3 + 2.0 * wp / (2.0 * wp + req.tau) * (mean - 1.3);
    assert!((res.point.coords()[0] - expect).abs() < 1e-10, "{:?} vs {expect}", res.point);
    assert!(req.tau >= 1.0);
}

#[test]
fn stationary_start_returns_start() {
    let ds = circle_dataset();
    let m = ds.manifold();
    let obj = DcObjective::global(&ds, &[1.0]).unwrap();
    let mean: f64 = ds
        .responses()
        .iter()
        .zip(&obj.weights().weights)
        .map(|(p, w)| w * p.coords()[0])
        .sum();
    let y = m.point(vec![mean]).unwrap();
    let cfg = SolverConfig::exact();
    let req = StepRequest::assemble(&obj, &y, &cfg).unwrap();
    let res = frida_step_exact(&obj, &req, &cfg).unwrap();
    assert!(res.dist < 1e-12);
    let out = frida_solve(&obj, &y, &cfg).unwrap();
    assert_eq!(out.status, SolveStatus::Stationary);
    assert_eq!(out.outer_iterations(), 0);
    assert_eq!(out.point, y);
    assert_eq!(out.trace.len(), 1);
}

#[test]
fn single_effective_response_is_recovered() {
    let ds = random_sphere_dataset(3, 5);
    let target = ds.responses()[2].clone();
    let mut w = vec![0.0; 5];
    w[2] = 1.0;
    let obj = DcObjective::new(&ds, vec![0.0], WeightVector::from_weights(w)).unwrap();
    for cfg in [SolverConfig::exact(), SolverConfig::inexact()] {
        let out = frida_solve(&obj, &start_point(&ds), &cfg).unwrap();
        assert_eq!(out.status, SolveStatus::Stationary, "{}", out.message);
        assert!(ds.manifold().distance(&out.point, &target).unwrap() < 1e-8);
        assert!(out.f < 1e-15);
    }
}

#[test]
fn two_point_midpoint() {
    let s = s2();
    let a = s.point(vec![1.0, 0.0, 0.0]).unwrap();
    let b = s.point(vec![0.6f64.cos(), 0.6f64.sin(), 0.0]).unwrap();
    let ds = RegressionDataset::with_safe_set_rule(
        s.clone(),
        vec![vec![0.0], vec![1.0]],
        vec![a, b],
        &SafeSetRule::default(),
    )
    .unwrap();
    let obj = DcObjective::global(&ds, &[0.5]).unwrap();
    let y0 = s.point(vec![1.0, 0.0, 0.0]).unwrap();
    let out = frida_solve(&obj, &y0, &SolverConfig::exact()).unwrap();
    let mid = s.point(vec![0.3f64.cos(), 0.3f64.sin(), 0.0]).unwrap();
    assert_eq!(out.status, SolveStatus::Stationary);
    assert!(s.distance(&out.point, &mid).unwrap() < 1e-8);
    assert!((out.f - 0.36 / 4.0).abs() < 1e-12);
}

#[test]
fn solvers_agree_with_negative_weights() {
    let ds = signed_dataset();
    let obj = DcObjective::global(&ds, &[0.5]).unwrap();
    assert!(obj.weights().has_negative());
    let y0 = start_point(&ds);
    let ex = frida_solve(&obj, &y0, &SolverConfig::exact()).unwrap();
    let inex = frida_solve(&obj, &y0, &SolverConfig::inexact()).unwrap();
    let gd = gd_solve(&obj, &y0, &SolverConfig::exact()).unwrap();
    for r in [&ex, &inex, &gd] {
        assert_eq!(r.status, SolveStatus::Stationary, "{}: {}", r.method.name(), r.message);
    }
    assert!((ex.f - gd.f).abs() < 1e-10);
    assert!((inex.f - gd.f).abs() < 1e-10);
    assert!(ds.manifold().distance(&ex.point, &gd.point).unwrap() < 1e-6);
    for (r, cfg) in [(&ex, SolverConfig::exact()), (&inex, SolverConfig::inexact())] {
        let rep = validate_trace(&obj, r, &cfg).unwrap();
        assert!(rep.ok(), "{rep:?}");
    }
}

#[test]
fn inner_gap_contracts_and_phi_is_monotone() {
    let ds = signed_dataset();
    let obj = DcObjective::global(&ds, &[0.5]).unwrap();
    let cfg = SolverConfig {
        record_inner: true,
        ..SolverConfig::exact()
    };
    let y_k = ds.responses()[0].clone();
    let req = StepRequest::assemble(&obj, &y_k, &cfg).unwrap();
    let sub = Subproblem {
        obj: &obj,
        y_k: y_k.clone(),
        xi: req.xi.clone(),
        tau: req.tau,
        r_k: req.r_k,
        mu: req.mu,
        lipschitz: req.lipschitz,
    };
    let res = inner_solve(&sub, StopRule::Exact { tol: 1e-13 }, 5000, true).unwrap();
    let h = &res.phi_history;
    assert!(h.len() > 3);
    assert!(h.windows(2).all(|w| w[1] <= w[0] + 1e-15 * (1.0 + w[0].abs())));
    let star = res.phi;
    let rate = 1.0 - req.mu / req.lipschitz;
    for w in h.windows(2) {
        let (g0, g1) = (w[0] - star, w[1] - star);
        if g0 > 1e-11 {
            assert!(g1 <= rate * g0 + 1e-13, "gap {g1} after {g0}, rate {rate}");
        }
    }
}

#[test]
fn subproblem_is_mu_strongly_convex_along_geodesics() {
    let ds = signed_dataset();
    let m = ds.manifold();
    let obj = DcObjective::global(&ds, &[0.5]).unwrap();
    let cfg = SolverConfig::exact();
    let y_k = ds.responses()[1].clone();
    let req = StepRequest::assemble(&obj, &y_k, &cfg).unwrap();
    let sub = Subproblem {
        obj: &obj,
        y_k: y_k.clone(),
        xi: req.xi.clone(),
        tau: req.tau,
        r_k: req.r_k,
        mu: req.mu,
        lipschitz: req.lipschitz,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let scale = req.lipschitz;
    for _ in 0..50 {
        let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = m.project_tangent(&y_k, &raw);
        let radius = rng.random_range(0.0..0.8) * req.r_k;
        let y = m.exp(&y_k, &v.scaled(radius / v.norm())).unwrap();
        let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = m.project_tangent(&y, &raw);
        let u = u.scaled(1.0 / u.norm());
        let h = 1e-3;
        let sd = m.second_difference(&y, &u, |p| sub.value(p), h).unwrap();
        assert!(sd - req.mu >= -1e-6 * scale, "curvature {sd} < mu {}", req.mu);
        assert!(sd <= req.lipschitz + 1e-6 * scale);
    }
}

#[test]
fn half_squared_distance_hessian_is_sandwiched() {
    // On S² the Hessian of ½d²(p, ·) has eigenvalues d·cot d and 1.
    let s = s2();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = s.point(vec![0.0, 0.0, 1.0]).unwrap();
    for _ in 0..40 {
        let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = s.project_tangent(&p, &raw);
        let d: f64 = rng.random_range(0.1..1.5);
        let y = s.exp(&p, &v.scaled(d / v.norm())).unwrap();
        let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = s.project_tangent(&y, &raw);
        let u = u.scaled(1.0 / u.norm());
        let sd = s
            .second_difference(&y, &u, |q| s.distance(&p, q).map(|t| 0.5 * t * t), 1e-4)
            .unwrap();
        let lo = curvature::delta_plus(d, 1.0).unwrap();
        let hi = curvature::zeta_minus(d, 0.0);
        assert!(sd >= lo - 1e-5 && sd <= hi + 1e-5, "{lo} <= {sd} <= {hi}");
    }
}

#[test]
fn huge_epsilon_still_certifies_against_step_length() {
    let ds = signed_dataset();
    let obj = DcObjective::global(&ds, &[0.5]).unwrap();
    let cfg = SolverConfig {
        epsilon: EpsilonSchedule::Geometric {
            eps0: 1e6,
            ratio: 0.5,
        },
        outer_max: 20,
        ..SolverConfig::inexact()
    };
    let out = frida_solve(&obj, &start_point(&ds), &cfg).unwrap();
    assert!(
        !matches!(out.status, SolveStatus::InvariantBreach | SolveStatus::InnerBudget),
        "{}",
        out.message
    );
    let certs: Vec<_> = out.trace.iter().filter_map(|r| r.certificate).collect();
    assert!(!certs.is_empty());
    for c in &certs {
        assert!(c.holds());
        assert!(c.residual <= c.zeta_d);
    }
    assert!(recheck_certificates(&obj, &out.trace, &cfg).unwrap());
}

#[test]
fn tampered_certificate_is_detected() {
    let ds = signed_dataset();
    let obj = DcObjective::global(&ds, &[0.5]).unwrap();
    let cfg = SolverConfig::inexact();
    let mut out = frida_solve(&obj, &start_point(&ds), &cfg).unwrap();
    assert!(recheck_certificates(&obj, &out.trace, &cfg).unwrap());
    // Move the first accepted step far from where the certificate was issued.
    let m = ds.manifold();
    let y0 = out.trace[0].point.clone();
    let v = m.log(&y0, &out.trace[1].point).unwrap();
    out.trace[1].point = m.exp(&y0, &v.scaled(0.3)).unwrap();
    assert!(!recheck_certificates(&obj, &out.trace, &cfg).unwrap());
}

fn synthetic_trace(fs: &[f64], ds: &[f64]) -> Vec<IterateRecord> {
    let p = Point::from_raw(vec![0.0]);
    fs.iter()
        .enumerate()
        .map(|(k, &f)| {
            let mut r = IterateRecord::new(k, p.clone(), f, 0.0);
            r.step_dist = ds.get(k).copied();
            r
        })
        .collect()
}

#[test]
fn complexity_bound_is_tight_for_exact_decrease() {
    let kappa = 0.5;
    let d = 0.1;
    let fs: Vec<f64> = (0..11).map(|k| 1.0 - k as f64 * kappa * d * d).collect();
    let rep = complexity_check(&synthetic_trace(&fs, &[d; 10]), kappa);
    assert!(rep.ok);
    assert_eq!(rep.prefixes.len(), 10);
    assert!((rep.tightest_ratio - 1.0).abs() < 1e-6);
}

#[test]
fn complexity_bound_flags_insufficient_decrease() {
    let kappa = 0.5;
    let d = 0.1;
    let fs: Vec<f64> = (0..11).map(|k| 1.0 - k as f64 * 0.2 * kappa * d * d).collect();
    let trace = synthetic_trace(&fs, &[d; 10]);
    assert!(!complexity_check(&trace, kappa).ok);
    assert!(!check_descent(&trace, kappa).ok);
    assert!(check_descent(&trace, 0.1 * kappa).ok);
}

#[test]
fn rate_diagnostics_recover_geometric_slope() {
    let ds: Vec<f64> = (0..40).map(|k| 0.5f64.powi(k)).collect();
    let fs = vec![0.0; 41];
    let rep = rate_diagnostics(&synthetic_trace(&fs, &ds));
    assert_eq!(rep.label, "diagnostic only");
    assert!((rep.log_linear_slope.unwrap() - 0.5f64.ln()).abs() < 1e-12);
    assert!(!rep.finite_termination);
    let ds = [0.1, 0.05, 0.0, 0.0, 0.0];
    let rep = rate_diagnostics(&synthetic_trace(&[0.0; 6], &ds));
    assert!(rep.finite_termination);
}

#[test]
fn precondition_rejects_start_outside_existence_ball() {
    let ds = signed_dataset();
    let obj = DcObjective::global(&ds, &[0.5]).unwrap();
    let s = ds.manifold();
    let far = s.point(vec![-1.0, 0.0, 0.0]).unwrap();
    for r in [
        frida_solve(&obj, &far, &SolverConfig::exact()),
        gd_solve(&obj, &far, &SolverConfig::exact()),
    ] {
        assert!(matches!(r, Err(SolverError::Precondition(_))));
    }
}

#[test]
fn config_validation() {
    let bad = [
        SolverConfig {
            theta: 1.0,
            ..SolverConfig::exact()
        },
        SolverConfig {
            grad_tol: 0.0,
            ..SolverConfig::exact()
        },
        SolverConfig {
            epsilon: EpsilonSchedule::Polynomial {
                eps0: 1e-3,
                power: 1.0,
            },
            ..SolverConfig::inexact()
        },
        SolverConfig {
            epsilon: EpsilonSchedule::Geometric {
                eps0: 1e-3,
                ratio: 1.0,
            },
            ..SolverConfig::inexact()
        },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(SolverError::InvalidConfig(_))));
    }
    assert_eq!("inexact".parse::<SolverMode>().unwrap(), SolverMode::Inexact);
    assert!("fast".parse::<SolverMode>().is_err());
}

#[test]
fn outer_budget_is_reported() {
    let ds = signed_dataset();
    let obj = DcObjective::global(&ds, &[0.5]).unwrap();
    let cfg = SolverConfig {
        outer_max: 2,
        ..SolverConfig::exact()
    };
    let out = frida_solve(&obj, &ds.responses()[2], &cfg).unwrap();
    assert_eq!(out.status, SolveStatus::OuterBudget);
    assert_eq!(out.outer_iterations(), 2);
    assert_eq!(out.trace.len(), 3);
}

#[test]
fn trace_csv_layout() {
    let ds = signed_dataset();
    let obj = DcObjective::global(&ds, &[0.5]).unwrap();
    let out = frida_solve(&obj, &start_point(&ds), &SolverConfig::exact()).unwrap();
    let bytes = trace_csv(&out.trace).unwrap();
    let text = String::from_utf8(bytes.clone()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("k,f,grad_norm,step_dist,tau"));
    assert!(header.ends_with("y0,y1,y2"));
    assert_eq!(lines.count(), out.trace.len());
    assert_eq!(trace_csv(&out.trace).unwrap(), bytes);
    // The final row has no step.
    let last = text.lines().last().unwrap();
    assert_eq!(last.split(',').nth(3), Some(""));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn runs_satisfy_every_trace_invariant(seed in 0u64..10_000, x in -1.5f64..1.5, inexact in any::<bool>()) {
        let ds = random_sphere_dataset(seed, 8);
        let obj = DcObjective::global(&ds, &[x]).unwrap();
        let cfg = SolverConfig {
            outer_max: 60,
            ..if inexact { SolverConfig::inexact() } else { SolverConfig::exact() }
        };
        let out = frida_solve(&obj, &ds.responses()[0], &cfg).unwrap();
        prop_assert!(
            !matches!(out.status, SolveStatus::InvariantBreach | SolveStatus::InnerBudget),
            "{}",
            out.message
        );
        let rep = validate_trace(&obj, &out, &cfg).unwrap();
        prop_assert!(rep.ok(), "{:?}", rep);
        let fs: Vec<f64> = out.trace.iter().map(|r| r.f).collect();
        prop_assert!(fs.windows(2).all(|w| w[1] <= w[0] + 1e-10 * (1.0 + w[0].abs())));
    }

    #[test]
    fn gd_is_monotone(seed in 0u64..10_000, x in -1.5f64..1.5) {
        let ds = random_sphere_dataset(seed, 8);
        let obj = DcObjective::global(&ds, &[x]).unwrap();
        let cfg = SolverConfig { outer_max: 100, ..SolverConfig::exact() };
        let out = gd_solve(&obj, &ds.responses()[0], &cfg).unwrap();
        prop_assert!(check_descent(&out.trace, 0.0).ok);
        prop_assert!(check_containment(&obj, &out.trace).unwrap().0);
    }
}
