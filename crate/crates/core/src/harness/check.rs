//! The invariant suite behind `frida check`.
//!
//! Each check is self-contained and deterministic. Two of them accept an
//! injected component so that deliberately broken variants can be shown to
//! fail.

use super::artifacts::verify_manifest;
use super::experiment::{run_experiment, ExperimentOptions, Scope};
use super::generators as gen;
use super::rng::stream;
use super::{Preset, Result};
use crate::curvature;
use crate::geometry::{Manifold, Point, Tangent};
use crate::regression::{DcObjective, RegressionDataset};
use crate::solver::{
    check_descent, frida_solve, validate_trace, SolveResult, SolveStatus, SolverConfig, SolverMode,
};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => CheckResult::new(name, passed, detail),
            Err(e) => CheckResult::new(name, false, format!("error: {e}")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn table(&self) -> String {
        let width = self.results.iter().map(|r| r.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for r in &self.results {
            let status = if r.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:<width$}  {}", r.name, r.detail);
        }
        let failed = self.results.iter().filter(|r| !r.passed).count();
        let _ = writeln!(out, "{} checks, {} failed", self.results.len(), failed);
        out
    }
}

/// Signature of a candidate dlog adjoint, for injection.
pub type AdjointFn<'a> = &'a dyn Fn(&Manifold, &Point, &Point, &Tangent) -> crate::geometry::Result<Tangent>;

fn sample_manifolds() -> Vec<Manifold> {
    let mut out = vec![
        Manifold::sphere(2).expect("valid"),
        Manifold::sphere(3).expect("valid"),
        Manifold::circle(),
        gen::s2xs1_manifold(),
    ];
    if let Ok(t) = gen::torus_local_manifold() {
        out.push(t);
    }
    out
}

fn random_point(m: &Manifold, rng: &mut impl Rng, spread: f64) -> Result<Point> {
    // Random tangent step from a fixed interior point keeps torus samples in
    // their patch.
    let base = m.point(base_coords(m))?;
    let basis = m.tangent_basis(&base);
    let mut v = m.zero_tangent();
    for e in &basis {
        v.axpy(spread * rng.sample::<f64, _>(StandardNormal), e);
    }
    Ok(m.exp(&base, &v)?)
}

fn base_coords(m: &Manifold) -> Vec<f64> {
    match m {
        Manifold::Sphere { dim } => {
            let mut c = vec![0.0; dim + 1];
            c[*dim] = 1.0;
            c
        }
        Manifold::Circle => vec![0.0],
        Manifold::TorusPatch(t) => t.center.to_vec(),
        Manifold::Product { factors, .. } => factors.iter().flat_map(base_coords).collect(),
    }
}

fn random_tangent(m: &Manifold, p: &Point, rng: &mut impl Rng) -> Tangent {
    let mut v = m.zero_tangent();
    for e in &m.tangent_basis(p) {
        v.axpy(rng.sample::<f64, _>(StandardNormal), e);
    }
    v
}

/// Compares `adjoint` against central differences of ⟨ξ, log_p(exp_y(t w))⟩.
pub fn check_dlog_adjoint(adjoint: AdjointFn) -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let mut rng = stream("check", 0, "dlog-adjoint");
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        for m in sample_manifolds() {
            for _ in 0..16 {
                let p = random_point(&m, &mut rng, 0.3)?;
                let y = random_point(&m, &mut rng, 0.3)?;
                let xi = random_tangent(&m, &p, &mut rng);
                let w = random_tangent(&m, &y, &mut rng);
                let h = 1e-5;
                let at = |t: f64| -> Result<f64> {
                    let yt = m.exp(&y, &w.scaled(t))?;
                    Ok(xi.dot(&m.log(&p, &yt)?))
                };
                let fd = (at(h)? - at(-h)?) / (2.0 * h);
                let an = adjoint(&m, &p, &y, &xi)?.dot(&w);
                worst = worst.max((fd - an).abs() / (1.0 + fd.abs()));
                cases += 1;
            }
        }
        Ok((worst <= 1e-6, format!("{cases} cases, worst relative gap {worst:.2e}")))
    };
    CheckResult::from_result("dlog adjoint vs finite differences", run())
}

fn check_exp_log() -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let mut rng = stream("check", 0, "exp-log");
        let mut worst: f64 = 0.0;
        for m in sample_manifolds() {
            for _ in 0..16 {
                let p = random_point(&m, &mut rng, 0.3)?;
                let q = random_point(&m, &mut rng, 0.3)?;
                let back = m.exp(&p, &m.log(&p, &q)?)?;
                worst = worst.max(m.distance(&back, &q)?);
                let d = m.distance(&p, &q)?;
                worst = worst.max((m.log(&p, &q)?.norm() - d).abs());
            }
        }
        Ok((worst <= 1e-9, format!("worst error {worst:.2e}")))
    };
    CheckResult::from_result("exp/log round trip and |log| = d", run())
}

fn check_curvature_constants() -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let profile = Manifold::sphere(2)?.curvature_profile();
        let l = curvature::l_log_pm(0.5, &profile)?;
        let expected = 0.945_290_454_629_001_8;
        // δ₊(π/4) = π/4 on the unit sphere, ζ₋(1) = coth 1 at Λ₋ = 1.
        let d = curvature::delta_plus(std::f64::consts::FRAC_PI_4, 1.0)?;
        let z = curvature::zeta_minus(1.0, 1.0);
        let ok = (l - expected).abs() <= 1e-12
            && (d - std::f64::consts::FRAC_PI_4).abs() <= 1e-14
            && (z - 1.0 / 1f64.tanh()).abs() <= 1e-14;
        Ok((ok, format!("L_log(0.5) = {l:.17}")))
    };
    CheckResult::from_result("curvature constants", run())
}

/// Small deterministic instances that exercise both solver modes.
fn solver_instances() -> Result<Vec<(String, RegressionDataset, Vec<f64>)>> {
    let mut out = Vec::new();
    let g = gen::gen_sphere_geodesic(0)?;
    out.push(("sphere-geodesic x=1.87".into(), g.dataset, vec![gen::GEODESIC_X_TEST]));
    let g = gen::gen_sphere_geodesic(0)?;
    out.push(("sphere-geodesic x=-0.9".into(), g.dataset, vec![-0.9]));
    let g = gen::gen_sphere_noisy_geodesic(0, gen::NOISY_GEODESIC_SIGMA)?;
    out.push(("sphere-noisy-geodesic x=1".into(), g.dataset, vec![1.0]));
    let g = gen::gen_torus_local(0)?;
    out.push(("torus-local x=0".into(), g.dataset, vec![0.0]));
    let g = gen::gen_s2xs1(0)?;
    out.push(("s2xs1 x=0".into(), g.dataset, vec![0.0]));
    Ok(out)
}

fn solve_instances(mode: SolverMode) -> Result<Vec<(String, SolveResult, bool)>> {
    let cfg = SolverConfig {
        mode,
        ..SolverConfig::default()
    };
    let mut out = Vec::new();
    for (name, ds, x) in solver_instances()? {
        let obj = DcObjective::global(&ds, &x)?;
        let res = frida_solve(&obj, &ds.safe_set().c, &cfg)?;
        let ok = validate_trace(&obj, &res, &cfg)?.ok()
            && !matches!(res.status, SolveStatus::InvariantBreach | SolveStatus::InnerBudget);
        out.push((name, res, ok));
    }
    Ok(out)
}

/// Smallest observed (f_k − f_{k+1})/d_k² over the inexact check runs,
/// ignoring steps shorter than 1e-6.
pub fn min_inexact_decrease_ratio() -> Result<f64> {
    let mut worst = f64::INFINITY;
    for (_, res, _) in solve_instances(SolverMode::Inexact)? {
        for w in res.trace.windows(2) {
            if let Some(d) = w[0].step_dist.filter(|&d| d > 1e-6) {
                worst = worst.min((w[0].f - w[1].f) / (d * d));
            }
        }
    }
    Ok(worst)
}

/// Per-step descent on inexact runs, with the solver's κ or an override.
pub fn check_descent_runs(kappa_override: Option<f64>) -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let mut failures = Vec::new();
        let mut steps = 0;
        for (name, res, _) in solve_instances(SolverMode::Inexact)? {
            let kappa = kappa_override.unwrap_or(res.kappa);
            let r = check_descent(&res.trace, kappa);
            steps += r.steps;
            if !r.ok {
                failures.push(name);
            }
        }
        let detail = if failures.is_empty() {
            format!("{steps} steps")
        } else {
            format!("violated on {}", failures.join(", "))
        };
        Ok((failures.is_empty(), detail))
    };
    CheckResult::from_result("descent on inexact runs", run())
}

fn check_traces(mode: SolverMode) -> CheckResult {
    let name = match mode {
        SolverMode::Exact => "trace invariants, exact runs",
        SolverMode::Inexact => "trace invariants, inexact runs",
    };
    let run = || -> Result<(bool, String)> {
        let runs = solve_instances(mode)?;
        let bad: Vec<&str> = runs.iter().filter(|r| !r.2).map(|r| r.0.as_str()).collect();
        let detail = if bad.is_empty() {
            format!("{} runs", runs.len())
        } else {
            format!("failed on {}", bad.join(", "))
        };
        Ok((bad.is_empty(), detail))
    };
    CheckResult::from_result(name, run())
}

fn check_responses_in_ball() -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let mut worst = f64::NEG_INFINITY;
        let mut sets = vec![
            gen::gen_sphere_geodesic(0)?.dataset,
            gen::gen_sphere_noisy_geodesic(0, gen::NOISY_GEODESIC_SIGMA)?.dataset,
            gen::gen_sphere_spiral(0)?.dataset,
            gen::gen_s2xs1(0)?.dataset,
            gen::gen_torus_local(0)?.dataset,
        ];
        let tg = gen::gen_torus_global(0);
        for j in (0..120).step_by(7) {
            sets.push(tg.window_dataset(&tg.window(gen::TORUS_GLOBAL_X_MAX * j as f64 / 120.0))?);
        }
        for ds in &sets {
            let s = ds.safe_set();
            for y in ds.responses() {
                worst = worst.max(ds.manifold().distance(&s.c, y)? - s.r);
            }
        }
        Ok((worst <= 1e-12, format!("{} datasets, max d(c, y) - r = {worst:.2e}", sets.len())))
    };
    CheckResult::from_result("responses inside the safe ball", run())
}

fn check_s2xs1_filter() -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let ds = gen::gen_s2xs1(0)?.dataset;
        let mut kept = 0;
        for j in 0..41 {
            let x = [j as f64 / 40.0];
            let neg = ds.global_weights(&x)?.has_negative();
            if neg == ds.nonneg_region_check(&x)? {
                return Ok((false, format!("mismatch at x = {}", x[0])));
            }
            kept += neg as usize;
        }
        Ok((true, format!("{kept} of 41 queries have negative weights")))
    };
    CheckResult::from_result("s2xs1 query filter", run())
}

fn check_determinism() -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let a = gen::gen_sphere_spiral(3)?;
        let b = gen::gen_sphere_spiral(3)?;
        let ja = serde_json::to_string(&a.dataset.responses())?;
        let jb = serde_json::to_string(&b.dataset.responses())?;
        let ta = serde_json::to_string(&gen::gen_torus_global(3))?;
        let tb = serde_json::to_string(&gen::gen_torus_global(3))?;
        Ok((ja == jb && ta == tb, "regenerated data identical".into()))
    };
    CheckResult::from_result("generator determinism", run())
}

fn check_manifest() -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let dir = std::env::temp_dir().join(format!("frida-check-{}", std::process::id()));
        let opts = ExperimentOptions {
            scope: Scope::Sweep,
            ..ExperimentOptions::new(0)
        };
        let art = run_experiment(Preset::SphereNoisyGeodesic, &dir, &opts);
        let verified = art.and_then(|a| {
            let m = verify_manifest(&dir)?;
            Ok(m == a.manifest && a.invariants_ok())
        });
        let _ = std::fs::remove_dir_all(&dir);
        let ok = verified?;
        Ok((ok, "sphere-noisy-geodesic sweep re-read".into()))
    };
    CheckResult::from_result("artifact manifest", run())
}

/// Runs every check.
pub fn check_suite() -> CheckReport {
    let default_adjoint = |m: &Manifold, p: &Point, y: &Point, xi: &Tangent| m.dlog_adjoint(p, y, xi);
    CheckReport {
        results: vec![
            check_exp_log(),
            check_dlog_adjoint(&default_adjoint),
            check_curvature_constants(),
            check_traces(SolverMode::Exact),
            check_traces(SolverMode::Inexact),
            check_descent_runs(None),
            check_responses_in_ball(),
            check_s2xs1_filter(),
            check_determinism(),
            check_manifest(),
        ],
    }
}
