use super::artifacts::{to_json_bytes, write_objective_grid, ArtifactWriter, Manifest};
use super::generators::{self as gen, Generated, TorusGlobal, Window};
use super::rng::stream;
use super::{HarnessError, Preset, Result};
use crate::curvature::{CurvatureProfile, SafeSetGeometry};
use crate::geometry::Point;
use crate::regression::{DatasetFile, DcObjective, Kernel, RegressionDataset, SafeRegionReport, WeightVector};
use crate::solver::{
    frida_solve, gd_solve, trace_csv, validate_trace, Method, RateReport, SolveResult, SolveStatus,
    SolverConfig, SolverMode, TraceReport,
};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};

pub const SUMMARY_FORMAT: &str = "frida-summary/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// The preset's query sweep only.
    Sweep,
    /// The sweep plus the preset's additional studies.
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOptions {
    pub seed: u64,
    pub scope: Scope,
    pub outer_max: Option<usize>,
    pub grad_tol: Option<f64>,
}

impl ExperimentOptions {
    pub fn new(seed: u64) -> Self {
        ExperimentOptions {
            seed,
            scope: Scope::Full,
            outer_max: None,
            grad_tol: None,
        }
    }

    pub fn config(&self, mode: SolverMode) -> SolverConfig {
        let mut cfg = SolverConfig {
            mode,
            seed: self.seed,
            ..SolverConfig::default()
        };
        if let Some(n) = self.outer_max {
            cfg.outer_max = n;
        }
        if let Some(t) = self.grad_tol {
            cfg.grad_tol = t;
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightDiagnostics {
    /// "global" or "local".
    pub kind: String,
    pub w_plus: f64,
    pub w_minus: f64,
    pub has_negative: bool,
    pub nonneg_region: Option<bool>,
    pub safe_region: Option<SafeRegionReport>,
}

/// Pass/fail view of a [`TraceReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub ok: bool,
    pub descent_ok: bool,
    pub descent_worst_margin: f64,
    pub containment_ok: bool,
    pub max_center_distance: f64,
    pub tau_floor_ok: bool,
    pub certificates_ok: Option<bool>,
    pub relative_error_ok: Option<bool>,
    pub c_rel: Option<f64>,
    pub relative_error_worst_ratio: Option<f64>,
    pub complexity_ok: bool,
    pub complexity_tightest_ratio: f64,
    pub stationarity_ok: bool,
    pub rate: RateReport,
}

impl From<&TraceReport> for TraceSummary {
    fn from(r: &TraceReport) -> Self {
        TraceSummary {
            ok: r.ok(),
            descent_ok: r.descent.ok,
            descent_worst_margin: r.descent.worst_margin,
            containment_ok: r.containment_ok,
            max_center_distance: r.max_center_distance,
            tau_floor_ok: r.tau_floor_ok,
            certificates_ok: r.certificates_ok,
            relative_error_ok: r.relative_error.as_ref().map(|e| e.ok),
            c_rel: r.relative_error.as_ref().map(|e| e.c_rel),
            relative_error_worst_ratio: r.relative_error.as_ref().map(|e| e.worst_ratio),
            complexity_ok: r.complexity.ok,
            complexity_tightest_ratio: r.complexity.tightest_ratio,
            stationarity_ok: r.stationarity_ok,
            rate: r.rate.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub status: SolveStatus,
    pub message: String,
    pub start: Point,
    pub point: Point,
    pub f: f64,
    pub grad_norm: f64,
    pub best_grad_norm: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub tau_max: f64,
    pub stationarity_escape: bool,
    pub trace_file: String,
    pub distance_to_truth: Option<f64>,
    pub invariants: TraceSummary,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.status != SolveStatus::InvariantBreach && self.invariants.ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub label: String,
    pub x: Vec<f64>,
    pub weights: WeightDiagnostics,
    pub truth: Option<Point>,
    pub runs: Vec<RunRecord>,
}

impl QueryRecord {
    pub fn run(&self, method: Method) -> Option<&RunRecord> {
        self.runs.iter().find(|r| r.method == method)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format: String,
    pub preset: String,
    pub seed: u64,
    pub scope: Scope,
    pub config: SolverConfig,
    pub safe_set: Option<SafeSetGeometry>,
    pub profile: Option<CurvatureProfile>,
    pub delta_ex: Option<f64>,
    pub zeta_ex: Option<f64>,
    pub queries: Vec<QueryRecord>,
    pub studies: Map<String, Value>,
    pub invariants_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifact {
    pub out_dir: PathBuf,
    pub summary: Summary,
    pub manifest: Manifest,
}

impl RunArtifact {
    pub fn invariants_ok(&self) -> bool {
        self.summary.invariants_ok
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Weights {
    Global,
    Local { kernel: Kernel, bandwidth: f64 },
}

/// One query (and one start) solved by one or more methods.
struct Job<'a> {
    label: String,
    ds: &'a RegressionDataset,
    x: Vec<f64>,
    weights: Weights,
    start: Point,
    methods: Vec<Method>,
    truth: Option<Point>,
}

struct JobOutput {
    record: QueryRecord,
    traces: Vec<(String, Vec<u8>)>,
}

fn weight_vector(ds: &RegressionDataset, x: &[f64], w: Weights) -> Result<WeightVector> {
    Ok(match w {
        Weights::Global => ds.global_weights(x)?,
        Weights::Local { kernel, bandwidth } => {
            let [x] = x else {
                return Err(HarnessError::InvalidInput(
                    "local weights need a scalar predictor".into(),
                ));
            };
            ds.local_weights(*x, kernel, bandwidth)?
        }
    })
}

fn diagnostics(ds: &RegressionDataset, x: &[f64], w: &WeightVector, kind: Weights) -> Result<WeightDiagnostics> {
    let (kind, nonneg, safe) = match kind {
        Weights::Global => (
            "global",
            Some(ds.nonneg_region_check(x)?),
            Some(ds.safe_region_check(w, x)?),
        ),
        Weights::Local { .. } => ("local", None, None),
    };
    Ok(WeightDiagnostics {
        kind: kind.into(),
        w_plus: w.w_plus,
        w_minus: w.w_minus,
        has_negative: w.has_negative(),
        nonneg_region: nonneg,
        safe_region: safe,
    })
}

fn solve(obj: &DcObjective, start: &Point, method: Method, opts: &ExperimentOptions) -> Result<(SolveResult, TraceReport, SolverConfig)> {
    let cfg = match method {
        Method::FridaInexact => opts.config(SolverMode::Inexact),
        _ => opts.config(SolverMode::Exact),
    };
    let res = match method {
        Method::GradientDescent => gd_solve(obj, start, &cfg)?,
        _ => frida_solve(obj, start, &cfg)?,
    };
    let report = validate_trace(obj, &res, &cfg)?;
    Ok((res, report, cfg))
}

fn run_job(job: &Job, opts: &ExperimentOptions) -> Result<JobOutput> {
    let w = weight_vector(job.ds, &job.x, job.weights)?;
    let weights = diagnostics(job.ds, &job.x, &w, job.weights)?;
    let obj = DcObjective::new(job.ds, job.x.clone(), w)?;
    let m = job.ds.manifold();
    let mut runs = Vec::new();
    let mut traces = Vec::new();
    for &method in &job.methods {
        let (res, report, _) = solve(&obj, &job.start, method, opts)?;
        let trace_file = format!("traces/{}_{}.csv", job.label, method.name());
        traces.push((trace_file.clone(), trace_csv(&res.trace)?));
        let distance_to_truth = match &job.truth {
            Some(t) => Some(m.distance(&res.point, t)?),
            None => None,
        };
        runs.push(RunRecord {
            method,
            status: res.status,
            message: res.message.clone(),
            start: job.start.clone(),
            point: res.point.clone(),
            f: res.f,
            grad_norm: res.grad_norm,
            best_grad_norm: res.best_grad_norm,
            outer_iterations: res.outer_iterations(),
            inner_iterations: res.inner_iterations(),
            tau_max: res.tau_max,
            stationarity_escape: res.stationarity_escape,
            trace_file,
            distance_to_truth,
            invariants: TraceSummary::from(&report),
        });
    }
    Ok(JobOutput {
        record: QueryRecord {
            label: job.label.clone(),
            x: job.x.clone(),
            weights,
            truth: job.truth.clone(),
            runs,
        },
        traces,
    })
}

/// Solves every job in parallel, keeping job order, and writes the traces.
fn run_jobs(jobs: &[Job], opts: &ExperimentOptions, root: &Path, w: &mut ArtifactWriter) -> Result<Vec<JobOutput>> {
    let outputs = jobs
        .par_iter()
        .map(|j| run_job(j, opts))
        .collect::<Result<Vec<_>>>()?;
    for out in &outputs {
        for (path, bytes) in &out.traces {
            w.write(root, path, bytes)?;
        }
    }
    Ok(outputs)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn summary(preset: Preset, opts: &ExperimentOptions, ds: Option<&RegressionDataset>, outputs: Vec<JobOutput>, studies: Map<String, Value>) -> Result<Summary> {
    let queries: Vec<QueryRecord> = outputs.into_iter().map(|o| o.record).collect();
    let invariants_ok = queries.iter().all(|q| q.runs.iter().all(RunRecord::ok));
    Ok(Summary {
        format: SUMMARY_FORMAT.into(),
        preset: preset.name().into(),
        seed: opts.seed,
        scope: opts.scope,
        config: opts.config(SolverMode::Exact),
        safe_set: ds.map(|d| d.safe_set().clone()),
        profile: ds.map(|d| d.profile().clone()),
        delta_ex: ds.map(|d| d.delta_ex()).transpose()?,
        zeta_ex: ds.map(|d| d.zeta_ex()),
        queries,
        studies,
        invariants_ok,
    })
}

fn write_dataset(g: &Generated, root: &Path, w: &mut ArtifactWriter) -> Result<()> {
    let file = DatasetFile::from_dataset(&g.dataset, g.metadata.clone());
    let mut text = file.to_json()?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    w.write(root, "dataset.json", text.as_bytes())
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn mean_truth_distance(outputs: &[JobOutput], method: Method, label_prefix: &str) -> f64 {
    mean(
        outputs
            .iter()
            .filter(|o| o.record.label.starts_with(label_prefix))
            .filter_map(|o| o.record.run(method).and_then(|r| r.distance_to_truth)),
    )
}

/// Runs a named experiment and writes its artifacts to `out_dir`. The
/// manifest is written last.
pub fn run_experiment(preset: Preset, out_dir: &Path, opts: &ExperimentOptions) -> Result<RunArtifact> {
    std::fs::create_dir_all(out_dir)?;
    let mut w = ArtifactWriter::default();
    let summary = match preset {
        Preset::SphereGeodesic => sphere_geodesic(opts, out_dir, &mut w)?,
        Preset::SphereNoisyGeodesic => sphere_noisy_geodesic(opts, out_dir, &mut w)?,
        Preset::SphereSpiral => sphere_spiral(opts, out_dir, &mut w)?,
        Preset::S2xS1Compare => s2xs1_compare(opts, out_dir, &mut w)?,
        Preset::TorusLocal => torus_local(opts, out_dir, &mut w)?,
        Preset::TorusGlobal => torus_global(opts, out_dir, &mut w)?,
    };
    w.write(out_dir, "summary.json", &to_json_bytes(&summary)?)?;
    let manifest = w.finish(out_dir)?;
    Ok(RunArtifact {
        out_dir: out_dir.to_path_buf(),
        summary,
        manifest,
    })
}

pub const GEODESIC_SWEEP: (f64, f64, usize) = (-0.9, 1.9, 29);
pub const GEODESIC_INITS: usize = 20;
/// Random starts are drawn uniformly from the geodesic disc of this
/// fraction of ρ_ex around c.
pub const GEODESIC_INIT_FRACTION: f64 = 0.8;

/// Seeded starts, uniform in area on a geodesic disc about the centre.
pub fn random_starts(ds: &RegressionDataset, preset: &str, seed: u64, count: usize, fraction: f64) -> Result<Vec<Point>> {
    let m = ds.manifold();
    let s = ds.safe_set();
    let basis = m.tangent_basis(&s.c);
    let mut rng = stream(preset, seed, "init");
    (0..count)
        .map(|_| {
            let mut v = m.zero_tangent();
            let mut norm = 0.0;
            // Uniform direction by rejection in the unit cube.
            while !(norm > 1e-3 && norm <= 1.0) {
                v = m.zero_tangent();
                for e in &basis {
                    v.axpy(rng.random_range(-1.0..1.0), e);
                }
                norm = v.norm();
            }
            let dim = basis.len() as i32;
            let radius = fraction * s.rho_ex * rng.random::<f64>().powf(1.0 / dim as f64);
            Ok(m.exp(&s.c, &v.scaled(radius / norm))?)
        })
        .collect()
}

fn sphere_geodesic(opts: &ExperimentOptions, root: &Path, w: &mut ArtifactWriter) -> Result<Summary> {
    let g = gen::gen_sphere_geodesic(opts.seed)?;
    write_dataset(&g, root, w)?;
    let ds = &g.dataset;
    let c = ds.safe_set().c.clone();
    let (lo, hi, n) = GEODESIC_SWEEP;
    let mut jobs: Vec<Job> = grid(lo, hi, n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| Job {
            label: format!("sweep{i:02}"),
            ds,
            x: vec![x],
            weights: Weights::Global,
            start: c.clone(),
            methods: vec![Method::FridaExact],
            truth: Some(gen::geodesic_point(x)),
        })
        .collect();
    let x_test = gen::GEODESIC_X_TEST;
    jobs.push(Job {
        label: "xtest".into(),
        ds,
        x: vec![x_test],
        weights: Weights::Global,
        start: c.clone(),
        methods: vec![Method::FridaExact, Method::FridaInexact, Method::GradientDescent],
        truth: Some(gen::geodesic_point(x_test)),
    });
    if opts.scope == Scope::Full {
        for (i, y0) in random_starts(ds, Preset::SphereGeodesic.name(), opts.seed, GEODESIC_INITS, GEODESIC_INIT_FRACTION)?
            .into_iter()
            .enumerate()
        {
            jobs.push(Job {
                label: format!("init{i:02}"),
                ds,
                x: vec![x_test],
                weights: Weights::Global,
                start: y0,
                methods: vec![Method::FridaExact],
                truth: None,
            });
        }
    }
    let outputs = run_jobs(&jobs, opts, root, w)?;
    let obj = DcObjective::global(ds, &[x_test])?;
    w.write(root, "objective_grid.csv", &write_objective_grid(&obj)?)?;

    let mut studies = Map::new();
    let xtest = outputs.iter().find(|o| o.record.label == "xtest").map(|o| &o.record);
    if let Some(q) = xtest {
        let outside = q.weights.safe_region.as_ref().is_some_and(|r| r.outside());
        studies.insert("x_test".into(), json!(x_test));
        studies.insert("x_test_outside_sufficient_region".into(), json!(outside));
    }
    let finals: Vec<(&Point, f64)> = outputs
        .iter()
        .filter(|o| o.record.label.starts_with("init"))
        .filter_map(|o| o.record.run(Method::FridaExact))
        .map(|r| (&r.point, r.grad_norm))
        .collect();
    if !finals.is_empty() {
        let m = ds.manifold();
        let mut max_pair: f64 = 0.0;
        for (i, a) in finals.iter().enumerate() {
            for b in &finals[i + 1..] {
                max_pair = max_pair.max(m.distance(a.0, b.0)?);
            }
        }
        let max_grad = finals.iter().map(|f| f.1).fold(0.0, f64::max);
        studies.insert(
            "random_inits".into(),
            json!({
                "count": finals.len(),
                "init_radius_fraction": GEODESIC_INIT_FRACTION,
                "max_final_grad_norm": max_grad,
                "max_pairwise_distance": max_pair,
                "same_stationary_point": max_grad <= 1e-6 && max_pair <= 1e-4,
            }),
        );
    }
    studies.insert("objective_grid_query".into(), json!(x_test));
    summary(Preset::SphereGeodesic, opts, Some(ds), outputs, studies)
}

pub const NOISY_QUERIES: usize = 21;

fn sphere_noisy_geodesic(opts: &ExperimentOptions, root: &Path, w: &mut ArtifactWriter) -> Result<Summary> {
    let sigma = gen::NOISY_GEODESIC_SIGMA;
    let g = gen::gen_sphere_noisy_geodesic(opts.seed, sigma)?;
    write_dataset(&g, root, w)?;
    let ds = &g.dataset;
    let c = ds.safe_set().c.clone();
    let jobs: Vec<Job> = grid(0.0, 1.0, NOISY_QUERIES)
        .into_iter()
        .enumerate()
        .map(|(i, x)| Job {
            label: format!("q{i:02}"),
            ds,
            x: vec![x],
            weights: Weights::Global,
            start: c.clone(),
            methods: vec![Method::FridaExact],
            truth: Some(gen::geodesic_point(x)),
        })
        .collect();
    let outputs = run_jobs(&jobs, opts, root, w)?;
    let obj = DcObjective::global(ds, &[0.5])?;
    w.write(root, "objective_grid.csv", &write_objective_grid(&obj)?)?;
    let mean_d = mean_truth_distance(&outputs, Method::FridaExact, "q");
    let bound = 3.0 * sigma / (gen::NOISY_GEODESIC_N as f64).sqrt();
    let mut studies = Map::new();
    studies.insert(
        "recovery".into(),
        json!({
            "sigma": sigma,
            "mean_distance_to_truth": mean_d,
            "bound": bound,
            "pass": mean_d <= bound,
        }),
    );
    studies.insert("objective_grid_query".into(), json!(0.5));
    summary(Preset::SphereNoisyGeodesic, opts, Some(ds), outputs, studies)
}

pub const SPIRAL_QUERIES: usize = 25;
/// Gaussian kernel bandwidth of the local spiral fit (a convention).
pub const SPIRAL_BANDWIDTH: f64 = 0.1;

fn sphere_spiral(opts: &ExperimentOptions, root: &Path, w: &mut ArtifactWriter) -> Result<Summary> {
    let g = gen::gen_sphere_spiral(opts.seed)?;
    write_dataset(&g, root, w)?;
    let ds = &g.dataset;
    let c = ds.safe_set().c.clone();
    let mut jobs = Vec::new();
    for (i, x) in grid(0.05, 0.95, SPIRAL_QUERIES).into_iter().enumerate() {
        for (tag, weights) in [
            ("global", Weights::Global),
            (
                "local",
                Weights::Local {
                    kernel: Kernel::Gaussian,
                    bandwidth: SPIRAL_BANDWIDTH,
                },
            ),
        ] {
            jobs.push(Job {
                label: format!("{tag}{i:02}"),
                ds,
                x: vec![x],
                weights,
                start: c.clone(),
                methods: vec![Method::FridaExact],
                truth: Some(gen::spiral_point(x)),
            });
        }
    }
    let outputs = run_jobs(&jobs, opts, root, w)?;
    let obj = DcObjective::global(ds, &[0.5])?;
    w.write(root, "objective_grid.csv", &write_objective_grid(&obj)?)?;
    let mut studies = Map::new();
    studies.insert(
        "recovery".into(),
        json!({
            "bandwidth": SPIRAL_BANDWIDTH,
            "mean_distance_local": mean_truth_distance(&outputs, Method::FridaExact, "local"),
            "mean_distance_global": mean_truth_distance(&outputs, Method::FridaExact, "global"),
        }),
    );
    studies.insert("objective_grid_query".into(), json!(0.5));
    summary(Preset::SphereSpiral, opts, Some(ds), outputs, studies)
}

pub const S2XS1_QUERIES: usize = 41;
pub const S2XS1_AGREEMENT_TOL: f64 = 1e-6;

fn s2xs1_compare(opts: &ExperimentOptions, root: &Path, w: &mut ArtifactWriter) -> Result<Summary> {
    let g = gen::gen_s2xs1(opts.seed)?;
    write_dataset(&g, root, w)?;
    let ds = &g.dataset;
    let start = ds.manifold().point(gen::s2xs1_point(0.0).into_coords())?;
    let mut jobs = Vec::new();
    let mut crosscheck_ok = true;
    let mut candidates = Vec::new();
    for (i, x) in grid(0.0, 1.0, S2XS1_QUERIES).into_iter().enumerate() {
        let negative = ds.global_weights(&[x])?.has_negative();
        crosscheck_ok &= negative != ds.nonneg_region_check(&[x])?;
        candidates.push(json!({"x": x, "negative_weights": negative}));
        if negative {
            jobs.push(Job {
                label: format!("q{i:02}"),
                ds,
                x: vec![x],
                weights: Weights::Global,
                start: start.clone(),
                methods: vec![Method::GradientDescent, Method::FridaExact, Method::FridaInexact],
                truth: Some(gen::s2xs1_point(x)),
            });
        }
    }
    let outputs = run_jobs(&jobs, opts, root, w)?;
    let mut rows = Vec::new();
    let mut max_gap = [0.0f64; 2];
    let mut fewer_outer = 0;
    for o in &outputs {
        let q = &o.record;
        let (Some(gd), Some(ex), Some(inex)) = (
            q.run(Method::GradientDescent),
            q.run(Method::FridaExact),
            q.run(Method::FridaInexact),
        ) else {
            continue;
        };
        let gaps = [(gd.f - ex.f).abs(), (gd.f - inex.f).abs()];
        max_gap[0] = max_gap[0].max(gaps[0]);
        max_gap[1] = max_gap[1].max(gaps[1]);
        if ex.outer_iterations < gd.outer_iterations {
            fewer_outer += 1;
        }
        rows.push(json!({
            "x": q.x[0],
            "f_gd": gd.f,
            "f_frida_exact": ex.f,
            "f_frida_inexact": inex.f,
            "gap_exact": gaps[0],
            "gap_inexact": gaps[1],
            "outer_gd": gd.outer_iterations,
            "outer_frida_exact": ex.outer_iterations,
            "outer_frida_inexact": inex.outer_iterations,
            "inner_frida_exact": ex.inner_iterations,
            "inner_frida_inexact": inex.inner_iterations,
            "best_grad_gd": gd.best_grad_norm,
            "best_grad_frida_exact": ex.best_grad_norm,
            "best_grad_frida_inexact": inex.best_grad_norm,
        }));
    }
    let curve_k = grid(0.0, 1.0, 10_001)
        .into_iter()
        .map(gen::s2xs1_curve_curvature)
        .fold(0.0, f64::max);
    let mut studies = Map::new();
    studies.insert(
        "comparison".into(),
        json!({
            "candidates": candidates,
            "queries_kept": rows.len(),
            "filter_matches_nonneg_check": crosscheck_ok,
            "max_gap_exact": max_gap[0],
            "max_gap_inexact": max_gap[1],
            "tolerance": S2XS1_AGREEMENT_TOL,
            "agreement": max_gap[0] <= S2XS1_AGREEMENT_TOL && max_gap[1] <= S2XS1_AGREEMENT_TOL,
            "frida_fewer_outer_iterations": fewer_outer,
            "rows": rows,
        }),
    );
    studies.insert("curve_curvature_estimate_max".into(), json!(curve_k));
    summary(Preset::S2xS1Compare, opts, Some(ds), outputs, studies)
}

pub const TORUS_LOCAL_QUERIES: usize = 21;

fn torus_local(opts: &ExperimentOptions, root: &Path, w: &mut ArtifactWriter) -> Result<Summary> {
    let g = gen::gen_torus_local(opts.seed)?;
    write_dataset(&g, root, w)?;
    let ds = &g.dataset;
    let m = ds.manifold();
    let c = ds.safe_set().c.clone();
    let jobs = grid(0.0, 1.0, TORUS_LOCAL_QUERIES)
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            Ok(Job {
                label: format!("q{i:02}"),
                ds,
                x: vec![x],
                weights: Weights::Global,
                start: c.clone(),
                methods: vec![Method::FridaExact],
                truth: Some(m.point(gen::torus_local_angles(x).to_vec())?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let outputs = run_jobs(&jobs, opts, root, w)?;
    let mut studies = Map::new();
    studies.insert(
        "curvature_range_computed".into(),
        g.metadata["curvature_range_computed"].clone(),
    );
    studies.insert(
        "curvature_range_mismatch".into(),
        g.metadata["curvature_range_mismatch"].clone(),
    );
    studies.insert(
        "mean_distance_to_truth".into(),
        json!(mean_truth_distance(&outputs, Method::FridaExact, "q")),
    );
    summary(Preset::TorusLocal, opts, Some(ds), outputs, studies)
}

pub const TORUS_GLOBAL_QUERIES: usize = 120;

#[derive(Serialize)]
struct TorusGlobalFile<'a> {
    format: &'static str,
    data: &'a TorusGlobal,
    windows: &'a [Window],
    metadata: Map<String, Value>,
}

fn torus_global(opts: &ExperimentOptions, root: &Path, w: &mut ArtifactWriter) -> Result<Summary> {
    let data = gen::gen_torus_global(opts.seed);
    let queries: Vec<f64> = (0..TORUS_GLOBAL_QUERIES)
        .map(|j| gen::TORUS_GLOBAL_X_MAX * j as f64 / TORUS_GLOBAL_QUERIES as f64)
        .collect();
    let windows: Vec<Window> = queries.iter().map(|&x0| data.window(x0)).collect();
    let file = TorusGlobalFile {
        format: "frida-torus-global/1",
        data: &data,
        windows: &windows,
        metadata: data.metadata(),
    };
    w.write(root, "dataset.json", &to_json_bytes(&file)?)?;
    let datasets = windows
        .iter()
        .map(|win| data.window_dataset(win))
        .collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for (i, (win, ds)) in windows.iter().zip(&datasets).enumerate() {
        let truth = ds.manifold().point(gen::torus_global_truth(win.x0).to_vec()).ok();
        jobs.push(Job {
            label: format!("w{i:03}"),
            ds,
            x: vec![0.0],
            weights: Weights::Local {
                kernel: Kernel::Gaussian,
                bandwidth: win.bandwidth,
            },
            start: ds.safe_set().c.clone(),
            methods: vec![Method::FridaExact],
            truth,
        });
    }
    let outputs = run_jobs(&jobs, opts, root, w)?;
    let [lo, hi] = gen::TORUS_GLOBAL_HALF_WIDTH;
    let (k_lo, k_hi) = gen::torus_curvature_extremes(100_000);
    let mut studies = Map::new();
    studies.insert(
        "windows".into(),
        json!({
            "count": windows.len(),
            "min_points": windows.iter().map(|w| w.indices.len()).min(),
            "padded": windows.iter().filter(|w| w.padded).count(),
            "half_width_in_clamp": windows.iter().all(|w| w.half_width >= lo && w.half_width <= hi),
            "all_contained": outputs.iter().all(|o| o.record.runs.iter().all(|r| r.invariants.containment_ok)),
        }),
    );
    studies.insert("curvature_extremes".into(), json!([k_lo, k_hi]));
    studies.insert(
        "mean_distance_to_truth".into(),
        json!(mean_truth_distance(&outputs, Method::FridaExact, "w")),
    );
    summary(Preset::TorusGlobal, opts, None, outputs, studies)
}

/// Options for fitting a user-supplied dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    pub mode: SolverMode,
    pub local: Option<(Kernel, f64)>,
    pub seed: u64,
    pub outer_max: Option<usize>,
    pub grad_tol: Option<f64>,
}

/// Fits every query in `queries` from the safe-set centre and writes
/// traces, a summary and a manifest to `out_dir`.
pub fn fit_dataset(data: &Path, queries: &[Vec<f64>], fit: &FitOptions, out_dir: &Path) -> Result<RunArtifact> {
    let file = DatasetFile::read(data)?;
    let metadata = file.metadata.clone();
    let ds = file.into_dataset()?;
    if queries.is_empty() {
        return Err(HarnessError::InvalidInput("no query predictors given".into()));
    }
    for q in queries {
        if q.len() != ds.predictor_dim() {
            return Err(HarnessError::InvalidInput(format!(
                "query {q:?} has {} coordinates, the dataset has {}",
                q.len(),
                ds.predictor_dim()
            )));
        }
    }
    let weights = match fit.local {
        Some((kernel, bandwidth)) => Weights::Local { kernel, bandwidth },
        None => Weights::Global,
    };
    let method = match fit.mode {
        SolverMode::Exact => Method::FridaExact,
        SolverMode::Inexact => Method::FridaInexact,
    };
    let opts = ExperimentOptions {
        seed: fit.seed,
        scope: Scope::Sweep,
        outer_max: fit.outer_max,
        grad_tol: fit.grad_tol,
    };
    std::fs::create_dir_all(out_dir)?;
    let mut w = ArtifactWriter::default();
    let dataset_json = DatasetFile::from_dataset(&ds, metadata).to_json()?;
    w.write(out_dir, "dataset.json", dataset_json.as_bytes())?;
    let c = ds.safe_set().c.clone();
    let jobs: Vec<Job> = queries
        .iter()
        .enumerate()
        .map(|(i, x)| Job {
            label: format!("q{i:03}"),
            ds: &ds,
            x: x.clone(),
            weights,
            start: c.clone(),
            methods: vec![method],
            truth: None,
        })
        .collect();
    let outputs = run_jobs(&jobs, &opts, out_dir, &mut w)?;
    let queries: Vec<QueryRecord> = outputs.into_iter().map(|o| o.record).collect();
    let invariants_ok = queries.iter().all(|q| q.runs.iter().all(RunRecord::ok));
    let summary = Summary {
        format: SUMMARY_FORMAT.into(),
        preset: "fit".into(),
        seed: fit.seed,
        scope: Scope::Sweep,
        config: opts.config(fit.mode),
        safe_set: Some(ds.safe_set().clone()),
        profile: Some(ds.profile().clone()),
        delta_ex: Some(ds.delta_ex()?),
        zeta_ex: Some(ds.zeta_ex()),
        queries,
        studies: Map::new(),
        invariants_ok,
    };
    w.write(out_dir, "summary.json", &to_json_bytes(&summary)?)?;
    let manifest = w.finish(out_dir)?;
    Ok(RunArtifact {
        out_dir: out_dir.to_path_buf(),
        summary,
        manifest,
    })
}
