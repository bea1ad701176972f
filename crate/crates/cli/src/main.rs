//! `frida`: fit signed Fréchet regressions, run the experiment presets and
//! the invariant suite.
//!
//! Exit codes: 0 success, 1 an invariant failed, 2 bad input.

use clap::{Args, Parser, Subcommand};
use frida_core::harness::{
    check::check_suite, fit_dataset, run_experiment, ExperimentOptions, FitOptions, Preset,
    RunArtifact, Scope,
};
use frida_core::{Kernel, SolverMode};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "frida", version, about = "Signed Fréchet regression with FRIDA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SolverFlags {
    /// Seed for every random stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Outer iteration budget.
    #[arg(long)]
    outer_max: Option<usize>,
    /// Stop once the Riemannian gradient norm is at most this.
    #[arg(long)]
    grad_tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a dataset file at one or more query predictors.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Queries. Scalar predictors: comma separated. Vector predictors:
        /// queries separated by ';', coordinates by ','.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value = "exact")]
        mode: SolverMode,
        /// Use local linear kernel weights instead of global weights.
        #[arg(long)]
        local: bool,
        #[arg(long, default_value = "gaussian", requires = "local")]
        kernel: Kernel,
        #[arg(long, requires = "local")]
        bandwidth: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Run a preset's query sweep.
    Sweep {
        #[arg(long)]
        preset: Preset,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Run a preset with all of its studies.
    Experiment {
        #[arg(long)]
        preset: Preset,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Run the invariant suite and print a pass/fail table.
    Check,
}

fn parse_queries(s: &str, dim: usize) -> Result<Vec<Vec<f64>>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("'{}' is not a number", t.trim()))
    };
    let queries: Vec<Vec<f64>> = if dim == 1 {
        s.split([',', ';'])
            .filter(|t| !t.trim().is_empty())
            .map(|t| num(t).map(|v| vec![v]))
            .collect::<Result<_, _>>()?
    } else {
        s.split(';')
            .filter(|t| !t.trim().is_empty())
            .map(|q| q.split(',').map(num).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?
    };
    if queries.is_empty() {
        return Err("no query predictors given".into());
    }
    Ok(queries)
}

fn report(art: &RunArtifact) -> ExitCode {
    let s = &art.summary;
    let runs = s.queries.iter().map(|q| q.runs.len()).sum::<usize>();
    let failed = s
        .queries
        .iter()
        .flat_map(|q| &q.runs)
        .filter(|r| !r.ok())
        .count();
    for q in s.queries.iter().take(40) {
        for r in &q.runs {
            println!(
                "{:<10} x={:<24} {:<13} {:<16} f={:.12e} |grad|={:.2e} outer={}",
                q.label,
                format!("{:?}", q.x),
                r.method.name(),
                format!("{:?}", r.status),
                r.f,
                r.grad_norm,
                r.outer_iterations
            );
        }
    }
    if s.queries.len() > 40 {
        println!("... {} more queries in summary.json", s.queries.len() - 40);
    }
    if !s.studies.is_empty() {
        println!("studies: {}", serde_json::Value::Object(s.studies.clone()));
    }
    println!(
        "{} runs, {} with invariant failures; artifacts in {}",
        runs,
        failed,
        art.out_dir.display()
    );
    if art.invariants_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn experiment_options(flags: &SolverFlags, scope: Scope) -> ExperimentOptions {
    ExperimentOptions {
        seed: flags.seed,
        scope,
        outer_max: flags.outer_max,
        grad_tol: flags.grad_tol,
    }
}

fn bad_input(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Fit {
            data,
            x,
            mode,
            local,
            kernel,
            bandwidth,
            out,
            solver,
        } => {
            let local = match (local, bandwidth) {
                (false, _) => None,
                (true, Some(h)) => Some((kernel, h)),
                (true, None) => return bad_input("--local needs --bandwidth"),
            };
            let dim = match frida_core::regression::DatasetFile::read(&data) {
                Ok(f) => f.predictors.first().map_or(1, Vec::len),
                Err(e) => return bad_input(e),
            };
            let queries = match parse_queries(&x, dim) {
                Ok(q) => q,
                Err(e) => return bad_input(e),
            };
            let opts = FitOptions {
                mode,
                local,
                seed: solver.seed,
                outer_max: solver.outer_max,
                grad_tol: solver.grad_tol,
            };
            match fit_dataset(&data, &queries, &opts, &out) {
                Ok(art) => report(&art),
                Err(e) => bad_input(e),
            }
        }
        Command::Sweep {
            preset,
            out,
            solver,
        } => match run_experiment(preset, &out, &experiment_options(&solver, Scope::Sweep)) {
            Ok(art) => report(&art),
            Err(e) => bad_input(e),
        },
        Command::Experiment {
            preset,
            out,
            solver,
        } => match run_experiment(preset, &out, &experiment_options(&solver, Scope::Full)) {
            Ok(art) => report(&art),
            Err(e) => bad_input(e),
        },
        Command::Check => {
            let report = check_suite();
            print!("{}", report.table());
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
