use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frida_bench::instances;
use frida_core::solver::{frida_step_exact, frida_step_inexact, StepRequest};
use frida_core::{frida_solve, gd_solve, DcObjective, SolverConfig};
use std::hint::black_box;

fn objective(c: &mut Criterion) {
    let mut group = c.benchmark_group("objective");
    for inst in instances() {
        let obj = DcObjective::global(&inst.dataset, &inst.x).unwrap();
        let y = inst.dataset.safe_set().c.clone();
        group.bench_function(BenchmarkId::new("evaluate", inst.name), |b| {
            b.iter(|| obj.evaluate(black_box(&y)).unwrap())
        });
    }
    group.finish();
}

fn single_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for inst in instances() {
        let obj = DcObjective::global(&inst.dataset, &inst.x).unwrap();
        let y = inst.dataset.safe_set().c.clone();
        let exact = SolverConfig::exact();
        let inexact = SolverConfig::inexact();
        let req = StepRequest::assemble(&obj, &y, &exact).unwrap();
        group.bench_function(BenchmarkId::new("assemble", inst.name), |b| {
            b.iter(|| StepRequest::assemble(&obj, black_box(&y), &exact).unwrap())
        });
        group.bench_function(BenchmarkId::new("exact", inst.name), |b| {
            b.iter(|| frida_step_exact(&obj, black_box(&req), &exact).unwrap())
        });
        let eps = inexact.epsilon.eps(0);
        group.bench_function(BenchmarkId::new("inexact", inst.name), |b| {
            b.iter(|| frida_step_inexact(&obj, black_box(&req), eps, &inexact).unwrap())
        });
    }
    group.finish();
}

fn full_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for inst in instances() {
        let obj = DcObjective::global(&inst.dataset, &inst.x).unwrap();
        let y0 = inst.dataset.safe_set().c.clone();
        let exact = SolverConfig::exact();
        let inexact = SolverConfig::inexact();
        group.bench_function(BenchmarkId::new("frida_exact", inst.name), |b| {
            b.iter(|| frida_solve(&obj, black_box(&y0), &exact).unwrap())
        });
        group.bench_function(BenchmarkId::new("frida_inexact", inst.name), |b| {
            b.iter(|| frida_solve(&obj, black_box(&y0), &inexact).unwrap())
        });
        group.bench_function(BenchmarkId::new("gd", inst.name), |b| {
            b.iter(|| gd_solve(&obj, black_box(&y0), &exact).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, objective, single_step, full_solve);
criterion_main!(benches);
