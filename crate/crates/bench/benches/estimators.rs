use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mcc_eiv::estimators::{
    auto_grid_points, lad_estimate, mcc_estimate, mcc_objective, mse_estimate, tls_estimate_weighted,
};
use mcc_eiv::{EivDataset, MccConfig, MccSolver};
use mcc_eiv_bench::{fir_dataset, scalar_dataset};

fn baselines(c: &mut Criterion) {
    let mut g = c.benchmark_group("baseline");
    for n in [100, 1000, 10_000] {
        let ds = scalar_dataset(n);
        let design = ds.design();
        g.bench_with_input(BenchmarkId::new("mse", n), &n, |b, _| b.iter(|| mse_estimate(black_box(&design))));
        g.bench_with_input(BenchmarkId::new("lad", n), &n, |b, _| b.iter(|| lad_estimate(black_box(&design))));
        g.bench_with_input(BenchmarkId::new("tls", n), &n, |b, _| {
            b.iter(|| tls_estimate_weighted(black_box(&design), 1.0))
        });
    }
    g.finish();
}

fn objective(c: &mut Criterion) {
    let ds = scalar_dataset(1000);
    let design = ds.design();
    c.bench_function("mcc_objective/1000", |b| b.iter(|| mcc_objective(black_box(&design), &[2.9], 0.2)));
}

fn scalar_solvers(c: &mut Criterion) {
    let ds = scalar_dataset(1000);
    let design = ds.design();
    let mut g = c.benchmark_group("mcc_scalar");
    g.sample_size(20);
    for solver in [MccSolver::FixedPoint, MccSolver::Grid, MccSolver::Eda, MccSolver::GradientAscent] {
        let mut cfg = MccConfig {
            sigma: 0.2,
            solver,
            ..MccConfig::default()
        };
        if solver == MccSolver::Grid {
            let (lo, hi) = cfg.window(&design);
            cfg.grid_points = auto_grid_points(&design, cfg.sigma, lo, hi, cfg.grid_points);
        }
        g.bench_function(format!("{solver:?}"), |b| b.iter(|| mcc_estimate(black_box(&design), &cfg)));
    }
    g.finish();
}

fn fir_solvers(c: &mut Criterion) {
    let ds = fir_dataset(2000);
    let design = ds.design();
    let mut g = c.benchmark_group("mcc_fir");
    g.sample_size(10);
    for solver in [MccSolver::FixedPoint, MccSolver::Eda] {
        let cfg = MccConfig {
            sigma: 0.25,
            solver,
            ..MccConfig::default()
        };
        g.bench_function(format!("{solver:?}"), |b| b.iter(|| mcc_estimate(black_box(&design), &cfg)));
    }
    g.finish();
}

criterion_group!(benches, baselines, objective, scalar_solvers, fir_solvers);
criterion_main!(benches);
