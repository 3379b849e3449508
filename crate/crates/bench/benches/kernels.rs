use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hjlab_bench::quadratic_cosine;
use hjlab_core::characteristics::{integrate_flow, uniform_seeds};
use hjlab_core::semiconcavity::estimate_constants;
use hjlab_core::solver::{characteristic_field, lax_friedrichs_step, solve_characteristic_exact};

fn lax_friedrichs(c: &mut Criterion) {
    let mut group = c.benchmark_group("lax_friedrichs_step");
    for n in [512, 4096] {
        let fx = quadratic_cosine(n, 0.5).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &fx, |b, fx| {
            b.iter(|| lax_friedrichs_step(&fx.hamiltonian, black_box(&fx.initial), fx.plan.dt, &fx.plan.dissipation))
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let fx = quadratic_cosine(512, 0.5).unwrap();
    c.bench_function("characteristic_exact_512", |b| {
        b.iter(|| solve_characteristic_exact(&fx.hamiltonian, &fx.psi, &fx.grid, black_box(0.5)).unwrap())
    });
}

fn flow(c: &mut Criterion) {
    let fx = quadratic_cosine(512, 0.5).unwrap();
    let times = hjlab_core::grid::uniform_times(fx.plan.dt, fx.plan.steps);
    let g = characteristic_field(&fx.hamiltonian, &fx.psi, &fx.grid, times).unwrap();
    let seeds = uniform_seeds(&fx.grid, 64);
    c.bench_function("integrate_flow_64_seeds", |b| {
        b.iter(|| integrate_flow(black_box(&g), &fx.hamiltonian, &seeds).unwrap())
    });
}

fn semiconcavity(c: &mut Criterion) {
    let fx = quadratic_cosine(4096, 0.5).unwrap();
    c.bench_function("estimate_constants_4096", |b| b.iter(|| estimate_constants(black_box(&fx.initial))));
}

criterion_group!(benches, lax_friedrichs, oracle, flow, semiconcavity);
criterion_main!(benches);
