use std::hint::black_box;

use contextium::kcbs::{kcbs_pentagon, plus_z};
use contextium::majorana::{stars_from_state, state_from_stars};
use contextium::measures::{global_bounds, mie};
use contextium::operator::{eigendecompose, joint_eigenprojectors, random, Tolerances, DEFAULT_GROUP_TOL};
use contextium::uncertainty::{optimize_sum, smax_surface_sample};
use contextium::{DensityMatrix, OptimizationProblem, OptimizerConfig, StarPair};
use criterion::{criterion_group, criterion_main, Criterion};

fn operators(c: &mut Criterion) {
    let mut rng = random::rng(1);
    let h = random::hermitian(5, &mut rng);
    c.bench_function("eigendecompose_5", |b| {
        b.iter(|| eigendecompose(black_box(&h), DEFAULT_GROUP_TOL))
    });

    let pentagon = kcbs_pentagon();
    let ctx = &pentagon.contexts().contexts()[0];
    c.bench_function("joint_eigenprojectors_kcbs", |b| {
        b.iter(|| joint_eigenprojectors(black_box(ctx.a()), black_box(ctx.b()), Tolerances::default()))
    });
}

fn measures(c: &mut Criterion) {
    let pentagon = kcbs_pentagon();
    let family = pentagon.contexts();
    let rho = DensityMatrix::from_pure(&plus_z()).unwrap();
    c.bench_function("mie_kcbs", |b| b.iter(|| mie(black_box(&family.contexts()[0]))));
    c.bench_function("global_bounds_kcbs", |b| {
        b.iter(|| global_bounds(black_box(family), black_box(&rho)))
    });
}

fn majorana(c: &mut Criterion) {
    let pentagon = kcbs_pentagon();
    let pair = StarPair::new(*pentagon.direction(1), *pentagon.direction(3));
    let psi = state_from_stars(&pair);
    c.bench_function("state_from_stars", |b| {
        b.iter(|| state_from_stars(black_box(&pair)))
    });
    c.bench_function("stars_from_state", |b| {
        b.iter(|| stars_from_state(black_box(&psi)))
    });
}

fn uncertainty(c: &mut Criterion) {
    let mut g = c.benchmark_group("uncertainty");
    g.sample_size(10);
    let problem = OptimizationProblem::kcbs(5).unwrap();
    let cfg = OptimizerConfig {
        starts: 8,
        ..OptimizerConfig::default()
    };
    g.bench_function("optimize_n5_8_starts", |b| {
        b.iter(|| optimize_sum(&problem, black_box(&cfg)))
    });
    g.bench_function("surface_res30", |b| {
        b.iter(|| smax_surface_sample(black_box(&[1]), 30))
    });
    g.finish();
}

criterion_group!(benches, operators, measures, majorana, uncertainty);
criterion_main!(benches);
