use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use squeeze_core::analytic::{integrate, quad_closed_form_general, time_grid, QuadBranch};
use squeeze_core::ode::Tolerances;
use squeeze_core::oracle::{construct_sts_density, evolve, EvolveOptions, FockDensityMatrix};
use squeeze_core::pump::PumpEnvelope;
use squeeze_core::sts::{ModelParams, StsState};

const THETA: f64 = -std::f64::consts::FRAC_PI_2;

fn params(n_b: f64) -> ModelParams {
    ModelParams::new(1.0, n_b, 0.0, THETA).unwrap()
}

fn bench_reduced_integration(c: &mut Criterion) {
    let p = params(0.5);
    let env = PumpEnvelope::constant(0.8, THETA).unwrap();
    let grid = time_grid(10.0, 0.01);
    let init = StsState::thermal(0.5).unwrap();
    c.bench_function("reduced_system_gt10", |b| {
        b.iter(|| {
            integrate(
                black_box(&init),
                black_box(&p),
                black_box(&env),
                &grid,
                Tolerances::default(),
            )
            .unwrap()
        })
    });
}

fn bench_general_quadrature(c: &mut Criterion) {
    let p = params(1.0);
    let env = PumpEnvelope::gaussian(5.0, std::f64::consts::FRAC_1_SQRT_2, 2.5, THETA).unwrap();
    let grid = time_grid(6.0, 0.01);
    c.bench_function("gaussian_quadrature_gt6", |b| {
        b.iter(|| {
            quad_closed_form_general(black_box(&env), &p, 3.0, &grid, QuadBranch::Squeezed)
                .unwrap()
        })
    });
}

fn bench_lindblad_evolution(c: &mut Criterion) {
    let p = params(0.5);
    let env = PumpEnvelope::constant(0.8, THETA).unwrap();
    let grid = time_grid(1.0, 0.1);
    let rho0 = FockDensityMatrix::thermal(0.5, 60).unwrap();
    let options = EvolveOptions {
        check_positivity: false,
        richardson: false,
        ..Default::default()
    };
    c.bench_function("lindblad_dim60_gt1", |b| {
        b.iter(|| evolve(black_box(&rho0), &p, &env, &grid, &options).unwrap())
    });
}

fn bench_sts_construction(c: &mut Criterion) {
    c.bench_function("sts_density_dim80", |b| {
        b.iter(|| {
            construct_sts_density(black_box(1.0), Complex64::new(0.5, 0.0), 80, 1e-8).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_reduced_integration,
    bench_general_quadrature,
    bench_lindblad_evolution,
    bench_sts_construction
);
criterion_main!(benches);
