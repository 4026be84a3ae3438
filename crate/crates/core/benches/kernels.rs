//! Hot kernels timed on a single worker and on the full pool. Without the
//! `parallel` feature only the sequential variant exists.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use parasmooth::evolution::{apply_operator, solve};
use parasmooth::galerkin::assemble_system;
use parasmooth::grid_spectral::{sobolev_seminorms, transform_forward, GridSpec};
use parasmooth::monitor::{linear_spaced, norm_series};
use parasmooth::problem::{rough_data_sampler, DiffusionModel, FieldSpec, ProblemSpec, RoughDataSpec};
use parasmooth::Method;

/// Run `f` under each available execution mode.
fn modes(mut f: impl FnMut(&str, &dyn Fn(&mut (dyn FnMut() + Send)))) {
    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        f("rayon-single", &|body: &mut (dyn FnMut() + Send)| single.install(|| body()));
        let label = format!("rayon-default-{}", rayon::current_num_threads());
        f(&label, &|body: &mut (dyn FnMut() + Send)| body());
    }
    #[cfg(not(feature = "parallel"))]
    f("sequential", &|body: &mut (dyn FnMut() + Send)| body());
}

fn mixed_problem(points: usize, horizon: f64) -> Arc<ProblemSpec> {
    let g = GridSpec::periodic(2, points).unwrap();
    let d = DiffusionModel::Mixed { a: 1.5, b: 0.5, c: 0.5 }.build(g).unwrap();
    let u0 = rough_data_sampler(&RoughDataSpec { decay: 1.5, seed: 1, amplitude: 1.0 }, g).unwrap();
    let f = FieldSpec::Smooth { amplitude: 0.5 }.build(g);
    Arc::new(ProblemSpec::new(d, f, u0, horizon).unwrap())
}

fn kernels(c: &mut Criterion) {
    let p = mixed_problem(256, 1e-4);
    let u = p.initial.clone();
    let physical = u.to_physical();
    let coeffs = u.to_spectral();

    let mut group = c.benchmark_group("transform_forward_256x256");
    modes(|label, run| {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| run(&mut || drop(black_box(transform_forward(&physical)))))
        });
    });
    group.finish();

    let mut group = c.benchmark_group("sobolev_seminorms_m4_256x256");
    modes(|label, run| {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| {
                run(&mut || drop(black_box(sobolev_seminorms(p.grid(), &coeffs.coefficients(), 4))))
            })
        });
    });
    group.finish();

    let mut group = c.benchmark_group("apply_operator_mixed_256x256");
    modes(|label, run| {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| run(&mut || drop(black_box(apply_operator(&p.diffusion, &coeffs).unwrap()))))
        });
    });
    group.finish();

    let small = mixed_problem(64, 2e-3);
    let times = linear_spaced(2e-4, 2e-3, 10);
    let mut group = c.benchmark_group("split_solve_and_norms_64x64");
    group.sample_size(10);
    modes(|label, run| {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| {
                run(&mut || {
                    let traj = solve(&small, &times, Method::SplitExponential).unwrap();
                    black_box(norm_series(&traj, 3).unwrap());
                })
            })
        });
    });
    group.finish();

    let g = GridSpec::periodic(1, 256).unwrap();
    let line = Arc::new(
        ProblemSpec::new(
            DiffusionModel::Sinusoidal { a: 1.5, b: 1.0 }.build(g).unwrap(),
            FieldSpec::Zero.build(g),
            FieldSpec::Smooth { amplitude: 1.0 }.build(g),
            0.1,
        )
        .unwrap(),
    );
    let mut group = c.benchmark_group("galerkin_assembly_m33");
    modes(|label, run| {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| run(&mut || drop(black_box(assemble_system(&line, 33).unwrap()))))
        });
    });
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
