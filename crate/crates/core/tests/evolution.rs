use std::sync::Arc;

use parasmooth::evolution::{apply_operator, cfl_step_size, mass_balance, solve, solve_with_safety};
use parasmooth::grid_spectral::{l2_distance, l2_norm, sobolev_norm, GridSpec, ScalarField};
use parasmooth::monitor::{linear_spaced, log_spaced};
use parasmooth::problem::{DiffusionModel, FieldSpec, ProblemSpec};
use parasmooth::{Error, Method};

fn problem(model: DiffusionModel, grid: GridSpec, f: ScalarField, u0: ScalarField, t: f64) -> Arc<ProblemSpec> {
    Arc::new(ProblemSpec::new(model.build(grid).unwrap(), f, u0, t).unwrap())
}

fn line(n: usize) -> GridSpec {
    GridSpec::periodic(1, n).unwrap()
}

const ALL: [Method; 3] = [Method::ExactExponential, Method::SplitExponential, Method::ReferenceRk];

#[test]
fn operator_examples() {
    let g = line(32);
    let id = DiffusionModel::Identity.build(g).unwrap();
    let c = apply_operator(&id, &ScalarField::from_fn(g, |_| 3.0)).unwrap();
    assert!(l2_norm(&c) < 1e-14);
    let s = ScalarField::from_fn(g, |x| x[0].sin());
    let lap = apply_operator(&id, &s).unwrap();
    assert!(l2_distance(&lap, &s.scaled(-1.0)).unwrap() < 1e-12);
    let d = DiffusionModel::Sinusoidal { a: 2.0, b: 1.0 }.build(g).unwrap();
    let out = apply_operator(&d, &s).unwrap();
    let expected = ScalarField::from_fn(g, |x| -2.0 * x[0].sin() + (2.0 * x[0]).cos());
    assert!(l2_distance(&out, &expected).unwrap() < 1e-12);
}

#[test]
fn cfl_examples() {
    let mk = |n| problem(DiffusionModel::Identity, line(n), ScalarField::zeros(line(n)), ScalarField::zeros(line(n)), 1.0);
    let dt = cfl_step_size(&mk(64), 1.0);
    assert!((dt - 1.0 / 1024.0).abs() < 1e-15);
    assert!((cfl_step_size(&mk(128), 1.0) - dt / 4.0).abs() < 1e-15);
    assert!((cfl_step_size(&mk(64), 0.5) - dt / 2.0).abs() < 1e-15);
}

#[test]
fn zero_problem_stays_zero() {
    let g = line(32);
    let p = problem(DiffusionModel::Sinusoidal { a: 1.5, b: 1.0 }, g, ScalarField::zeros(g), ScalarField::zeros(g), 0.1);
    for m in [Method::SplitExponential, Method::ReferenceRk] {
        let traj = solve(&p, &[0.05, 0.1], m).unwrap();
        assert!(traj.states().iter().all(|u| l2_norm(u) == 0.0));
        assert_eq!(mass_balance(&traj), 0.0);
    }
}

#[test]
fn single_mode_decay() {
    let g = line(32);
    let u0 = ScalarField::from_fn(g, |x| x[0].cos());
    let p = problem(DiffusionModel::Identity, g, ScalarField::zeros(g), u0.clone(), 0.5);
    for m in ALL {
        let traj = solve(&p, &[0.5], m).unwrap();
        let ratio = l2_norm(&traj.states()[0]) / l2_norm(&u0);
        let tol = if m == Method::ReferenceRk { 1e-10 } else { 1e-13 };
        assert!((ratio - (-0.5f64).exp()).abs() < tol, "{m:?}: {ratio}");
    }
}

#[test]
fn relaxation_to_steady_state() {
    let g = line(32);
    let sin = ScalarField::from_fn(g, |x| x[0].sin());
    let p = problem(DiffusionModel::Identity, g, sin.clone(), ScalarField::zeros(g), 10.0);
    for m in [Method::ExactExponential, Method::SplitExponential] {
        let traj = solve(&p, &[10.0], m).unwrap();
        let gap = l2_distance(&traj.states()[0], &sin).unwrap();
        assert!(gap <= (-10.0f64).exp() * l2_norm(&sin) * (1.0 + 1e-6), "{m:?}: {gap}");
    }
}

#[test]
fn split_matches_exact_for_constant_diffusion() {
    let g = line(64);
    let u0 = FieldSpec::Smooth { amplitude: 1.0 }.build(g);
    let f = FieldSpec::Mode { wavevector: vec![2], amplitude: 0.3, phase: 0.1 }.build(g);
    let p = problem(DiffusionModel::Isotropic { c: 1.5 }, g, f, u0, 1.0);
    let times = linear_spaced(0.05, 1.0, 20);
    let a = solve(&p, &times, Method::ExactExponential).unwrap();
    let b = solve(&p, &times, Method::SplitExponential).unwrap();
    for (x, y) in a.states().iter().zip(b.states()) {
        assert!(l2_distance(x, y).unwrap() <= 1e-8 * l2_norm(x));
    }
}

#[test]
fn mass_balance_examples() {
    let g = line(32);
    let u0 = FieldSpec::Smooth { amplitude: 1.0 }.build(g);
    let f = FieldSpec::Mode { wavevector: vec![1], amplitude: 1.0, phase: 0.0 }.build(g);
    let p = problem(DiffusionModel::Sinusoidal { a: 1.5, b: 1.0 }, g, f, u0.clone(), 0.5);
    let traj = solve(&p, &linear_spaced(0.05, 0.5, 10), Method::SplitExponential).unwrap();
    assert!(mass_balance(&traj) <= 1e-12 * l2_norm(&u0));

    let one = ScalarField::from_fn(g, |_| 1.0);
    let p = problem(DiffusionModel::Identity, g, one, ScalarField::zeros(g), 1.0);
    let times = linear_spaced(0.1, 1.0, 10);
    let traj = solve(&p, &times, Method::SplitExponential).unwrap();
    for (&t, u) in times.iter().zip(traj.states()) {
        assert!((u.mean() - t).abs() < 1e-14);
    }
}

#[test]
fn norms_are_nonincreasing_without_forcing() {
    let g = line(64);
    let u0 = FieldSpec::Smooth { amplitude: 1.0 }.build(g);
    let p = problem(DiffusionModel::Isotropic { c: 0.7 }, g, ScalarField::zeros(g), u0, 1.0);
    let traj = solve(&p, &log_spaced(1e-3, 1.0, 30), Method::ExactExponential).unwrap();
    for k in 0..=4 {
        let norms: Vec<f64> = traj.states().iter().map(|u| sobolev_norm(u, k)).collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "k = {k}");
    }
    // discrete L² dissipation for variable D
    let p = problem(
        DiffusionModel::Sinusoidal { a: 1.5, b: 1.0 },
        g,
        ScalarField::zeros(g),
        FieldSpec::Smooth { amplitude: 1.0 }.build(g),
        1.0,
    );
    let traj = solve(&p, &log_spaced(1e-3, 1.0, 30), Method::SplitExponential).unwrap();
    let e: Vec<f64> = traj.states().iter().map(|u| sobolev_norm(u, 0)).collect();
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn spectral_accuracy_under_refinement() {
    let model = DiffusionModel::Sinusoidal { a: 1.5, b: 1.0 };
    let run = |n: usize| {
        let g = line(n);
        let u0 = ScalarField::from_fn(g, |x| (x[0].sin()).exp());
        let p = problem(model.clone(), g, ScalarField::zeros(g), u0, 0.05);
        solve(&p, &[0.05], Method::SplitExponential).unwrap().states()[0].clone()
    };
    let reference = run(128);
    let errs: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| l2_distance(&reference.resample(line(n)).unwrap(), &run(n)).unwrap())
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= (w[0] / 100.0).max(1e-10), "{errs:?}");
    }
}

#[test]
fn invalid_inputs() {
    let g = line(16);
    let p = problem(DiffusionModel::Sinusoidal { a: 1.5, b: 1.0 }, g, ScalarField::zeros(g), ScalarField::zeros(g), 1.0);
    assert!(matches!(solve(&p, &[0.5], Method::ExactExponential), Err(Error::MethodMismatch(_))));
    assert!(matches!(solve(&p, &[0.0], Method::SplitExponential), Err(Error::InvalidSchedule(_))));
    assert!(matches!(solve(&p, &[0.5, 0.2], Method::SplitExponential), Err(Error::InvalidSchedule(_))));
    assert!(matches!(solve(&p, &[2.0], Method::SplitExponential), Err(Error::InvalidSchedule(_))));
    assert!(solve_with_safety(&p, &[0.5], Method::SplitExponential, 1.5).is_err());
}
