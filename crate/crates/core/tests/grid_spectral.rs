use std::f64::consts::PI;

use parasmooth::grid_spectral::{
    inner_product, sobolev_norm, spectral_derivative, transform_backward, transform_forward,
    GridSpec, ScalarField,
};
use parasmooth::Error;

fn line(n: usize) -> GridSpec {
    GridSpec::periodic(1, n).unwrap()
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values()
        .iter()
        .zip(b.values().iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn constant_has_only_the_zero_mode() {
    let g = line(16);
    let u = transform_forward(&ScalarField::from_fn(g, |_| 2.5));
    let c = u.coefficients();
    assert!((c[0].re - 2.5).abs() < 1e-15);
    assert!(c[1..].iter().all(|z| z.norm() < 1e-15));
}

#[test]
fn sine_has_two_modes() {
    let g = line(32);
    let u = transform_forward(&ScalarField::from_fn(g, |x| x[0].sin()));
    let c = u.coefficients();
    let nonzero: Vec<i64> = (0..g.total())
        .filter(|&i| c[i].norm() > 1e-14)
        .map(|i| g.mode(i)[0])
        .collect();
    assert_eq!(nonzero, vec![1, -1]);
}

#[test]
fn round_trip_is_accurate() {
    let g = GridSpec::periodic(2, 16).unwrap();
    let u = ScalarField::from_fn(g, |x| (x[0] * 3.0).sin() * (x[1] + 0.3).cos() + x[0].cos().exp());
    let back = transform_backward(&transform_forward(&u));
    let scale = u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max_diff(&u, &back) <= 1e-12 * scale);
}

#[test]
fn derivative_examples() {
    let g = line(32);
    let c = spectral_derivative(&ScalarField::from_fn(g, |_| 4.0), 0).unwrap();
    assert!(c.values().iter().all(|v| v.abs() < 1e-14));
    let s = ScalarField::from_fn(g, |x| x[0].sin());
    let ds = spectral_derivative(&s, 0).unwrap();
    assert!(max_diff(&ds, &ScalarField::from_fn(g, |x| x[0].cos())) <= 1e-12);
    let dds = spectral_derivative(&ds, 0).unwrap();
    assert!(max_diff(&dds, &ScalarField::from_fn(g, |x| -x[0].sin())) <= 1e-12);
    assert!(matches!(
        spectral_derivative(&s, 1),
        Err(Error::InvalidAxis { axis: 1, dim: 1 })
    ));
}

#[test]
fn sobolev_examples() {
    let g = line(32);
    assert!(sobolev_norm(&ScalarField::from_fn(g, |_| 1.0), 1) < 1e-20);
    let s = ScalarField::from_fn(g, |x| x[0].sin());
    assert!((sobolev_norm(&s, 0) - PI).abs() < 1e-12);
    assert!((sobolev_norm(&s, 1) - PI).abs() < 1e-12);
    // multiplier 1 + 4 + 16 over the multi-indices of order 2
    let g2 = GridSpec::periodic(2, 16).unwrap();
    let m = ScalarField::from_fn(g2, |x| (x[0] + 2.0 * x[1]).cos());
    let ratio = sobolev_norm(&m, 2) / sobolev_norm(&m, 0);
    assert!((ratio - 21.0).abs() < 1e-10, "{ratio}");
}

#[test]
fn inner_product_examples() {
    let g = line(32);
    let s = ScalarField::from_fn(g, |x| x[0].sin());
    let c = ScalarField::from_fn(g, |x| x[0].cos());
    assert!(inner_product(&s, &c).unwrap().abs() < 1e-14);
    assert!((inner_product(&s, &s).unwrap() - PI).abs() < 1e-13);
    assert_eq!(inner_product(&ScalarField::zeros(g), &s).unwrap(), 0.0);
    let other = ScalarField::zeros(line(16));
    assert!(matches!(inner_product(&s, &other), Err(Error::GridMismatch)));
}

#[test]
fn grid_validation() {
    assert!(GridSpec::periodic(1, 6).is_err());
    assert!(GridSpec::periodic(1, 9).is_err());
    assert!(GridSpec::periodic(4, 8).is_err());
    assert!(GridSpec::new(1, 8, 0.0).is_err());
    assert_eq!(GridSpec::periodic(3, 8).unwrap().total(), 512);
}
