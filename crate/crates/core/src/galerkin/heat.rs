use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid_spectral::{GridSpec, ScalarField};
use crate::problem::ProblemSpec;

/// Separable direct DFT, `O(N^{n+1})`. `sign = -1` analyses, `+1` synthesises.
fn direct_dft(grid: &GridSpec, data: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = grid.points();
    let twiddle: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, sign * 2.0 * PI * j as f64 / n as f64))
        .collect();
    let mut cur = data.to_vec();
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        let mut next = vec![Complex64::default(); cur.len()];
        for (flat, out) in next.iter_mut().enumerate() {
            let k = (flat / stride) % n;
            let base = flat - k * stride;
            let mut acc = Complex64::default();
            for j in 0..n {
                acc += cur[base + j * stride] * twiddle[(j * k) % n];
            }
            *out = acc;
        }
        cur = next;
    }
    cur
}

/// Closed-form solution for `D = c·I`: each mode relaxes as
/// `e^{−c|ξ|²t}û₀ + (1 − e^{−c|ξ|²t})f̂/(c|ξ|²)`, with `û₀(0) + t f̂(0)` for
/// the mean. Uses a direct DFT, independent of the solver's transforms.
pub fn heat_exact(problem: &ProblemSpec, t: f64) -> Result<ScalarField> {
    let c = problem.diffusion.isotropic_constant().ok_or_else(|| {
        Error::MethodMismatch("the heat kernel needs D = c·I with constant c".into())
    })?;
    if t == 0.0 {
        return Ok(problem.initial.to_physical());
    }
    let grid = *problem.grid();
    let m = grid.total() as f64;
    let lift = |f: &ScalarField| -> Vec<Complex64> {
        let v: Vec<Complex64> = f.values().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        direct_dft(&grid, &v, -1.0).into_iter().map(|z| z / m).collect()
    };
    let u0 = lift(&problem.initial);
    let f = lift(&problem.forcing);
    let scale = grid.scale();
    let evolved: Vec<Complex64> = (0..grid.total())
        .map(|i| {
            let idx = grid.unflatten(i);
            let k2: f64 = (0..grid.dim())
                .map(|a| {
                    let j = idx[a] as i64;
                    let k = if j <= grid.nyquist() as i64 {
                        j
                    } else {
                        j - grid.points() as i64
                    };
                    (k as f64 * scale).powi(2)
                })
                .sum();
            if k2 == 0.0 {
                u0[i] + t * f[i]
            } else {
                let rate = c * k2;
                let decay = (-rate * t).exp();
                let relax = -(-rate * t).exp_m1() / rate;
                u0[i] * decay + f[i] * relax
            }
        })
        .collect();
    let values = direct_dft(&grid, &evolved, 1.0)
        .into_iter()
        .map(|z| z.re)
        .collect();
    ScalarField::from_values(grid, values)
}
