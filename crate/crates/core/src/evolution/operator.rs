use num_complex::Complex64;

use crate::error::Result;
use crate::grid_spectral::{transform, GridSpec, ScalarField};
use crate::par;
use crate::problem::{DiffusionField, ProblemSpec};

/// Pseudospectral `∇·(D∇·)`: spectral gradient, pointwise `D(x)` product in
/// physical space, spectral divergence.
pub(crate) struct DivergenceForm<'a> {
    diffusion: &'a DiffusionField,
    grid: GridSpec,
    kappa: Vec<f64>,
}

impl<'a> DivergenceForm<'a> {
    pub(crate) fn new(diffusion: &'a DiffusionField) -> Self {
        let grid = *diffusion.grid();
        Self {
            diffusion,
            grid,
            kappa: grid.derivative_wavenumbers(),
        }
    }

    /// Physical gradient components of the field with coefficients `coeffs`.
    pub(crate) fn gradient(&self, coeffs: &[Complex64]) -> Vec<Vec<f64>> {
        (0..self.grid.dim())
            .map(|axis| {
                let d: Vec<Complex64> = (0..coeffs.len())
                    .map(|i| {
                        let k = self.kappa[self.grid.unflatten(i)[axis]];
                        coeffs[i] * Complex64::new(0.0, k)
                    })
                    .collect();
                transform::backward_real(&self.grid, &d)
            })
            .collect()
    }

    /// Physical flux components `q = D∇u`.
    pub(crate) fn flux(&self, coeffs: &[Complex64]) -> Vec<Vec<f64>> {
        let n = self.grid.dim();
        let grad = self.gradient(coeffs);
        let mut flux = vec![vec![0.0; self.grid.total()]; n];
        for (b, q) in flux.iter_mut().enumerate() {
            par::for_each_indexed_mut(q, |p, out| {
                let m = self.diffusion.at(p);
                *out = (0..n).map(|a| m[b * n + a] * grad[a][p]).sum();
            });
        }
        flux
    }

    /// Spectral coefficients of `∇·(D∇u)`.
    pub(crate) fn apply(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let flux = self.flux(coeffs);
        let mut out = vec![Complex64::default(); coeffs.len()];
        for (axis, q) in flux.iter().enumerate() {
            let qh = transform::forward_real(&self.grid, q);
            par::for_each_indexed_mut(&mut out, |i, o| {
                let k = self.kappa[self.grid.unflatten(i)[axis]];
                *o += qh[i] * Complex64::new(0.0, k);
            });
        }
        out
    }

    /// `Σ_a κ_a²` per mode: the symbol of `−Δ` with the Nyquist plane
    /// treated like every other first derivative.
    pub(crate) fn laplacian_symbol(grid: &GridSpec) -> Vec<f64> {
        let kappa = grid.derivative_wavenumbers();
        par::map_range(grid.total(), |i| {
            let idx = grid.unflatten(i);
            (0..grid.dim()).map(|a| kappa[idx[a]] * kappa[idx[a]]).sum()
        })
    }
}

/// `∇·(D∇u)`, returned in spectral form.
pub fn apply_operator(diffusion: &DiffusionField, u: &ScalarField) -> Result<ScalarField> {
    if u.grid() != diffusion.grid() {
        return Err(crate::error::Error::GridMismatch);
    }
    let out = DivergenceForm::new(diffusion).apply(&u.coefficients());
    ScalarField::from_coefficients(*u.grid(), out)
}

/// Step bound `safety / (‖D‖_∞ ξ_max²)` where `‖D‖_∞` is the largest grid
/// eigenvalue of `D` and `ξ_max` the largest scaled lattice wavenumber.
pub fn cfl_step_size(problem: &ProblemSpec, safety: f64) -> f64 {
    let xi = problem.grid().max_wavenumber();
    safety / (problem.diffusion.sup_norm() * xi * xi)
}
