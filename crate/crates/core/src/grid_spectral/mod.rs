//! Periodic grids, Fourier transforms, spectral derivatives and the
//! multi-index Sobolev seminorms `‖∇ᵏu‖₂² = Σ_{|α|=k} ‖∂^α u‖₂²`.

mod field;
mod grid;
pub(crate) mod transform;

pub use field::ScalarField;
pub use grid::{GridSpec, MAX_DIM};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::summation::compensated_sum;

/// Highest derivative order for which multi-indices are enumerated.
pub const MAX_ORDER: usize = 8;

/// Populate the spectral view.
pub fn transform_forward(field: &ScalarField) -> ScalarField {
    field.to_spectral()
}

/// Populate the physical view.
pub fn transform_backward(field: &ScalarField) -> ScalarField {
    field.to_physical()
}

/// `∂u/∂x_axis`, returned in spectral form. The Nyquist plane is zeroed.
pub fn spectral_derivative(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    let grid = *field.grid();
    if axis >= grid.dim() {
        return Err(Error::InvalidAxis {
            axis,
            dim: grid.dim(),
        });
    }
    let kappa = grid.derivative_wavenumbers();
    let coeffs = field.coefficients();
    let out = (0..coeffs.len())
        .map(|i| {
            let j = grid.unflatten(i)[axis];
            coeffs[i] * Complex64::new(0.0, kappa[j])
        })
        .collect();
    ScalarField::from_coefficients(grid, out)
}

/// All multi-indices `α ∈ ℕⁿ` with `|α| = k`, in lexicographically
/// decreasing order.
pub fn multi_indices(dim: usize, k: usize) -> Vec<[usize; MAX_DIM]> {
    fn rec(
        dim: usize,
        axis: usize,
        left: usize,
        cur: &mut [usize; MAX_DIM],
        out: &mut Vec<[usize; MAX_DIM]>,
    ) {
        if axis + 1 == dim {
            cur[axis] = left;
            out.push(*cur);
            cur[axis] = 0;
            return;
        }
        for take in (0..=left).rev() {
            cur[axis] = take;
            rec(dim, axis + 1, left - take, cur, out);
        }
        cur[axis] = 0;
    }
    let mut out = Vec::new();
    rec(dim, 0, k, &mut [0; MAX_DIM], &mut out);
    out
}

/// Per-mode Fourier multiplier of `‖∇ᵏ·‖₂²`: `Σ_{|α|=k} Π_a κ_a^{2α_a}`.
fn multiplier(kappa_sq: &[f64], alphas: &[[usize; MAX_DIM]]) -> f64 {
    alphas
        .iter()
        .map(|alpha| {
            kappa_sq
                .iter()
                .zip(alpha)
                .map(|(k2, &p)| k2.powi(p as i32))
                .product::<f64>()
        })
        .sum()
}

/// `‖∇ᵏu‖₂²` from spectral coefficients, for every `k` in `0..=max_k`.
pub fn sobolev_seminorms(grid: &GridSpec, coeffs: &[Complex64], max_k: usize) -> Vec<f64> {
    assert!(
        max_k <= MAX_ORDER,
        "derivative order {max_k} exceeds {MAX_ORDER}"
    );
    let kappa = grid.derivative_wavenumbers();
    let volume = grid.volume();
    (0..=max_k)
        .map(|k| {
            let alphas = multi_indices(grid.dim(), k);
            let total = compensated_sum(coeffs.len(), |i| {
                let power = coeffs[i].norm_sqr();
                if power == 0.0 {
                    return 0.0;
                }
                if k == 0 {
                    return power;
                }
                let idx = grid.unflatten(i);
                let mut k2 = [0.0; MAX_DIM];
                for a in 0..grid.dim() {
                    k2[a] = kappa[idx[a]] * kappa[idx[a]];
                }
                multiplier(&k2[..grid.dim()], &alphas) * power
            });
            volume * total
        })
        .collect()
}

/// `‖∇ᵏu‖₂² = Σ_{|α|=k} ‖∂^α u‖₂²`, summed over multi-indices without
/// multinomial weights.
pub fn sobolev_norm(field: &ScalarField, k: usize) -> f64 {
    sobolev_seminorms(field.grid(), &field.coefficients(), k)[k]
}

/// `‖u‖²_{Hᵏ} = Σ_{j≤k} ‖∇ʲu‖₂²`.
pub fn hk_norm_sq(field: &ScalarField, k: usize) -> f64 {
    sobolev_seminorms(field.grid(), &field.coefficients(), k)
        .iter()
        .sum()
}

/// Trapezoidal L² inner product on the torus.
pub fn inner_product(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.check_same_grid(b)?;
    let u = a.values();
    let v = b.values();
    Ok(a.grid().cell_volume() * compensated_sum(u.len(), |i| u[i] * v[i]))
}

/// `‖a - b‖₂`.
pub fn l2_distance(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    Ok(sobolev_norm(&a.sub(b)?, 0).sqrt())
}

/// `‖u‖₂`.
pub fn l2_norm(u: &ScalarField) -> f64 {
    sobolev_norm(u, 0).sqrt()
}
