//! Dense Galerkin oracle: project onto a truncated orthonormal Fourier basis,
//! assemble the stiffness matrix by quadrature, and solve the resulting
//! constant-coefficient linear ODE system exactly through a symmetric
//! eigendecomposition. Shares no kernels with the pseudospectral solver.

mod basis;
mod heat;

pub use basis::{BasisFunction, Parity, TrigBasis};
pub use heat::heat_exact;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid_spectral::{GridSpec, ScalarField};
use crate::par;
use crate::problem::{DiffusionField, ProblemSpec};

/// Dense storage limit.
pub const MAX_MODES: usize = 4096;

/// `c′ = −A c + F`, `c(0) = c₀` in an orthonormal basis `{w_j}` with
/// `A_jk = ⟨D∇w_k, ∇w_j⟩`, `F_j = ⟨f, w_j⟩`, `c₀_j = ⟨u₀, w_j⟩`.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub basis: TrigBasis,
    pub stiffness: DMatrix<f64>,
    pub load: DVector<f64>,
    pub initial: DVector<f64>,
    /// Grid the stiffness quadrature ran on.
    pub quadrature_grid: GridSpec,
    pub theta: f64,
}

/// Quadrature points per axis for a basis whose largest wavenumber
/// component is `k`: twice the number of retained modes per axis.
fn quadrature_points(k: i64) -> usize {
    (4 * k as usize + 4).max(8)
}

/// Resample each entry of `D` onto a finer grid by trigonometric
/// interpolation.
fn resample_diffusion(d: &DiffusionField, target: GridSpec) -> Result<DiffusionField> {
    let grid = *d.grid();
    let n = grid.dim();
    let mut entries = vec![0.0; target.total() * n * n];
    for a in 0..n {
        for b in 0..n {
            let comp: Vec<f64> = (0..grid.total()).map(|p| d.at(p)[a * n + b]).collect();
            let fine = ScalarField::from_values(grid, comp)?.resample(target)?;
            for (p, v) in fine.values().iter().enumerate() {
                entries[p * n * n + a * n + b] = *v;
            }
        }
    }
    DiffusionField::new(target, entries)
}

/// `⟨u, w_j⟩` for every basis function, by grid quadrature.
pub fn project(basis: &TrigBasis, u: &ScalarField) -> DVector<f64> {
    let grid = *u.grid();
    let values = u.values();
    let w = grid.cell_volume();
    let rows = par::map_range(basis.len(), |j| {
        let mut acc = crate::summation::NeumaierSum::new();
        for (p, v) in values.iter().enumerate() {
            let x = grid.coords(p);
            acc.add(v * basis.value(j, &x[..grid.dim()]));
        }
        w * acc.value()
    });
    DVector::from_vec(rows)
}

/// `Σ_j c_j w_j` sampled on `grid`.
pub fn reconstruct(basis: &TrigBasis, coeffs: &DVector<f64>, grid: GridSpec) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * basis.value(j, x))
            .sum()
    })
}

/// Assemble the Galerkin system with `m` basis functions.
pub fn assemble_system(problem: &ProblemSpec, m: usize) -> Result<GalerkinSystem> {
    let grid = *problem.grid();
    let available = TrigBasis::capacity(&grid).min(MAX_MODES);
    if m == 0 || m > available {
        return Err(Error::TooManyModes {
            requested: m,
            available,
        });
    }
    let basis = TrigBasis::new(grid.dim(), grid.length(), m);
    let needed = quadrature_points(basis.max_component());
    let diffusion = if grid.points() >= needed {
        problem.diffusion.clone()
    } else {
        resample_diffusion(&problem.diffusion, grid.with_points(needed)?)?
    };
    let qgrid = *diffusion.grid();
    let n = qgrid.dim();
    let npts = qgrid.total();

    // ∇w_j at every quadrature point, point-major per function
    let grads: Vec<Vec<f64>> = par::map_range(m, |j| {
        let mut g = vec![0.0; npts * n];
        for p in 0..npts {
            let x = qgrid.coords(p);
            basis.gradient(j, &x[..n], &mut g[p * n..(p + 1) * n]);
        }
        g
    });
    let cell = qgrid.cell_volume();
    let rows: Vec<Vec<f64>> = par::map_range(m, |j| {
        // flux_j = D ∇w_j
        let mut flux = vec![0.0; npts * n];
        for p in 0..npts {
            let d = diffusion.at(p);
            for a in 0..n {
                flux[p * n + a] = (0..n).map(|b| d[a * n + b] * grads[j][p * n + b]).sum();
            }
        }
        (j..m)
            .map(|k| {
                let s = crate::summation::compensated_sum(npts * n, |i| flux[i] * grads[k][i]);
                cell * s
            })
            .collect()
    });
    let mut stiffness = DMatrix::zeros(m, m);
    for (j, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            stiffness[(j, j + off)] = v;
            stiffness[(j + off, j)] = v;
        }
    }
    Ok(GalerkinSystem {
        load: project(&basis, &problem.forcing),
        initial: project(&basis, &problem.initial),
        basis,
        stiffness,
        quadrature_grid: qgrid,
        theta: problem.theta(),
    })
}

impl GalerkinSystem {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    /// Reconstruct `u_m = Σ c_j w_j` on a grid.
    pub fn field(&self, coeffs: &DVector<f64>, grid: GridSpec) -> ScalarField {
        reconstruct(&self.basis, coeffs, grid)
    }
}

/// `c(t) = e^{−At}c₀ + t·φ₁(−At)F` via `A = QΛQᵀ`.
pub fn solve_dense(system: &GalerkinSystem, sample_times: &[f64]) -> Vec<DVector<f64>> {
    let eig = SymmetricEigen::new(system.stiffness.clone());
    let q = &eig.eigenvectors;
    let c0 = q.transpose() * &system.initial;
    let f = q.transpose() * &system.load;
    sample_times
        .iter()
        .map(|&t| {
            let modal = DVector::from_iterator(
                c0.len(),
                eig.eigenvalues.iter().enumerate().map(|(i, &lam)| {
                    let z = -lam * t;
                    let decay = z.exp();
                    // t·φ₁(z) = t·(eᶻ − 1)/z, with the z → 0 limit t
                    let integral = if z.abs() < 1e-8 {
                        t * (1.0 + 0.5 * z)
                    } else {
                        t * z.exp_m1() / z
                    };
                    decay * c0[i] + integral * f[i]
                }),
            );
            q * modal
        })
        .collect()
}
