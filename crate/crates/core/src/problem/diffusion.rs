use std::f64::consts::PI;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_spectral::GridSpec;
use crate::par;

/// A symmetric matrix field `D(x)` sampled on a grid, together with its
/// certified ellipticity constant `θ = min_x λ_min(D(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionField {
    grid: GridSpec,
    /// `n*n` row-major entries per grid point.
    entries: Vec<f64>,
    theta: f64,
    sup_norm: f64,
}

impl DiffusionField {
    pub fn new(grid: GridSpec, entries: Vec<f64>) -> Result<Self> {
        let n = grid.dim();
        if entries.len() != grid.total() * n * n {
            return Err(Error::InvalidArgument(format!(
                "expected {} diffusion entries, got {}",
                grid.total() * n * n,
                entries.len()
            )));
        }
        let theta = ellipticity_theta_of(&grid, &entries)?;
        let sup_norm = par::map_range(grid.total(), |p| {
            let (_, hi) = eigen_range(&entries[p * n * n..(p + 1) * n * n], n);
            hi
        })
        .into_iter()
        .fold(0.0, f64::max);
        Ok(Self {
            grid,
            entries,
            theta,
            sup_norm,
        })
    }

    /// Sample `f(x)`, which writes the `n*n` row-major matrix into its
    /// second argument.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [f64]) + Sync + Send,
    {
        let n = grid.dim();
        let blocks = par::map_range(grid.total(), |p| {
            let x = grid.coords(p);
            let mut m = vec![0.0; n * n];
            f(&x[..n], &mut m);
            m
        });
        Self::new(grid, blocks.concat())
    }

    /// `D(x) = c·I`.
    pub fn isotropic(grid: GridSpec, c: f64) -> Result<Self> {
        let n = grid.dim();
        Self::from_fn(grid, |_, m| {
            for a in 0..n {
                m[a * n + a] = c;
            }
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `max_x λ_max(D(x))`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Row-major matrix at grid point `p`.
    pub fn at(&self, p: usize) -> &[f64] {
        let n2 = self.grid.dim() * self.grid.dim();
        &self.entries[p * n2..(p + 1) * n2]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `Some(c)` when `D(x) = c·I` at every grid point.
    pub fn isotropic_constant(&self) -> Option<f64> {
        let n = self.grid.dim();
        let c = self.entries[0];
        let tol = 1e-14 * c.abs().max(1.0);
        let ok = (0..self.grid.total()).all(|p| {
            let m = self.at(p);
            (0..n).all(|a| {
                (0..n).all(|b| {
                    let want = if a == b { c } else { 0.0 };
                    (m[a * n + b] - want).abs() <= tol
                })
            })
        });
        ok.then_some(c)
    }

    /// `Some(D)` when the field is spatially constant.
    pub fn constant_matrix(&self) -> Option<Vec<f64>> {
        let first = self.at(0);
        let tol = 1e-14 * self.sup_norm.max(1.0);
        (0..self.grid.total())
            .all(|p| self.at(p).iter().zip(first).all(|(a, b)| (a - b).abs() <= tol))
            .then(|| first.to_vec())
    }
}

/// Smallest and largest eigenvalue of a symmetric `n×n` matrix, `n ≤ 3`.
fn eigen_range(m: &[f64], n: usize) -> (f64, f64) {
    match n {
        1 => (m[0], m[0]),
        2 => {
            let (a, b, d) = (m[0], 0.5 * (m[1] + m[2]), m[3]);
            let mean = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            (mean - r, mean + r)
        }
        3 => {
            let mat = Matrix3::from_row_slice(m);
            let sym = 0.5 * (mat + mat.transpose());
            let ev = sym.symmetric_eigenvalues();
            (ev.min(), ev.max())
        }
        _ => unreachable!("dimension is validated by GridSpec"),
    }
}

fn ellipticity_theta_of(grid: &GridSpec, entries: &[f64]) -> Result<f64> {
    let n = grid.dim();
    let n2 = n * n;
    let mins = par::map_range(grid.total(), |p| {
        let m = &entries[p * n2..(p + 1) * n2];
        let scale = m.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(1e-300);
        for a in 0..n {
            for b in 0..a {
                if (m[a * n + b] - m[b * n + a]).abs() > 1e-13 * scale
                    || !m[a * n + b].is_finite()
                {
                    return Err(Error::NotSymmetric { point: p });
                }
            }
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotSymmetric { point: p });
        }
        Ok(eigen_range(m, n).0)
    });
    let mut theta = f64::INFINITY;
    let mut at = 0;
    for (p, r) in mins.into_iter().enumerate() {
        let lo = r?;
        if lo < theta {
            theta = lo;
            at = p;
        }
    }
    if theta > 0.0 {
        Ok(theta)
    } else {
        Err(Error::NotElliptic {
            min_eigenvalue: theta,
            point: at,
        })
    }
}

/// Certified ellipticity constant: the exact grid minimum of the smallest
/// eigenvalue of `D(x)`, with no safety margin.
pub fn ellipticity_theta(field: &DiffusionField) -> f64 {
    field.theta()
}

/// Stock diffusion fields, all analytic with closed-form `θ`. Angles are
/// `2π x / L`, so every model is periodic on the grid's torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiffusionModel {
    /// `D = I`.
    Identity,
    /// `D = c·I`.
    Isotropic { c: f64 },
    /// `D = diag(d_1, ..., d_n)`.
    Diagonal { diag: Vec<f64> },
    /// One-dimensional `d(x) = a + b·sin x`.
    Sinusoidal { a: f64, b: f64 },
    /// Two-dimensional `D(x) = (a + b·sin x₁ sin x₂)·I + c·v vᵀ` with
    /// `v = (cos x₂, sin x₁)`.
    Mixed { a: f64, b: f64, c: f64 },
}

impl DiffusionModel {
    pub const NAMES: [&'static str; 5] = ["identity", "isotropic", "diagonal", "sinusoidal", "mixed"];

    pub fn name(&self) -> &'static str {
        match self {
            DiffusionModel::Identity => "identity",
            DiffusionModel::Isotropic { .. } => "isotropic",
            DiffusionModel::Diagonal { .. } => "diagonal",
            DiffusionModel::Sinusoidal { .. } => "sinusoidal",
            DiffusionModel::Mixed { .. } => "mixed",
        }
    }

    /// Check parameters against a spatial dimension; returns the offending
    /// parameter name and message.
    pub fn validate(&self, dim: usize) -> std::result::Result<(), (&'static str, String)> {
        match self {
            DiffusionModel::Identity => Ok(()),
            DiffusionModel::Isotropic { c } if *c > 0.0 && c.is_finite() => Ok(()),
            DiffusionModel::Isotropic { c } => Err(("c", format!("must be positive, got {c}"))),
            DiffusionModel::Diagonal { diag } => {
                if diag.len() != dim {
                    Err(("diag", format!("needs {dim} entries, got {}", diag.len())))
                } else if diag.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
                    Err(("diag", "entries must be positive".into()))
                } else {
                    Ok(())
                }
            }
            DiffusionModel::Sinusoidal { a, b } => {
                if dim != 1 {
                    Err(("kind", format!("sinusoidal diffusion is one-dimensional, grid has n = {dim}")))
                } else if !(a - b.abs() > 0.0) {
                    Err(("a", format!("a - |b| must be positive, got {}", a - b.abs())))
                } else {
                    Ok(())
                }
            }
            DiffusionModel::Mixed { a, b, c } => {
                if dim != 2 {
                    Err(("kind", format!("mixed diffusion is two-dimensional, grid has n = {dim}")))
                } else if *c < 0.0 {
                    Err(("c", format!("rank-one weight must be nonnegative, got {c}")))
                } else if !(a - b.abs() > 0.0) {
                    Err(("a", format!("a - |b| must be positive, got {}", a - b.abs())))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Infimum of `λ_min(D(x))` over the continuum torus.
    pub fn closed_form_theta(&self) -> f64 {
        match self {
            DiffusionModel::Identity => 1.0,
            DiffusionModel::Isotropic { c } => *c,
            DiffusionModel::Diagonal { diag } => diag.iter().copied().fold(f64::INFINITY, f64::min),
            DiffusionModel::Sinusoidal { a, b } | DiffusionModel::Mixed { a, b, .. } => a - b.abs(),
        }
    }

    /// Write `D(x)` (row-major) for a point with angles `2π x / L`.
    pub fn eval(&self, angles: &[f64], out: &mut [f64]) {
        let n = angles.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        match self {
            DiffusionModel::Identity => (0..n).for_each(|a| out[a * n + a] = 1.0),
            DiffusionModel::Isotropic { c } => (0..n).for_each(|a| out[a * n + a] = *c),
            DiffusionModel::Diagonal { diag } => (0..n).for_each(|a| out[a * n + a] = diag[a]),
            DiffusionModel::Sinusoidal { a, b } => out[0] = a + b * angles[0].sin(),
            DiffusionModel::Mixed { a, b, c } => {
                let s = a + b * angles[0].sin() * angles[1].sin();
                let v = [angles[1].cos(), angles[0].sin()];
                for i in 0..2 {
                    for j in 0..2 {
                        out[i * 2 + j] = c * v[i] * v[j] + if i == j { s } else { 0.0 };
                    }
                }
            }
        }
    }

    /// Sample on `grid`.
    pub fn build(&self, grid: GridSpec) -> Result<DiffusionField> {
        self.validate(grid.dim())
            .map_err(|(field, message)| Error::validation(format!("diffusion.{field}"), message))?;
        let to_angle = 2.0 * PI / grid.length();
        DiffusionField::from_fn(grid, |x, m| {
            let mut angles = [0.0; 3];
            for (t, xi) in angles.iter_mut().zip(x) {
                *t = xi * to_angle;
            }
            self.eval(&angles[..x.len()], m)
        })
    }

    pub fn is_constant(&self) -> bool {
        !matches!(
            self,
            DiffusionModel::Sinusoidal { .. } | DiffusionModel::Mixed { .. }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_of_identity_and_diagonal() {
        let g2 = GridSpec::periodic(2, 8).unwrap();
        let id = DiffusionModel::Identity.build(g2).unwrap();
        assert_eq!(ellipticity_theta(&id), 1.0);
        let diag = DiffusionModel::Diagonal {
            diag: vec![2.0, 3.0],
        }
        .build(g2)
        .unwrap();
        assert_eq!(diag.theta(), 2.0);
        assert_eq!(diag.sup_norm(), 3.0);
    }

    #[test]
    fn theta_of_sinusoidal_is_grid_minimum() {
        // 64 points include x = 3π/2, where sin x = -1
        let g = GridSpec::periodic(1, 64).unwrap();
        let d = DiffusionModel::Sinusoidal { a: 1.5, b: 1.0 }.build(g).unwrap();
        assert!((d.theta() - 0.5).abs() < 1e-15);
        assert!((d.sup_norm() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn theta_is_stable_under_refinement() {
        for (model, dim) in [
            (DiffusionModel::Sinusoidal { a: 1.5, b: 1.0 }, 1),
            (DiffusionModel::Mixed { a: 2.0, b: 0.8, c: 0.5 }, 2),
            (DiffusionModel::Identity, 3),
        ] {
            for n in [8, 16, 32] {
                let coarse = model.build(GridSpec::periodic(dim, n).unwrap()).unwrap();
                let fine = model.build(GridSpec::periodic(dim, 2 * n).unwrap()).unwrap();
                let rel = (coarse.theta() - fine.theta()).abs() / fine.theta();
                assert!(rel <= 0.05, "{model:?} N={n}: {rel}");
            }
        }
    }

    #[test]
    fn mixed_theta_matches_closed_form() {
        let model = DiffusionModel::Mixed { a: 2.0, b: 0.8, c: 0.5 };
        let d = model.build(GridSpec::periodic(2, 16).unwrap()).unwrap();
        assert!((d.theta() - model.closed_form_theta()).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_elliptic_and_asymmetric() {
        let g = GridSpec::periodic(1, 16).unwrap();
        let err = DiffusionField::from_fn(g, |x, m| m[0] = x[0].sin()).unwrap_err();
        assert!(matches!(err, Error::NotElliptic { .. }));
        let g2 = GridSpec::periodic(2, 8).unwrap();
        let err = DiffusionField::from_fn(g2, |_, m| m.copy_from_slice(&[2.0, 0.5, 0.0, 2.0]))
            .unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
    }

    #[test]
    fn three_dimensional_eigenvalues() {
        let g = GridSpec::periodic(3, 8).unwrap();
        let d = DiffusionField::from_fn(g, |_, m| {
            m.copy_from_slice(&[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0])
        })
        .unwrap();
        assert!((d.theta() - 1.0).abs() < 1e-12);
        assert!((d.sup_norm() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn isotropic_detection() {
        let g = GridSpec::periodic(2, 8).unwrap();
        assert_eq!(DiffusionField::isotropic(g, 0.7).unwrap().isotropic_constant(), Some(0.7));
        let d = DiffusionModel::Diagonal { diag: vec![1.0, 2.0] }.build(g).unwrap();
        assert_eq!(d.isotropic_constant(), None);
        assert!(d.constant_matrix().is_some());
    }
}
