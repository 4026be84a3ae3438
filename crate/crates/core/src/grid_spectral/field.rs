use std::borrow::Cow;

use num_complex::Complex64;

use super::{transform, GridSpec};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Physical(Vec<f64>),
    Spectral(Vec<Complex64>),
}

/// A real-valued grid function held either as point samples or as the
/// coefficients of its trigonometric interpolant. The two views convert
/// freely; the spectral view is kept Hermitian so the physical view is real.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    repr: Repr,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            repr: Repr::Physical(vec![0.0; grid.total()]),
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.total() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.total(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            repr: Repr::Physical(values),
        })
    }

    /// Build from spectral coefficients. The caller is responsible for
    /// Hermitian symmetry; see [`ScalarField::hermitian_defect`].
    pub fn from_coefficients(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.total() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                grid.total(),
                coeffs.len()
            )));
        }
        Ok(Self {
            grid,
            repr: Repr::Spectral(coeffs),
        })
    }

    /// Sample `f` at the grid points.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let values = par::map_range(grid.total(), |i| {
            let x = grid.coords(i);
            f(&x[..grid.dim()])
        });
        Self {
            grid,
            repr: Repr::Physical(values),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.repr, Repr::Spectral(_))
    }

    /// Point samples, transforming if needed.
    pub fn values(&self) -> Cow<'_, [f64]> {
        match &self.repr {
            Repr::Physical(v) => Cow::Borrowed(v),
            Repr::Spectral(c) => Cow::Owned(transform::backward_real(&self.grid, c)),
        }
    }

    /// Spectral coefficients, transforming if needed.
    pub fn coefficients(&self) -> Cow<'_, [Complex64]> {
        match &self.repr {
            Repr::Spectral(c) => Cow::Borrowed(c),
            Repr::Physical(v) => Cow::Owned(transform::forward_real(&self.grid, v)),
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        match self.repr {
            Repr::Physical(v) => v,
            Repr::Spectral(c) => transform::backward_real(&self.grid, &c),
        }
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        match self.repr {
            Repr::Spectral(c) => c,
            Repr::Physical(v) => transform::forward_real(&self.grid, &v),
        }
    }

    /// The same function with its spectral view populated.
    pub fn to_spectral(&self) -> ScalarField {
        Self {
            grid: self.grid,
            repr: Repr::Spectral(self.coefficients().into_owned()),
        }
    }

    /// The same function with its physical view populated.
    pub fn to_physical(&self) -> ScalarField {
        Self {
            grid: self.grid,
            repr: Repr::Physical(self.values().into_owned()),
        }
    }

    /// Spatial mean, i.e. the zero-mode coefficient.
    pub fn mean(&self) -> f64 {
        match &self.repr {
            Repr::Spectral(c) => c[0].re,
            Repr::Physical(v) => {
                crate::summation::compensated_sum(v.len(), |i| v[i]) / v.len() as f64
            }
        }
    }

    /// `max |û(-ξ) - conj(û(ξ))|`; zero for exactly real fields.
    pub fn hermitian_defect(&self) -> f64 {
        let c = self.coefficients();
        (0..c.len())
            .map(|i| (c[self.grid.negated(i)] - c[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `self + alpha * other`, computed in spectral space when either
    /// operand is spectral.
    pub fn add_scaled(&self, alpha: f64, other: &ScalarField) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        if self.is_spectral() || other.is_spectral() {
            let a = self.coefficients();
            let b = other.coefficients();
            let out = a.iter().zip(b.iter()).map(|(x, y)| x + alpha * y).collect();
            Ok(Self {
                grid: self.grid,
                repr: Repr::Spectral(out),
            })
        } else {
            let a = self.values();
            let b = other.values();
            let out = a.iter().zip(b.iter()).map(|(x, y)| x + alpha * y).collect();
            Ok(Self {
                grid: self.grid,
                repr: Repr::Physical(out),
            })
        }
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.add_scaled(-1.0, other)
    }

    pub fn scaled(&self, alpha: f64) -> ScalarField {
        let repr = match &self.repr {
            Repr::Physical(v) => Repr::Physical(v.iter().map(|x| alpha * x).collect()),
            Repr::Spectral(c) => Repr::Spectral(c.iter().map(|x| alpha * x).collect()),
        };
        Self {
            grid: self.grid,
            repr,
        }
    }

    /// Trigonometric interpolation onto another resolution of the same torus.
    /// Modes absent from the target lattice are dropped, new modes are zero.
    /// Nyquist planes are not carried across, since their Hermitian partner
    /// changes with the resolution.
    pub fn resample(&self, target: GridSpec) -> Result<ScalarField> {
        if target.dim() != self.grid.dim() || target.length() != self.grid.length() {
            return Err(Error::GridMismatch);
        }
        if target == self.grid {
            return Ok(self.clone());
        }
        let src = self.coefficients();
        let mut out = vec![Complex64::default(); target.total()];
        for (i, c) in src.iter().enumerate() {
            if self.grid.touches_nyquist(i) {
                continue;
            }
            if let Some(j) = target.index_of(&self.grid.mode(i)) {
                if !target.touches_nyquist(j) {
                    out[j] = *c;
                }
            }
        }
        ScalarField::from_coefficients(target, out)
    }
}
