use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// A periodic tensor grid on the torus `[0, L)^n` with `N` points per axis.
///
/// Flat indices are row-major: axis 0 varies slowest. Along each axis the
/// FFT index `j` carries the integer wavenumber `j` for `j <= N/2` and
/// `j - N` otherwise, giving the lattice `{-N/2+1, ..., N/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    points: usize,
    length: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if points < 8 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and at least 8, got {points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive and finite, got {length}"
            )));
        }
        points
            .checked_pow(dim as u32)
            .filter(|&t| t <= 1 << 28)
            .ok_or_else(|| Error::InvalidGrid(format!("{points}^{dim} points is too large")))?;
        Ok(Self {
            dim,
            points,
            length,
        })
    }

    /// Grid on `[0, 2π)^n`.
    pub fn periodic(dim: usize, points: usize) -> Result<Self> {
        Self::new(dim, points, 2.0 * PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of grid points, `N^n`.
    pub fn total(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Factor converting integer wavenumbers to angular ones, `2π/L`.
    pub fn scale(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Measure of the torus, `L^n`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Quadrature weight of a single grid cell, `(L/N)^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn nyquist(&self) -> usize {
        self.points / 2
    }

    /// Integer wavenumber for FFT index `j` along any axis.
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j <= self.points / 2 {
            j as i64
        } else {
            j as i64 - self.points as i64
        }
    }

    /// Per-axis scaled wavenumbers used by first derivatives; the Nyquist
    /// entry is zero.
    pub fn derivative_wavenumbers(&self) -> Vec<f64> {
        let scale = self.scale();
        (0..self.points)
            .map(|j| {
                if j == self.nyquist() {
                    0.0
                } else {
                    self.wavenumber(j) as f64 * scale
                }
            })
            .collect()
    }

    /// Per-axis FFT indices of a flat index. Unused axes are zero.
    pub fn unflatten(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx[..self.dim]
            .iter()
            .fold(0, |acc, &j| acc * self.points + j)
    }

    /// Integer wavevector of a flat spectral index.
    pub fn mode(&self, flat: usize) -> [i64; MAX_DIM] {
        let idx = self.unflatten(flat);
        let mut xi = [0; MAX_DIM];
        for a in 0..self.dim {
            xi[a] = self.wavenumber(idx[a]);
        }
        xi
    }

    /// Flat index of the mode `-ξ`.
    pub fn negated(&self, flat: usize) -> usize {
        let mut idx = self.unflatten(flat);
        for j in idx.iter_mut().take(self.dim) {
            *j = (self.points - *j) % self.points;
        }
        self.flatten(&idx)
    }

    /// Flat spectral index of an integer wavevector, if representable.
    pub fn index_of(&self, xi: &[i64]) -> Option<usize> {
        let half = (self.points / 2) as i64;
        let mut idx = [0usize; MAX_DIM];
        for a in 0..self.dim {
            let k = xi.get(a).copied().unwrap_or(0);
            if k <= -half || k > half {
                return None;
            }
            idx[a] = k.rem_euclid(self.points as i64) as usize;
        }
        Some(self.flatten(&idx))
    }

    /// True if any axis of the mode sits on the Nyquist frequency.
    pub fn touches_nyquist(&self, flat: usize) -> bool {
        let idx = self.unflatten(flat);
        idx[..self.dim].iter().any(|&j| j == self.nyquist())
    }

    /// Physical coordinates of a flat grid index.
    pub fn coords(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * h;
        }
        x
    }

    /// Largest scaled wavenumber magnitude on the lattice, `sqrt(n)·(N/2)·2π/L`.
    pub fn max_wavenumber(&self) -> f64 {
        (self.dim as f64).sqrt() * self.nyquist() as f64 * self.scale()
    }

    /// Same dimension and period with a different resolution.
    pub fn with_points(&self, points: usize) -> Result<Self> {
        Self::new(self.dim, points, self.length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::periodic(0, 16).is_err());
        assert!(GridSpec::periodic(4, 16).is_err());
        assert!(GridSpec::periodic(1, 6).is_err());
        assert!(GridSpec::periodic(1, 15).is_err());
        assert!(GridSpec::new(1, 16, -1.0).is_err());
        assert!(GridSpec::new(1, 16, f64::NAN).is_err());
    }

    #[test]
    fn lattice_runs_from_minus_half_plus_one_to_half() {
        let g = GridSpec::periodic(1, 8).unwrap();
        let ks: Vec<i64> = (0..8).map(|j| g.wavenumber(j)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn flat_index_round_trip() {
        let g = GridSpec::periodic(3, 8).unwrap();
        for flat in 0..g.total() {
            assert_eq!(g.flatten(&g.unflatten(flat)), flat);
            assert_eq!(g.negated(g.negated(flat)), flat);
            let xi = g.mode(flat);
            assert_eq!(g.index_of(&xi), Some(flat));
        }
        assert_eq!(g.index_of(&[-4, 0, 0]), None);
    }

    #[test]
    fn nyquist_derivative_wavenumber_is_zero() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        let k = g.derivative_wavenumbers();
        assert_eq!(k[4], 0.0);
        assert!((k[1] - 2.0 * PI).abs() < 1e-15);
        assert!((k[7] + 2.0 * PI).abs() < 1e-15);
    }
}
