use serde::Serialize;

use super::rates::linear_fit;
use crate::grid_spectral::ScalarField;

/// Shell-averaged spectral amplitude of one state.
///
/// Shell `r` collects the modes with `r − ½ ≤ |ξ| < r + ½` (lattice units),
/// Nyquist modes excluded; `mean_abs[r]` is the average of `|û(ξ)|` over it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub radii: Vec<usize>,
    pub mean_abs: Vec<f64>,
    pub counts: Vec<usize>,
    /// Slope `a` of `log mean ≈ b − a r²` over nonzero shells `r ≥ 1`;
    /// for a heat evolution from smooth data it grows like `θt`.
    pub gaussian_rate: f64,
    /// Slope of `log mean` against `log r` over nonzero shells `r ≥ 1`;
    /// `−s` for rough data with decay `s`.
    pub power_law_exponent: f64,
}

impl DecayProfile {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

pub fn spectral_decay_profile(state: &ScalarField) -> DecayProfile {
    let grid = *state.grid();
    let n = grid.dim();
    let shells = grid.nyquist();
    let mut sum = vec![0.0; shells];
    let mut counts = vec![0usize; shells];
    let coeffs = state.coefficients();
    for (p, c) in coeffs.iter().enumerate() {
        if grid.touches_nyquist(p) {
            continue;
        }
        let xi = grid.mode(p);
        let r = xi[..n].iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt().round() as usize;
        if r < shells {
            sum[r] += c.norm();
            counts[r] += 1;
        }
    }
    let mean_abs: Vec<f64> = sum
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let usable: Vec<(f64, f64)> = mean_abs
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &m)| m > 0.0)
        .map(|(r, &m)| (r as f64, m.ln()))
        .collect();
    let fit = |x: &dyn Fn(f64) -> f64| {
        if usable.len() < 2 {
            return 0.0;
        }
        let xs: Vec<f64> = usable.iter().map(|&(r, _)| x(r)).collect();
        let ys: Vec<f64> = usable.iter().map(|&(_, y)| y).collect();
        linear_fit(&xs, &ys).0
    };
    DecayProfile {
        radii: (0..shells).collect(),
        gaussian_rate: -fit(&|r| r * r),
        power_law_exponent: fit(&|r| r.ln()),
        mean_abs,
        counts,
    }
}

/// Ordering of a later profile against an earlier one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileComparison {
    /// First shell from which the later profile never exceeds the earlier.
    pub crossover: usize,
    pub passed: bool,
}

/// Relative slack when comparing shell averages.
pub const DOMINANCE_TOLERANCE: f64 = 1e-12;
/// Shells below this fraction of the earlier profile's peak are roundoff.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// `passed` when the later profile is dominated, up to roundoff, from a
/// crossover in the lower half of the shells onwards.
pub fn compare_profiles(earlier: &DecayProfile, later: &DecayProfile) -> ProfileComparison {
    let len = earlier.len().min(later.len());
    let peak = earlier.mean_abs.iter().copied().fold(0.0, f64::max);
    let floor = ROUNDOFF_FLOOR * peak + f64::MIN_POSITIVE;
    let dominated =
        |r: usize| later.mean_abs[r] <= earlier.mean_abs[r] * (1.0 + DOMINANCE_TOLERANCE) + floor;
    let crossover = (0..len).rev().find(|&r| !dominated(r)).map_or(0, |r| r + 1);
    ProfileComparison {
        crossover,
        passed: crossover <= len / 2,
    }
}
