use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::grid_spectral::{sobolev_seminorms, MAX_ORDER};
use crate::par;

/// Squared data norms attached to a series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataNorms {
    /// `‖u₀‖₂²`.
    pub initial_l2_sq: f64,
    /// `‖f‖²_{Hᵏ}` for `k = 0..=m`.
    pub forcing_hk_sq: Vec<f64>,
}

impl DataNorms {
    /// `‖u₀‖₂² + ‖f‖²_{Hᵏ}`, the data constant in the smoothing bound.
    pub fn smoothing_denominator(&self, k: usize) -> f64 {
        self.initial_l2_sq + self.forcing_hk_sq[k.min(self.forcing_hk_sq.len() - 1)]
    }
}

/// `‖∇ᵏu(t_j)‖₂²` for `k = 0..=m` at every sample time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSeries {
    pub times: Vec<f64>,
    /// `norms[k][j] = ‖∇ᵏu(t_j)‖₂²`.
    pub norms: Vec<Vec<f64>>,
    pub theta: f64,
    /// `‖∇ᵏu₀‖₂²`, recorded separately since `t = 0` is never sampled.
    pub initial_norms: Vec<f64>,
    pub data: DataNorms,
}

impl NormSeries {
    pub fn order(&self) -> usize {
        self.norms.len() - 1
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `‖u(t_j)‖²_{Hᵏ}`.
    pub fn hk_sq(&self, k: usize, j: usize) -> f64 {
        (0..=k).map(|i| self.norms[i][j]).sum()
    }
}

/// Seminorms `k = 0..=m` along a trajectory.
pub fn norm_series(trajectory: &Trajectory, m: usize) -> Result<NormSeries> {
    if m > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "norm order {m} exceeds {MAX_ORDER}"
        )));
    }
    let grid = *trajectory.problem().grid();
    let per_state = par::map(trajectory.states(), |u| {
        sobolev_seminorms(&grid, &u.coefficients(), m)
    });
    let mut norms = vec![Vec::with_capacity(per_state.len()); m + 1];
    for row in per_state {
        for (k, v) in row.into_iter().enumerate() {
            norms[k].push(v);
        }
    }
    let p = trajectory.problem();
    let initial_norms = sobolev_seminorms(&grid, &p.initial.coefficients(), m);
    let forcing = sobolev_seminorms(&grid, &p.forcing.coefficients(), m);
    let forcing_hk_sq = forcing
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    Ok(NormSeries {
        times: trajectory.times().to_vec(),
        norms,
        theta: p.theta(),
        data: DataNorms {
            initial_l2_sq: initial_norms[0],
            forcing_hk_sq,
        },
        initial_norms,
    })
}

/// Energy weights `(θt)ᵏ/(2ᵏk!)`, `k = 0..=m`, by the recurrence
/// `w_k = w_{k−1}·θt/(2k)`.
pub fn energy_weights(theta: f64, t: f64, m: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(m + 1);
    let mut cur = 1.0;
    w.push(cur);
    for k in 1..=m {
        cur *= theta * t / (2.0 * k as f64);
        w.push(cur);
    }
    w
}

/// `M₁(t) = ‖u‖₂² + (θt/2)‖∇u‖₂²` and `M(t) = Σ_{k≤m} (θt)ᵏ/(2ᵏk!)‖∇ᵏu‖₂²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySeries {
    pub times: Vec<f64>,
    pub m1: Vec<f64>,
    pub mm: Vec<f64>,
    pub order: usize,
    /// `M₁(0) = M(0) = ‖u₀‖₂²`.
    pub initial: f64,
}

pub fn energy_series(series: &NormSeries) -> EnergySeries {
    let m = series.order();
    let mut m1 = Vec::with_capacity(series.len());
    let mut mm = Vec::with_capacity(series.len());
    for (j, &t) in series.times.iter().enumerate() {
        let w = energy_weights(series.theta, t, m);
        let first = series.norms[0][j]
            + if m >= 1 {
                w[1] * series.norms[1][j]
            } else {
                0.0
            };
        m1.push(first);
        mm.push((0..=m).map(|k| w[k] * series.norms[k][j]).sum());
    }
    EnergySeries {
        times: series.times.clone(),
        m1,
        mm,
        order: m,
        initial: series.data.initial_l2_sq,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(times: Vec<f64>, norms: Vec<Vec<f64>>, theta: f64) -> NormSeries {
        let m = norms.len() - 1;
        NormSeries {
            times,
            norms,
            theta,
            initial_norms: vec![1.0; m + 1],
            data: DataNorms {
                initial_l2_sq: 1.0,
                forcing_hk_sq: vec![0.0; m + 1],
            },
        }
    }

    #[test]
    fn m1_direct_evaluation() {
        let s = series(vec![0.5], vec![vec![1.0], vec![4.0]], 2.0);
        let e = energy_series(&s);
        assert_eq!(e.m1, vec![3.0]);
        assert_eq!(e.mm, vec![3.0]);
    }

    #[test]
    fn weights_at_theta_t_two() {
        assert_eq!(energy_weights(2.0, 1.0, 2), vec![1.0, 1.0, 0.5]);
    }

    #[test]
    fn zero_norms_give_zero_energy() {
        let s = series(vec![0.1, 0.2], vec![vec![0.0; 2]; 4], 1.0);
        let e = energy_series(&s);
        assert!(e.m1.iter().chain(&e.mm).all(|&v| v == 0.0));
    }

    #[test]
    fn order_zero_series_has_only_l2() {
        let s = series(vec![0.1], vec![vec![2.0]], 1.0);
        let e = energy_series(&s);
        assert_eq!(e.m1, vec![2.0]);
        assert_eq!(e.order, 0);
    }
}
