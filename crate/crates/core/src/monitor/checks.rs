use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::NormSeries;
use crate::error::{Error, Result};
use crate::evolution::{solve_with_safety, DivergenceForm, Method, Trajectory};
use crate::galerkin::{project, TrigBasis};
use crate::grid_spectral::{l2_distance, l2_norm, sobolev_norm, ScalarField};
use crate::problem::ProblemSpec;
use crate::summation::NeumaierSum;

/// Three-point derivative weights at the middle of `t0 < t1 < t2`.
fn stencil(t0: f64, t1: f64, t2: f64) -> [f64; 3] {
    let h1 = t1 - t0;
    let h2 = t2 - t1;
    [
        -h2 / (h1 * (h1 + h2)),
        (h2 - h1) / (h1 * h2),
        h1 / (h2 * (h1 + h2)),
    ]
}

/// Relative defect treated as satisfied when checking `C = 0`.
pub const DISSIPATION_TOLERANCE: f64 = 1e-8;

/// One energy inequality
/// `½ d/dt ‖∇ᵏu‖₂² ≤ −c_k θ‖∇ᵏ⁺¹u‖₂² + C(‖f‖²_{Hᵏ} + ‖u‖²_{Hᵏ})`
/// with `c_0 = 1` and `c_k = ½` for `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipationOrder {
    pub k: usize,
    /// Smallest `C ≥ 0` making every interior sample feasible.
    pub fitted_c: f64,
    /// Largest violation with `C = 0`, relative to
    /// `|½ d/dt‖∇ᵏu‖²| + c_k θ‖∇ᵏ⁺¹u‖²`.
    pub defect_at_zero: f64,
    pub feasible_with_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipationReport {
    pub orders: Vec<DissipationOrder>,
    pub max_defect_at_zero: f64,
}

/// Check the energy inequalities for `k = 0..m−1` using centred
/// nonuniform differences of the sampled seminorms.
pub fn check_dissipation(series: &NormSeries) -> Result<DissipationReport> {
    if series.len() < 3 {
        return Err(Error::InvalidArgument(
            "dissipation check needs at least three samples".into(),
        ));
    }
    if series.order() < 1 {
        return Err(Error::InvalidArgument(
            "dissipation check needs seminorms up to order 1".into(),
        ));
    }
    let theta = series.theta;
    let t = &series.times;
    let orders = (0..series.order())
        .map(|k| {
            let weight = if k == 0 { 1.0 } else { 0.5 };
            let forcing = series.data.forcing_hk_sq[k.max(1)];
            let mut fitted: f64 = 0.0;
            let mut defect: f64 = 0.0;
            for j in 1..series.len() - 1 {
                let w = stencil(t[j - 1], t[j], t[j + 1]);
                let y = &series.norms[k];
                let half_rate = 0.5 * (w[0] * y[j - 1] + w[1] * y[j] + w[2] * y[j + 1]);
                let dissipation = weight * theta * series.norms[k + 1][j];
                let excess = half_rate + dissipation;
                let data = forcing + series.hk_sq(k, j);
                if excess > 0.0 {
                    fitted = fitted.max(if data > 0.0 { excess / data } else { f64::INFINITY });
                }
                let scale = half_rate.abs() + dissipation;
                if scale > 0.0 {
                    defect = defect.max(excess / scale);
                }
            }
            DissipationOrder {
                k,
                fitted_c: fitted,
                defect_at_zero: defect.max(0.0),
                feasible_with_zero: defect <= DISSIPATION_TOLERANCE,
            }
        })
        .collect::<Vec<_>>();
    let max_defect_at_zero = orders.iter().map(|o| o.defect_at_zero).fold(0.0, f64::max);
    Ok(DissipationReport {
        orders,
        max_defect_at_zero,
    })
}

/// Largest constant the Gronwall search will try.
pub const GRONWALL_MAX_C: f64 = 1e3;
/// Bisection stops once the bracket is narrower than this.
pub const GRONWALL_TOLERANCE: f64 = 1e-7;

/// Least `C ≥ 0` with `g(t_j) ≤ e^{C t_j}(g(0) + b) − b` for every sample.
pub fn check_gronwall(times: &[f64], values: &[f64], initial: f64, b: f64) -> Result<f64> {
    let scale = values
        .iter()
        .fold(initial.abs() + b.abs(), |s, v| s.max(v.abs()));
    let slack = 1e-12 * scale;
    let feasible = |c: f64| {
        times
            .iter()
            .zip(values)
            .all(|(&t, &v)| v <= (c * t).exp() * (initial + b) - b + slack)
    };
    if feasible(0.0) {
        return Ok(0.0);
    }
    if !feasible(GRONWALL_MAX_C) {
        return Err(Error::Infeasible {
            max_c: GRONWALL_MAX_C,
        });
    }
    let (mut lo, mut hi) = (0.0, GRONWALL_MAX_C);
    while hi - lo > GRONWALL_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

impl super::EnergySeries {
    /// Gronwall constant for `M₁` with data constant `b`.
    pub fn gronwall_m1(&self, b: f64) -> Result<f64> {
        check_gronwall(&self.times, &self.m1, self.initial, b)
    }

    /// Gronwall constant for `M` with data constant `b`.
    pub fn gronwall_mm(&self, b: f64) -> Result<f64> {
        check_gronwall(&self.times, &self.mm, self.initial, b)
    }
}

/// `‖u(t+s) − u(t)‖₂` and `‖∇u(t+s) − ∇u(t)‖₂` for each shift, with the
/// ratios between consecutive shifts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub time: f64,
    pub shifts: Vec<f64>,
    pub l2_defects: Vec<f64>,
    pub h1_defects: Vec<f64>,
    pub l2_ratios: Vec<f64>,
    pub h1_ratios: Vec<f64>,
}

pub fn check_continuity(
    problem: &Arc<ProblemSpec>,
    t: f64,
    shifts: &[f64],
    method: Method,
    safety: f64,
) -> Result<ContinuityReport> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("continuity time must be positive, got {t}")));
    }
    if shifts.iter().any(|&s| !(s >= 0.0) || t + s > problem.horizon * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(
            "shifts must be nonnegative and keep t + s within the horizon".into(),
        ));
    }
    let mut times: Vec<f64> = std::iter::once(t)
        .chain(shifts.iter().filter(|&&s| s > 0.0).map(|&s| t + s))
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let traj = solve_with_safety(problem, &times, method, safety)?;
    let at = |time: f64| -> &ScalarField {
        let j = traj.times().iter().position(|&x| x == time).unwrap();
        &traj.states()[j]
    };
    let base = at(t);
    let mut l2 = Vec::with_capacity(shifts.len());
    let mut h1 = Vec::with_capacity(shifts.len());
    for &s in shifts {
        if s == 0.0 {
            l2.push(0.0);
            h1.push(0.0);
            continue;
        }
        let diff = at(t + s).sub(base)?;
        l2.push(l2_norm(&diff));
        h1.push(sobolev_norm(&diff, 1).sqrt());
    }
    let ratios = |d: &[f64]| -> Vec<f64> {
        d.windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::NAN })
            .collect()
    };
    Ok(ContinuityReport {
        time: t,
        shifts: shifts.to_vec(),
        l2_ratios: ratios(&l2),
        h1_ratios: ratios(&h1),
        l2_defects: l2,
        h1_defects: h1,
    })
}

/// Difference between two solutions that share `D` and `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub times: Vec<f64>,
    pub defects: Vec<f64>,
    pub initial_defect: f64,
    /// Gronwall constant of `‖u − ũ‖₂²` with zero data constant.
    pub c_hat: f64,
    pub nonincreasing: bool,
    /// `‖u(t) − ũ(t)‖₂ ≤ ‖u₀ − ũ₀‖₂` at every sample (relative 10⁻¹²).
    pub bounded_by_initial: bool,
}

pub fn check_uniqueness_stability(
    problem: &Arc<ProblemSpec>,
    perturbed_initial: &ScalarField,
    times: &[f64],
    method: Method,
    safety: f64,
) -> Result<UniquenessReport> {
    let other = Arc::new(problem.with_initial(perturbed_initial.clone())?);
    let a = solve_with_safety(problem, times, method, safety)?;
    let b = solve_with_safety(&other, times, method, safety)?;
    let defects = a
        .states()
        .iter()
        .zip(b.states())
        .map(|(x, y)| l2_distance(x, y))
        .collect::<Result<Vec<_>>>()?;
    let initial_defect = l2_distance(&problem.initial, perturbed_initial)?;
    let tol = 1e-12;
    let nonincreasing = std::iter::once(initial_defect)
        .chain(defects.iter().copied())
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + tol) + 1e-300);
    let bounded_by_initial = defects
        .iter()
        .all(|&d| d <= initial_defect * (1.0 + tol) + 1e-300);
    let squared: Vec<f64> = defects.iter().map(|d| d * d).collect();
    let c_hat = check_gronwall(times, &squared, initial_defect * initial_defect, 0.0)?;
    Ok(UniquenessReport {
        times: times.to_vec(),
        defects,
        initial_defect,
        c_hat,
        nonincreasing,
        bounded_by_initial,
    })
}

/// Largest weak-form residual
/// `|⟨∂ₜu, w⟩ + ⟨D∇u, ∇w⟩ − ⟨f, w⟩| / (‖u₀‖₂ + ‖f‖₂)` over the first
/// `test_modes` basis functions and all interior samples.
pub fn residual_weak_form(trajectory: &Trajectory, test_modes: usize) -> Result<f64> {
    if trajectory.len() < 3 {
        return Err(Error::InvalidArgument(
            "weak residual needs at least three samples".into(),
        ));
    }
    let problem = trajectory.problem();
    let grid = *problem.grid();
    let n = grid.dim();
    let basis = TrigBasis::new(n, grid.length(), test_modes);
    let op = DivergenceForm::new(&problem.diffusion);
    let load = project(&basis, &problem.forcing);
    let coeffs: Vec<_> = trajectory.states().iter().map(|u| project(&basis, u)).collect();
    // ⟨D∇u, ∇w_i⟩ by grid quadrature
    let stiffness_terms = |u: &ScalarField| -> Vec<f64> {
        let flux = op.flux(&u.coefficients());
        let mut g = vec![0.0; n];
        (0..basis.len())
            .map(|i| {
                let mut acc = NeumaierSum::new();
                for p in 0..grid.total() {
                    let x = grid.coords(p);
                    basis.gradient(i, &x[..n], &mut g);
                    for a in 0..n {
                        acc.add(flux[a][p] * g[a]);
                    }
                }
                grid.cell_volume() * acc.value()
            })
            .collect()
    };
    let t = trajectory.times();
    let mut worst: f64 = 0.0;
    for j in 1..trajectory.len() - 1 {
        let w = stencil(t[j - 1], t[j], t[j + 1]);
        let a = stiffness_terms(&trajectory.states()[j]);
        for i in 0..basis.len() {
            let dt = w[0] * coeffs[j - 1][i] + w[1] * coeffs[j][i] + w[2] * coeffs[j + 1][i];
            worst = worst.max((dt + a[i] - load[i]).abs());
        }
    }
    let scale = l2_norm(&problem.initial) + l2_norm(&problem.forcing);
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// The same states in a seeded random order (never the identity); a
/// negative control for the weak residual.
pub fn shuffled_control(trajectory: &Trajectory, seed: u64) -> Result<Trajectory> {
    let len = trajectory.len();
    let mut order: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    if len > 1 && order.iter().enumerate().all(|(i, &o)| i == o) {
        order.rotate_left(1);
    }
    let states = order.iter().map(|&i| trajectory.states()[i].clone()).collect();
    Trajectory::from_states(
        Arc::clone(trajectory.problem()),
        trajectory.times().to_vec(),
        states,
        trajectory.stats().clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_is_exact_for_quadratics() {
        let (t0, t1, t2) = (0.1, 0.25, 0.7);
        let w = stencil(t0, t1, t2);
        let f = |t: f64| 3.0 * t * t - 2.0 * t + 1.0;
        let d = w[0] * f(t0) + w[1] * f(t1) + w[2] * f(t2);
        assert!((d - (6.0 * t1 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn gronwall_examples() {
        let t: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let flat = vec![1.0; t.len()];
        assert_eq!(check_gronwall(&t, &flat, 1.0, 0.0).unwrap(), 0.0);
        let grow: Vec<f64> = t.iter().map(|t| 2.0 * (2.0 * t).exp()).collect();
        let c = check_gronwall(&t, &grow, 2.0, 0.0).unwrap();
        assert!((c - 2.0).abs() < 1e-6);
        let decay: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        assert_eq!(check_gronwall(&t, &decay, 1.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn gronwall_infeasible_when_series_jumps_from_zero() {
        let t = vec![0.1, 0.2];
        assert!(matches!(
            check_gronwall(&t, &[1.0, 1.0], 0.0, 0.0),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn gronwall_with_data_constant() {
        // g' = C(g + b) exactly: g = e^{Ct}(g0 + b) − b
        let (c, g0, b) = (0.7, 0.3, 2.0);
        let t: Vec<f64> = (1..=10).map(|i| i as f64 * 0.1).collect();
        let g: Vec<f64> = t.iter().map(|t| (c * t).exp() * (g0 + b) - b).collect();
        assert!((check_gronwall(&t, &g, g0, b).unwrap() - c).abs() < 1e-6);
    }
}
