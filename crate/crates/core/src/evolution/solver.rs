use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{cfl_step_size, DivergenceForm};
use super::phi::phi_functions;
use crate::error::{Error, Result};
use crate::grid_spectral::{GridSpec, ScalarField};
use crate::par;
use crate::problem::ProblemSpec;

/// Time integrators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Per-mode closed form; only for spatially constant `D`.
    #[serde(rename = "exact")]
    ExactExponential,
    /// Exponential time differencing (fourth-order Cox–Matthews) with `θΔ`
    /// integrated exactly and `∇·(D∇·) − θΔ` treated explicitly.
    #[serde(rename = "split")]
    SplitExponential,
    /// Classical RK4 at a quarter of the CFL step.
    #[serde(rename = "rk4")]
    ReferenceRk,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ExactExponential => "exact",
            Method::SplitExponential => "split",
            Method::ReferenceRk => "rk4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub method: Method,
    pub steps: usize,
    /// Largest step taken; zero for the exact method.
    pub max_step: f64,
    pub cfl_step: f64,
    /// `θ` used to split off the exactly integrated Laplacian.
    pub splitting_constant: Option<f64>,
}

/// States `u(t_j)` at strictly increasing sample times in `(0, T]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    problem: Arc<ProblemSpec>,
    sample_times: Vec<f64>,
    states: Vec<ScalarField>,
    stats: IntegratorStats,
}

impl Trajectory {
    /// Assemble a trajectory from externally produced states, e.g. closed
    /// forms or perturbed series used as controls.
    pub fn from_states(
        problem: Arc<ProblemSpec>,
        sample_times: Vec<f64>,
        states: Vec<ScalarField>,
        stats: IntegratorStats,
    ) -> Result<Self> {
        validate_times(&sample_times, problem.horizon)?;
        if states.len() != sample_times.len() {
            return Err(Error::InvalidArgument(format!(
                "{} states for {} sample times",
                states.len(),
                sample_times.len()
            )));
        }
        if states.iter().any(|s| s.grid() != problem.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            problem,
            sample_times,
            states,
            stats,
        })
    }

    pub fn problem(&self) -> &Arc<ProblemSpec> {
        &self.problem
    }

    pub fn times(&self) -> &[f64] {
        &self.sample_times
    }

    pub fn states(&self) -> &[ScalarField] {
        &self.states
    }

    pub fn stats(&self) -> &IntegratorStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.sample_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_times.is_empty()
    }
}

pub(crate) fn validate_times(times: &[f64], horizon: f64) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidSchedule("no sample times".into()));
    }
    if !(times[0] > 0.0) {
        return Err(Error::InvalidSchedule(format!(
            "first sample time must be positive, got {}",
            times[0]
        )));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSchedule(
            "sample times must be strictly increasing".into(),
        ));
    }
    let last = *times.last().unwrap();
    if !(last <= horizon * (1.0 + 1e-12)) || !last.is_finite() {
        return Err(Error::InvalidSchedule(format!(
            "sample time {last} beyond horizon {horizon}"
        )));
    }
    Ok(())
}

/// Solve with unit CFL safety.
pub fn solve(problem: &Arc<ProblemSpec>, sample_times: &[f64], method: Method) -> Result<Trajectory> {
    solve_with_safety(problem, sample_times, method, 1.0)
}

/// Solve, taking `ceil(Δt_j / dt)` equal steps between consecutive samples,
/// with `dt = safety·cfl_step_size` (a quarter of that for RK4).
pub fn solve_with_safety(
    problem: &Arc<ProblemSpec>,
    sample_times: &[f64],
    method: Method,
    safety: f64,
) -> Result<Trajectory> {
    validate_times(sample_times, problem.horizon)?;
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::validation(
            "solver.safety",
            format!("must lie in (0, 1], got {safety}"),
        ));
    }
    let cfl = cfl_step_size(problem, safety);
    let (states, stats) = match method {
        Method::ExactExponential => exact(problem, sample_times, cfl)?,
        Method::SplitExponential => split(problem, sample_times, cfl)?,
        Method::ReferenceRk => rk4(problem, sample_times, cfl)?,
    };
    Ok(Trajectory {
        problem: Arc::clone(problem),
        sample_times: sample_times.to_vec(),
        states,
        stats,
    })
}

/// Squared L² norm of coefficients.
fn energy(grid: &GridSpec, c: &[Complex64]) -> f64 {
    grid.volume() * crate::summation::compensated_sum(c.len(), |i| c[i].norm_sqr())
}

/// Guard against integrator misconfiguration: `‖u(t)‖² ≤ eᵗ(‖u₀‖² + ‖f‖²) − ‖f‖²`
/// holds for every solution of the PDE.
struct EnergyEnvelope {
    initial: f64,
    forcing: f64,
}

impl EnergyEnvelope {
    fn new(problem: &ProblemSpec, u0: &[Complex64], f: &[Complex64]) -> Self {
        Self {
            initial: energy(problem.grid(), u0),
            forcing: energy(problem.grid(), f),
        }
    }

    fn check(&self, grid: &GridSpec, t: f64, u: &[Complex64]) -> Result<()> {
        let e = energy(grid, u);
        let bound = t.exp() * (self.initial + self.forcing) - self.forcing;
        let slack = 1e-8 * bound.abs() + 1e-12 * (self.initial + self.forcing) + 1e-300;
        if e.is_finite() && e <= bound + slack {
            Ok(())
        } else {
            Err(Error::UnstableStep {
                time: t,
                norm_sq: e,
                envelope: bound,
            })
        }
    }
}

fn to_fields(grid: &GridSpec, states: Vec<Vec<Complex64>>) -> Result<Vec<ScalarField>> {
    states
        .into_iter()
        .map(|c| ScalarField::from_coefficients(*grid, c))
        .collect()
}

/// Step counts and sizes per sampling interval.
fn intervals(times: &[f64], max_step: f64) -> Vec<(usize, f64)> {
    let mut prev = 0.0;
    times
        .iter()
        .map(|&t| {
            let span = t - prev;
            prev = t;
            let steps = ((span / max_step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            (steps, span / steps as f64)
        })
        .collect()
}

fn exact(
    problem: &ProblemSpec,
    times: &[f64],
    cfl: f64,
) -> Result<(Vec<ScalarField>, IntegratorStats)> {
    let d = problem.diffusion.constant_matrix().ok_or_else(|| {
        Error::MethodMismatch("the exact exponential needs spatially constant D".into())
    })?;
    let grid = *problem.grid();
    let n = grid.dim();
    let kappa = grid.derivative_wavenumbers();
    // κᵀDκ per mode
    let symbol = par::map_range(grid.total(), |i| {
        let idx = grid.unflatten(i);
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += d[a * n + b] * kappa[idx[a]] * kappa[idx[b]];
            }
        }
        s
    });
    let u0 = problem.initial.coefficients();
    let f = problem.forcing.coefficients();
    let states = times
        .iter()
        .map(|&t| {
            par::map_range(grid.total(), |i| {
                let z = -symbol[i] * t;
                let [e, p1] = phi_functions::<2>(z);
                u0[i] * e + f[i] * (t * p1)
            })
        })
        .collect();
    Ok((
        to_fields(&grid, states)?,
        IntegratorStats {
            method: Method::ExactExponential,
            steps: 0,
            max_step: 0.0,
            cfl_step: cfl,
            splitting_constant: Some(problem.theta()),
        },
    ))
}

/// Per-mode ETDRK4 coefficients for one step size.
struct EtdCoefficients {
    half_exp: Vec<f64>,
    half_phi: Vec<f64>,
    full_exp: Vec<f64>,
    b1: Vec<f64>,
    b23: Vec<f64>,
    b4: Vec<f64>,
}

impl EtdCoefficients {
    fn new(lambda: &[f64], h: f64) -> Self {
        let half: Vec<[f64; 2]> = par::map(lambda, |&l| phi_functions::<2>(0.5 * h * l));
        let full: Vec<[f64; 4]> = par::map(lambda, |&l| phi_functions::<4>(h * l));
        Self {
            half_exp: half.iter().map(|p| p[0]).collect(),
            half_phi: half.iter().map(|p| 0.5 * h * p[1]).collect(),
            full_exp: full.iter().map(|p| p[0]).collect(),
            b1: full.iter().map(|p| h * (p[1] - 3.0 * p[2] + 4.0 * p[3])).collect(),
            b23: full.iter().map(|p| h * (2.0 * p[2] - 4.0 * p[3])).collect(),
            b4: full.iter().map(|p| h * (4.0 * p[3] - p[2])).collect(),
        }
    }
}

fn split(
    problem: &ProblemSpec,
    times: &[f64],
    cfl: f64,
) -> Result<(Vec<ScalarField>, IntegratorStats)> {
    let grid = *problem.grid();
    let theta = problem.theta();
    let op = DivergenceForm::new(&problem.diffusion);
    let lambda: Vec<f64> = DivergenceForm::laplacian_symbol(&grid)
        .into_iter()
        .map(|s| -theta * s)
        .collect();
    let f = problem.forcing.coefficients();
    let remainder = |u: &[Complex64]| -> Vec<Complex64> {
        let mut lu = op.apply(u);
        par::for_each_indexed_mut(&mut lu, |i, v| *v += f[i] - lambda[i] * u[i]);
        lu
    };

    let mut u = problem.initial.coefficients().into_owned();
    let guard = EnergyEnvelope::new(problem, &u, &f);
    let mut t = 0.0;
    let mut states = Vec::with_capacity(times.len());
    let mut total_steps = 0;
    let mut max_step: f64 = 0.0;
    for (steps, h) in intervals(times, cfl) {
        let co = EtdCoefficients::new(&lambda, h);
        for _ in 0..steps {
            let nu = remainder(&u);
            let a = par::map_range(u.len(), |i| co.half_exp[i] * u[i] + co.half_phi[i] * nu[i]);
            let na = remainder(&a);
            let b = par::map_range(u.len(), |i| co.half_exp[i] * u[i] + co.half_phi[i] * na[i]);
            let nb = remainder(&b);
            let c = par::map_range(u.len(), |i| {
                co.half_exp[i] * a[i] + co.half_phi[i] * (2.0 * nb[i] - nu[i])
            });
            let nc = remainder(&c);
            u = par::map_range(u.len(), |i| {
                co.full_exp[i] * u[i]
                    + co.b1[i] * nu[i]
                    + co.b23[i] * (na[i] + nb[i])
                    + co.b4[i] * nc[i]
            });
            t += h;
            guard.check(&grid, t, &u)?;
        }
        total_steps += steps;
        max_step = max_step.max(h);
        states.push(u.clone());
    }
    Ok((
        to_fields(&grid, states)?,
        IntegratorStats {
            method: Method::SplitExponential,
            steps: total_steps,
            max_step,
            cfl_step: cfl,
            splitting_constant: Some(theta),
        },
    ))
}

fn rk4(
    problem: &ProblemSpec,
    times: &[f64],
    cfl: f64,
) -> Result<(Vec<ScalarField>, IntegratorStats)> {
    let grid = *problem.grid();
    let op = DivergenceForm::new(&problem.diffusion);
    let f = problem.forcing.coefficients();
    let rhs = |u: &[Complex64]| -> Vec<Complex64> {
        let mut lu = op.apply(u);
        par::for_each_indexed_mut(&mut lu, |i, v| *v += f[i]);
        lu
    };
    let mut u = problem.initial.coefficients().into_owned();
    let guard = EnergyEnvelope::new(problem, &u, &f);
    let mut t = 0.0;
    let mut states = Vec::with_capacity(times.len());
    let mut total_steps = 0;
    let mut max_step: f64 = 0.0;
    let dt = 0.25 * cfl;
    for (steps, h) in intervals(times, dt) {
        for _ in 0..steps {
            let k1 = rhs(&u);
            let y = par::map_range(u.len(), |i| u[i] + 0.5 * h * k1[i]);
            let k2 = rhs(&y);
            let y = par::map_range(u.len(), |i| u[i] + 0.5 * h * k2[i]);
            let k3 = rhs(&y);
            let y = par::map_range(u.len(), |i| u[i] + h * k3[i]);
            let k4 = rhs(&y);
            u = par::map_range(u.len(), |i| {
                u[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
            });
            t += h;
            guard.check(&grid, t, &u)?;
        }
        total_steps += steps;
        max_step = max_step.max(h);
        states.push(u.clone());
    }
    Ok((
        to_fields(&grid, states)?,
        IntegratorStats {
            method: Method::ReferenceRk,
            steps: total_steps,
            max_step,
            cfl_step: dt,
            splitting_constant: None,
        },
    ))
}

/// `max_j |mean(u(t_j)) − mean(u₀) − t_j·mean(f)|`.
pub fn mass_balance(trajectory: &Trajectory) -> f64 {
    let p = trajectory.problem();
    let m0 = p.initial.mean();
    let mf = p.forcing.mean();
    trajectory
        .times()
        .iter()
        .zip(trajectory.states())
        .map(|(&t, u)| (u.mean() - m0 - t * mf).abs())
        .fold(0.0, f64::max)
}
