use std::sync::Arc;

use serde::Serialize;

use super::config::{parse_config, ExperimentConfig};
use super::runner::{build_problem, galerkin_gap, simulate};
use crate::error::{Error, Result};
use crate::evolution::{mass_balance, solve_with_safety, IntegratorStats, Method, Trajectory};
use crate::galerkin::heat_exact;
use crate::grid_spectral::{l2_norm, ScalarField};
use crate::monitor::{
    check_continuity, check_dissipation, check_smoothing_bound, check_uniqueness_stability,
    linear_fit, linear_spaced, rate_fit,
    residual_weak_form, shuffled_control, NormSeries,
};
use crate::par;
use crate::problem::{DiffusionModel, FieldSpec, ForcingSpec, InitialSpec, ProblemSpec};

/// Stock experiment configs shipped with the crate.
pub const BUNDLED: [(&str, &str); 6] = [
    ("heat-smooth", include_str!("../../configs/heat-smooth.toml")),
    ("heat-rough-rate", include_str!("../../configs/heat-rough-rate.toml")),
    ("sinusoidal-galerkin", include_str!("../../configs/sinusoidal-galerkin.toml")),
    ("sinusoidal-manufactured", include_str!("../../configs/sinusoidal-manufactured.toml")),
    ("mixed-2d", include_str!("../../configs/mixed-2d.toml")),
    ("diagonal-2d-rough", include_str!("../../configs/diagonal-2d-rough.toml")),
];

/// Parse a bundled config by name.
pub fn bundled(name: &str) -> Result<ExperimentConfig> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidArgument(format!("no bundled config `{name}`")))?;
    parse_config(text)
}

/// Suites and the criteria they run.
pub const SUITES: [(&str, &[u8]); 5] = [
    ("oracle", &[1, 2]),
    ("smoothing", &[3, 4]),
    ("galerkin", &[5, 6, 7]),
    ("weakform", &[8, 9]),
    ("all", &[1, 2, 3, 4, 5, 6, 7, 8, 9]),
];

pub const HEAT_SPLIT_TOLERANCE: f64 = 1e-8;
pub const HEAT_EXACT_TOLERANCE: f64 = 1e-12;
pub const GALERKIN_TOLERANCE: f64 = 1e-6;
pub const SLOPE_TOLERANCE: f64 = 0.12;
pub const MIN_R2: f64 = 0.98;
pub const MAX_GRONWALL_C: f64 = 5.0;
pub const CT_VARIATION: f64 = 0.25;
pub const MONOTONE_TOLERANCE: f64 = 1e-12;
pub const DISSIPATION_VARIATION: f64 = 0.20;
pub const UNIQUENESS_TOLERANCE: f64 = 1e-8;
pub const HALVING_TOLERANCE: f64 = 0.1;
pub const RESIDUAL_MAX: f64 = 1e-6;
pub const CONTROL_MIN: f64 = 1e-1;
pub const MASS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {}  {}",
            self.id,
            self.title,
            if self.passed { "PASS" } else { "FAIL" },
            self.summary
        )
    }
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "heat-kernel oracle",
        2 => "dense Galerkin oracle",
        3 => "smoothing-rate ladder",
        4 => "energy functionals",
        5 => "dissipation inequalities",
        6 => "uniqueness and stability",
        7 => "time continuity",
        8 => "weak-form residual",
        9 => "mass balance",
        10 => "determinism and CLI",
        _ => "unknown",
    }
}

/// Run one of criteria 1–9; errors become failing outcomes.
pub fn run_criterion(id: u8) -> CriterionOutcome {
    let result = match id {
        1 => heat_oracle(),
        2 => galerkin_oracle(),
        3 => smoothing_ladder(),
        4 => energy_functionals(),
        5 => dissipation(),
        6 => uniqueness(),
        7 => continuity(),
        8 => weak_form(),
        9 => mass(),
        _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
    };
    let (passed, summary) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id,
        title: title(id),
        passed,
        summary,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub outcomes: Vec<CriterionOutcome>,
    pub passed: bool,
}

/// Run the criteria of a suite in parallel, in criterion order.
pub fn verify_suite(name: &str) -> Result<SuiteReport> {
    let (_, ids) = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownSuite {
            name: name.into(),
            valid: SUITES.iter().map(|(n, _)| n.to_string()).collect(),
        })?;
    let outcomes = par::map(ids, |&id| run_criterion(id));
    Ok(SuiteReport {
        suite: name.into(),
        passed: outcomes.iter().all(|o| o.passed),
        outcomes,
    })
}

type Verdict = Result<(bool, String)>;

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn max_relative_heat_error(traj: &Trajectory) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (&t, u) in traj.times().iter().zip(traj.states()) {
        let exact = heat_exact(traj.problem(), t)?;
        worst = worst.max(crate::grid_spectral::l2_distance(u, &exact)? / l2_norm(&exact));
    }
    Ok(worst)
}

fn heat_oracle() -> Verdict {
    let config = bundled("heat-smooth")?;
    let problem = build_problem(&config)?;
    let times = config.sample_times();
    let split = solve_with_safety(&problem, &times, Method::SplitExponential, config.solver.safety)?;
    let exact = solve_with_safety(&problem, &times, Method::ExactExponential, 1.0)?;
    let e_split = max_relative_heat_error(&split)?;
    let e_exact = max_relative_heat_error(&exact)?;
    Ok((
        e_split <= HEAT_SPLIT_TOLERANCE && e_exact <= HEAT_EXACT_TOLERANCE,
        format!("split rel L2 {e_split:.2e} (≤ {HEAT_SPLIT_TOLERANCE:.0e}), exact {e_exact:.2e} (≤ {HEAT_EXACT_TOLERANCE:.0e})"),
    ))
}

fn galerkin_oracle() -> Verdict {
    let config = bundled("sinusoidal-galerkin")?;
    let data = simulate(&config)?;
    let gaps: Vec<f64> = [9, 17, 33]
        .iter()
        .map(|&m| galerkin_gap(&data.trajectory, m))
        .collect::<Result<_>>()?;
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    Ok((
        monotone && gaps[2] <= GALERKIN_TOLERANCE,
        format!(
            "L2 gap m=9 {:.2e}, m=17 {:.2e}, m=33 {:.2e} (≤ {GALERKIN_TOLERANCE:.0e}, decreasing: {monotone})",
            gaps[0], gaps[1], gaps[2]
        ),
    ))
}

/// Log-log slope of the lattice sum `Σ |ξ|^{2k−2s} e^{−2θ|ξ|²t}` over the
/// modes the grid carries, at the given times (one dimension).
pub fn lattice_slope(points: usize, decay: f64, theta: f64, k: usize, times: &[f64]) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .map(|&t| {
            let s: f64 = (1..points / 2)
                .map(|xi| {
                    let x = xi as f64;
                    2.0 * x.powf(2.0 * k as f64 - 2.0 * decay) * (-2.0 * theta * x * x * t).exp()
                })
                .sum();
            (t.ln(), s.ln())
        })
        .unzip();
    linear_fit(&xs, &ys).0
}

fn rough_decay(config: &ExperimentConfig) -> f64 {
    match config.problem.initial {
        InitialSpec::Rough { decay, .. } => decay,
        _ => f64::NAN,
    }
}

fn smoothing_ladder() -> Verdict {
    let config = bundled("heat-rough-rate")?;
    let s = rough_decay(&config);
    let data = simulate(&config)?;
    let series = &data.series;
    let window = (1e-4, 1e-2);
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 1..=2 {
        let fit = rate_fit(series, k, window)?;
        let analytic = -(1.0 + 2.0 * k as f64 - 2.0 * s) / 2.0;
        let oracle = lattice_slope(config.problem.grid.points, s, series.theta, k, &fit_times(series, window));
        let pass = (fit.slope - analytic).abs() <= SLOPE_TOLERANCE && fit.r2 >= MIN_R2;
        ok &= pass;
        parts.push(format!(
            "k={k} slope {:.4} (analytic {analytic}, lattice {oracle:.4}, r2 {:.4})",
            fit.slope, fit.r2
        ));
    }
    for k in 1..=3 {
        let b = check_smoothing_bound(series, k)?;
        ok &= b.passed;
        parts.push(format!("bound k={k} {}", if b.passed { "ok" } else { "violated" }));
    }
    Ok((ok, parts.join("; ")))
}

fn fit_times(series: &NormSeries, window: (f64, f64)) -> Vec<f64> {
    series
        .times
        .iter()
        .copied()
        .filter(|&t| t >= window.0 && t <= window.1)
        .collect()
}

fn fitted_cts(config: &ExperimentConfig) -> Result<Vec<f64>> {
    let data = simulate(config)?;
    (1..=config.monitor.order)
        .map(|k| Ok(check_smoothing_bound(&data.series, k)?.fitted_ct))
        .collect()
}

fn gronwall_pair(config: &ExperimentConfig) -> Result<(f64, f64)> {
    let data = simulate(config)?;
    let m = data.series.order();
    let f = &data.series.data.forcing_hk_sq;
    Ok((data.energy.gronwall_m1(f[1])?, data.energy.gronwall_mm(f[m])?))
}

fn energy_functionals() -> Verdict {
    let rough = bundled("heat-rough-rate")?;
    let variable = bundled("sinusoidal-manufactured")?;
    let (r1, rm) = gronwall_pair(&rough)?;
    let (v1, vm) = gronwall_pair(&variable)?;
    let gronwall_ok = [r1, rm, v1, vm].iter().all(|&c| c <= MAX_GRONWALL_C);

    let mut fine_rough = rough.clone();
    fine_rough.problem.grid.points *= 2;
    let mut fine_variable = variable.clone();
    fine_variable.problem.grid.points *= 2;
    let mut small_step = variable.clone();
    small_step.solver.safety *= 0.5;
    let runs = par::map(
        &[&rough, &fine_rough, &variable, &fine_variable, &small_step],
        |c| fitted_cts(c),
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let spread = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| relative_change(*x, *y))
            .fold(0.0, f64::max)
    };
    let d_rough = spread(&runs[0], &runs[1]);
    let d_n = spread(&runs[2], &runs[3]);
    let d_dt = spread(&runs[2], &runs[4]);
    let stable = [d_rough, d_n, d_dt].iter().all(|&d| d <= CT_VARIATION);
    Ok((
        gronwall_ok && stable,
        format!(
            "Gronwall C rough M1 {r1:.3} M {rm:.3}, variable M1 {v1:.3} M {vm:.3} (≤ {MAX_GRONWALL_C}); \
             C_T change rough 2N {d_rough:.3}, variable 2N {d_n:.3}, dt/2 {d_dt:.3} (≤ {CT_VARIATION})"
        ),
    ))
}

fn max_relative_increase(series: &NormSeries) -> f64 {
    series
        .norms
        .iter()
        .flat_map(|row| row.windows(2).map(|w| (w[1] - w[0]) / w[0]))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn dissipation() -> Verdict {
    // constant anisotropic D keeps the k = 0 inequality strict
    let mut config = bundled("diagonal-2d-rough")?;
    config.problem.forcing = ForcingSpec::Zero;
    config.problem.grid.points = 256;
    config.monitor.order = 4;
    config.solver.horizon = 0.1;
    config.solver.schedule.count = 40;
    config.solver.schedule.start = Some(1e-3);
    let data = simulate(&config)?;
    let increase = max_relative_increase(&data.series);
    let constant = check_dissipation(&data.series)?;
    let zero_ok = constant.orders.iter().all(|o| o.feasible_with_zero);

    let variable = bundled("sinusoidal-manufactured")?;
    let mut fine = variable.clone();
    fine.problem.grid.points *= 2;
    let fitted = par::map(&[&variable, &fine], |c| -> Result<f64> {
        let d = check_dissipation(&simulate(c)?.series)?;
        Ok(d.orders.iter().map(|o| o.fitted_c).fold(0.0, f64::max))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let change = relative_change(fitted[0], fitted[1]);
    let variable_ok = fitted.iter().all(|c| c.is_finite()) && change <= DISSIPATION_VARIATION;
    Ok((
        increase <= MONOTONE_TOLERANCE && zero_ok && variable_ok,
        format!(
            "constant D: max rel increase k≤4 {increase:.2e}, C=0 feasible {zero_ok} (defect {:.2e}); \
             variable D: C {:.4} vs {:.4} under 2N (change {change:.3} ≤ {DISSIPATION_VARIATION})",
            constant.max_defect_at_zero, fitted[0], fitted[1]
        ),
    ))
}

fn uniqueness() -> Verdict {
    let grid_cfg = bundled("heat-smooth")?;
    let grid = grid_cfg.problem.grid.spec()?;
    let theta = 2.0;
    let diffusion = DiffusionModel::Isotropic { c: theta }.build(grid)?;
    let u0 = FieldSpec::Smooth { amplitude: 1.0 }.build(grid);
    let xi = 3i64;
    let delta = FieldSpec::Mode {
        wavevector: vec![xi],
        amplitude: 1e-2,
        phase: 0.2,
    }
    .build(grid);
    let problem = Arc::new(ProblemSpec::new(
        diffusion,
        ScalarField::zeros(grid),
        u0.clone(),
        0.25,
    )?);
    let times = linear_spaced(0.025, 0.25, 10);
    let perturbed = u0.add_scaled(1.0, &delta)?;
    let r = check_uniqueness_stability(&problem, &perturbed, &times, Method::SplitExponential, 1.0)?;
    let norm0 = l2_norm(&delta);
    let worst = times
        .iter()
        .zip(&r.defects)
        .map(|(&t, &d)| {
            let expected = (-theta * (xi * xi) as f64 * t).exp() * norm0;
            (d - expected).abs() / expected
        })
        .fold(0.0, f64::max);

    let variable = bundled("sinusoidal-manufactured")?;
    let vp = build_problem(&variable)?;
    let bump = FieldSpec::Mode {
        wavevector: vec![2],
        amplitude: 0.1,
        phase: 0.0,
    }
    .build(*vp.grid());
    let vtimes = variable.sample_times();
    let vr = check_uniqueness_stability(
        &vp,
        &vp.initial.add_scaled(1.0, &bump)?,
        &vtimes,
        variable.solver.method,
        variable.solver.safety,
    )?;
    Ok((
        worst <= UNIQUENESS_TOLERANCE && vr.nonincreasing,
        format!(
            "constant D defect vs e^(-θ|ξ|²t)‖δu₀‖ max rel {worst:.2e} (≤ {UNIQUENESS_TOLERANCE:.0e}); \
             variable D nonincreasing {} (Ĉ {:.3})",
            vr.nonincreasing, vr.c_hat
        ),
    ))
}

fn continuity() -> Verdict {
    let config = bundled("heat-rough-rate")?;
    let problem = build_problem(&config)?;
    let shifts: Vec<f64> = (0..5).map(|i| 1e-5 / f64::powi(2.0, i)).collect();
    let r = check_continuity(&problem, 1e-3, &shifts, Method::ExactExponential, 1.0)?;
    let within = |v: &[f64]| v.iter().all(|x| (x - 0.5).abs() <= HALVING_TOLERANCE);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(",");
    Ok((
        within(&r.l2_ratios) && within(&r.h1_ratios),
        format!(
            "t=1e-3 halving ratios L2 [{}], H1 [{}] (0.5 ± {HALVING_TOLERANCE})",
            fmt(&r.l2_ratios),
            fmt(&r.h1_ratios)
        ),
    ))
}

fn weak_form() -> Verdict {
    const MODES: usize = 16;
    let grid = bundled("heat-smooth")?.problem.grid.spec()?;
    let heat = Arc::new(ProblemSpec::new(
        DiffusionModel::Identity.build(grid)?,
        FieldSpec::Mode {
            wavevector: vec![1],
            amplitude: 0.5,
            phase: 0.0,
        }
        .build(grid),
        FieldSpec::Smooth { amplitude: 1.0 }.build(grid),
        0.02,
    )?);
    let times = linear_spaced(1e-4, 0.02, 200);
    let states = times
        .iter()
        .map(|&t| heat_exact(&heat, t))
        .collect::<Result<Vec<_>>>()?;
    let stats = IntegratorStats {
        method: Method::ExactExponential,
        steps: 0,
        max_step: 0.0,
        cfl_step: 0.0,
        splitting_constant: None,
    };
    let heat_traj = Trajectory::from_states(Arc::clone(&heat), times.clone(), states, stats.clone())?;
    let r_heat = residual_weak_form(&heat_traj, MODES)?;
    let r_control = residual_weak_form(&shuffled_control(&heat_traj, 11)?, MODES)?;

    let steady_cfg = bundled("sinusoidal-manufactured")?;
    let p = build_problem(&steady_cfg)?;
    let ForcingSpec::Manufactured { target } = &steady_cfg.problem.forcing else {
        return Err(Error::InvalidArgument("stock steady problem lost its forcing".into()));
    };
    let star = target.build(*p.grid());
    let steady = Arc::new(p.with_initial(star.clone())?);
    let st = linear_spaced(0.1, 1.0, 10);
    let steady_traj =
        Trajectory::from_states(steady, st.clone(), vec![star; st.len()], stats)?;
    let r_steady = residual_weak_form(&steady_traj, MODES)?;
    Ok((
        r_heat <= RESIDUAL_MAX && r_steady <= RESIDUAL_MAX && r_control >= CONTROL_MIN,
        format!(
            "heat {r_heat:.2e}, steady {r_steady:.2e} (≤ {RESIDUAL_MAX:.0e}); shuffled control {r_control:.2e} (≥ {CONTROL_MIN})"
        ),
    ))
}

fn mass() -> Verdict {
    let results = par::map(&BUNDLED, |(name, text)| -> Result<(String, f64, f64)> {
        let config = parse_config(text)?;
        let traj = simulate(&config)?.trajectory;
        let p = traj.problem();
        let bound = MASS_TOLERANCE * (l2_norm(&p.initial) + p.horizon * l2_norm(&p.forcing));
        Ok((name.to_string(), mass_balance(&traj), bound))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let ok = results.iter().all(|(_, d, b)| d <= b);
    let worst = results
        .iter()
        .map(|(_, d, b)| if *b > 0.0 { d / b } else { 0.0 })
        .fold(0.0, f64::max);
    Ok((
        ok,
        format!(
            "{} stock problems, worst defect/bound {worst:.2e}",
            results.len()
        ),
    ))
}
