use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::config::{CheckConfig, ExperimentConfig, Format, Functional, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::evolution::{mass_balance, solve_with_safety, IntegratorStats, Method, Trajectory};
use crate::galerkin::{assemble_system, heat_exact, project, solve_dense};
use crate::grid_spectral::{l2_distance, l2_norm};
use crate::monitor::{
    check_dissipation, check_smoothing_bound, compare_profiles, default_window, energy_series,
    norm_series, rate_fit, residual_weak_form, shuffled_control, spectral_decay_profile,
    EnergySeries, NormSeries,
};
use crate::problem::ProblemSpec;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_VAR: &str = "PARASMOOTH_OUT";

pub const CSV_FILE: &str = "series.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "config.toml";

/// Outcome of one requested check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckVerdict {
    pub kind: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    /// Set when the check could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckVerdict {
    fn new(kind: &str, passed: bool, metrics: &[(&str, f64)]) -> Self {
        Self {
            kind: kind.into(),
            passed,
            metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            error: None,
        }
    }

    fn failed(kind: &str, error: &Error) -> Self {
        Self {
            kind: kind.into(),
            passed: false,
            metrics: BTreeMap::new(),
            error: Some(error.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub passed: bool,
    /// Some check could not be evaluated; its verdict carries the error.
    pub partial: bool,
    pub requested_checks: usize,
    pub executed_checks: usize,
    pub verdicts: Vec<CheckVerdict>,
    /// Files written to the output directory, relative to it.
    pub files: Vec<String>,
    pub stats: IntegratorStats,
    pub wall_clock_seconds: f64,
}

/// Build the problem described by a config.
pub fn build_problem(config: &ExperimentConfig) -> Result<Arc<ProblemSpec>> {
    let p = &config.problem;
    let grid = p.grid.spec()?;
    let diffusion = p.diffusion.build(grid)?;
    let forcing = p.forcing.build(&diffusion)?;
    let initial = p.initial.build(grid, config.seed)?;
    Ok(Arc::new(ProblemSpec::new(
        diffusion,
        forcing,
        initial,
        config.solver.horizon,
    )?))
}

/// Everything derived from one solve.
pub struct RunData {
    pub trajectory: Trajectory,
    pub series: NormSeries,
    pub energy: EnergySeries,
}

/// Solve and compute the norm and energy series.
pub fn simulate(config: &ExperimentConfig) -> Result<RunData> {
    let problem = build_problem(config)?;
    let trajectory = solve_with_safety(
        &problem,
        &config.sample_times(),
        config.solver.method,
        config.solver.safety,
    )?;
    let series = norm_series(&trajectory, config.monitor.order)?;
    let energy = energy_series(&series);
    Ok(RunData {
        trajectory,
        series,
        energy,
    })
}

/// Evaluate one check against a finished run.
pub fn evaluate_check(check: &CheckConfig, data: &RunData, config: &ExperimentConfig) -> CheckVerdict {
    let kind = check.name();
    evaluate(check, data, config).unwrap_or_else(|e| CheckVerdict::failed(kind, &e))
}

fn evaluate(check: &CheckConfig, data: &RunData, config: &ExperimentConfig) -> Result<CheckVerdict> {
    let kind = check.name();
    let traj = &data.trajectory;
    let series = &data.series;
    let problem = traj.problem();
    Ok(match check {
        CheckConfig::RateFit {
            k,
            window,
            expected_slope,
            tolerance,
            min_r2,
        } => {
            let step = match traj.stats().max_step {
                s if s > 0.0 => s,
                _ => traj.stats().cfl_step,
            };
            let window = match window {
                Some([lo, hi]) => (*lo, *hi),
                None => default_window(series, step, problem.horizon, *k).ok_or(
                    Error::WindowTooSparse {
                        available: 0,
                        required: crate::monitor::MIN_FIT_SAMPLES,
                    },
                )?,
            };
            let fit = rate_fit(series, *k, window)?;
            let slope_ok = expected_slope.is_none_or(|e| (fit.slope - e).abs() <= *tolerance);
            let mut v = CheckVerdict::new(
                kind,
                slope_ok && fit.r2 >= *min_r2,
                &[
                    ("k", *k as f64),
                    ("slope", fit.slope),
                    ("intercept", fit.intercept),
                    ("fitted_constant", fit.fitted_constant),
                    ("r2", fit.r2),
                    ("samples", fit.samples as f64),
                    ("window_lo", window.0),
                    ("window_hi", window.1),
                ],
            );
            if let Some(e) = expected_slope {
                v.metrics.insert("expected_slope".into(), *e);
            }
            v
        }
        CheckConfig::SmoothingBound { k } => {
            let b = check_smoothing_bound(series, *k)?;
            CheckVerdict::new(
                kind,
                b.passed,
                &[
                    ("k", *k as f64),
                    ("fitted_ct", b.fitted_ct),
                    ("sup_time", b.sup_time),
                    ("early_slope", b.early_slope),
                ],
            )
        }
        CheckConfig::Dissipation { require_zero } => {
            let r = check_dissipation(series)?;
            let mut metrics = vec![("max_defect_at_zero", r.max_defect_at_zero)];
            let names: Vec<(String, String)> = r
                .orders
                .iter()
                .map(|o| (format!("fitted_c_{}", o.k), format!("defect_at_zero_{}", o.k)))
                .collect();
            for (o, (c, d)) in r.orders.iter().zip(&names) {
                metrics.push((c, o.fitted_c));
                metrics.push((d, o.defect_at_zero));
            }
            let finite = r.orders.iter().all(|o| o.fitted_c.is_finite());
            let zero = r.orders.iter().all(|o| o.feasible_with_zero);
            CheckVerdict::new(kind, finite && (zero || !require_zero), &metrics)
        }
        CheckConfig::Gronwall { functional, max_c } => {
            let m = series.order();
            let (b, c) = match functional {
                Functional::M1 => {
                    let b = series.data.forcing_hk_sq[1];
                    (b, data.energy.gronwall_m1(b)?)
                }
                Functional::Mm => {
                    let b = series.data.forcing_hk_sq[m];
                    (b, data.energy.gronwall_mm(b)?)
                }
            };
            CheckVerdict::new(kind, c <= *max_c, &[("c", c), ("b", b), ("max_c", *max_c)])
        }
        CheckConfig::MassBalance { tolerance } => {
            let defect = mass_balance(traj);
            let bound =
                tolerance * (l2_norm(&problem.initial) + problem.horizon * l2_norm(&problem.forcing));
            CheckVerdict::new(kind, defect <= bound, &[("defect", defect), ("bound", bound)])
        }
        CheckConfig::WeakResidual { test_modes, max } => {
            let r = residual_weak_form(traj, *test_modes)?;
            let control = residual_weak_form(&shuffled_control(traj, config.seed)?, *test_modes)?;
            CheckVerdict::new(
                kind,
                r <= *max,
                &[("residual", r), ("shuffled_residual", control), ("max", *max)],
            )
        }
        CheckConfig::HeatOracle { tolerance } => {
            let mut worst: f64 = 0.0;
            for (&t, u) in traj.times().iter().zip(traj.states()) {
                let exact = heat_exact(problem, t)?;
                let scale = l2_norm(&exact);
                let err = l2_distance(u, &exact)?;
                worst = worst.max(if scale > 0.0 { err / scale } else { err });
            }
            CheckVerdict::new(kind, worst <= *tolerance, &[("max_relative_l2", worst)])
        }
        CheckConfig::GalerkinOracle { modes, tolerance } => {
            let gap = galerkin_gap(traj, *modes)?;
            CheckVerdict::new(kind, gap <= *tolerance, &[("max_l2_gap", gap), ("modes", *modes as f64)])
        }
        CheckConfig::DecayProfile => {
            let first = spectral_decay_profile(&traj.states()[0]);
            let last = spectral_decay_profile(traj.states().last().unwrap());
            let c = compare_profiles(&first, &last);
            CheckVerdict::new(
                kind,
                c.passed,
                &[
                    ("crossover", c.crossover as f64),
                    ("shells", first.len() as f64),
                    ("gaussian_rate_first", first.gaussian_rate),
                    ("gaussian_rate_last", last.gaussian_rate),
                ],
            )
        }
        CheckConfig::MonotoneNorms { tolerance } => {
            let mut worst: f64 = 0.0;
            for row in &series.norms {
                for w in row.windows(2) {
                    if w[0] > 0.0 {
                        worst = worst.max((w[1] - w[0]) / w[0]);
                    } else if w[1] > 0.0 {
                        worst = f64::INFINITY;
                    }
                }
            }
            CheckVerdict::new(kind, worst <= *tolerance, &[("max_relative_increase", worst)])
        }
    })
}

/// Largest `L²` distance between the projected trajectory and the dense
/// Galerkin solution with `modes` basis functions.
pub fn galerkin_gap(traj: &Trajectory, modes: usize) -> Result<f64> {
    let system = assemble_system(traj.problem(), modes)?;
    let dense = solve_dense(&system, traj.times());
    let mut worst: f64 = 0.0;
    for (u, c) in traj.states().iter().zip(&dense) {
        worst = worst.max((project(&system.basis, u) - c).norm());
    }
    Ok(worst)
}

/// `t, norm_0..norm_m, M1, Mm`, one row per sample.
pub fn series_csv(series: &NormSeries, energy: &EnergySeries) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend((0..=series.order()).map(|k| format!("norm_{k}")));
    header.push("M1".into());
    header.push("Mm".into());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(&header).map_err(ser)?;
    for j in 0..series.len() {
        let mut row = vec![format!("{:e}", series.times[j])];
        row.extend(series.norms.iter().map(|n| format!("{:e}", n[j])));
        row.push(format!("{:e}", energy.m1[j]));
        row.push(format!("{:e}", energy.mm[j]));
        w.write_record(&row).map_err(ser)?;
    }
    w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Output directory for a config under `root`.
pub fn output_dir(config: &ExperimentConfig, root: &Path) -> PathBuf {
    match &config.output.dir {
        Some(d) if d.is_absolute() => d.clone(),
        Some(d) => root.join(d),
        None => root.join(&config.name),
    }
}

/// Solve, evaluate every requested check and persist the outputs.
pub fn run_experiment(config: &ExperimentConfig, root: &Path) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    let dir = output_dir(config, root);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let resolved = config.to_toml()?;
    let config_hash = config.hash()?;
    write_atomic(&dir.join(CONFIG_FILE), resolved.as_bytes())?;
    let mut files = vec![CONFIG_FILE.to_string()];

    let data = simulate(config)?;
    if config.output.formats.contains(&Format::Csv) {
        write_atomic(&dir.join(CSV_FILE), &series_csv(&data.series, &data.energy)?)?;
        files.push(CSV_FILE.into());
    }
    let verdicts: Vec<CheckVerdict> = config
        .checks
        .iter()
        .map(|c| evaluate_check(c, &data, config))
        .collect();
    let write_json = config.output.formats.contains(&Format::Json);
    if write_json {
        files.push(REPORT_FILE.into());
    }
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        name: config.name.clone(),
        config_hash,
        seed: config.seed,
        passed: verdicts.iter().all(|v| v.passed),
        partial: verdicts.iter().any(|v| v.error.is_some()),
        requested_checks: config.checks.len(),
        executed_checks: verdicts.len(),
        verdicts,
        files,
        stats: data.trajectory.stats().clone(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    if write_json {
        let json = serde_json::to_vec_pretty(&report).map_err(|e| Error::Serialize(e.to_string()))?;
        write_atomic(&dir.join(REPORT_FILE), &json)?;
    }
    Ok(report)
}

/// Process exit status for a finished run or an error.
pub fn exit_code(outcome: &Result<bool>) -> i32 {
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) if e.is_configuration() => 2,
        Err(_) => 3,
    }
}

/// Keep only rate fits, adding one per recorded order when none were asked for.
pub fn rates_only(config: &ExperimentConfig) -> ExperimentConfig {
    let mut c = config.clone();
    c.checks.retain(|ch| matches!(ch, CheckConfig::RateFit { .. }));
    if c.checks.is_empty() {
        c.checks = (1..=c.monitor.order)
            .map(|k| CheckConfig::RateFit {
                k,
                window: None,
                expected_slope: None,
                tolerance: 0.12,
                min_r2: 0.98,
            })
            .collect();
    }
    c
}

/// Replace the checks by the applicable oracle comparison.
pub fn oracle_only(config: &ExperimentConfig) -> Result<ExperimentConfig> {
    use crate::problem::DiffusionModel;
    let mut c = config.clone();
    let check = match c.problem.diffusion {
        DiffusionModel::Identity | DiffusionModel::Isotropic { .. } => CheckConfig::HeatOracle {
            tolerance: if c.solver.method == Method::ExactExponential {
                1e-12
            } else {
                1e-8
            },
        },
        _ => {
            let grid = c.problem.grid.spec()?;
            let cap = crate::galerkin::TrigBasis::capacity(&grid);
            CheckConfig::GalerkinOracle {
                modes: 33.min(cap),
                tolerance: 1e-6,
            }
        }
    };
    c.checks = vec![check];
    Ok(c)
}
