use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evolution::Method;
use crate::galerkin::MAX_MODES;
use crate::grid_spectral::{GridSpec, MAX_ORDER};
use crate::monitor::{linear_spaced, log_spaced};
use crate::problem::{DiffusionModel, FieldSpec, ForcingSpec, InitialSpec};

/// Version written to and required from every config and report.
pub const SCHEMA_VERSION: u32 = 1;

/// Closed set of names accepted in each tagged section.
const FORCING_NAMES: [&str; 4] = ["zero", "constant", "mode", "manufactured"];
const INITIAL_NAMES: [&str; 5] = ["zero", "constant", "mode", "smooth", "rough"];
const FIELD_NAMES: [&str; 4] = ["zero", "constant", "mode", "smooth"];
const METHOD_NAMES: [&str; 3] = ["exact", "split", "rk4"];
const SPACING_NAMES: [&str; 2] = ["log", "linear"];
pub const CHECK_NAMES: [&str; 10] = [
    "rate_fit",
    "smoothing_bound",
    "dissipation",
    "gronwall",
    "mass_balance",
    "weak_residual",
    "heat_oracle",
    "galerkin_oracle",
    "decay_profile",
    "monotone_norms",
];
const FORMAT_NAMES: [&str; 2] = ["csv", "json"];

fn two_pi() -> f64 {
    2.0 * PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub points: usize,
    #[serde(default = "two_pi")]
    pub length: f64,
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.points, self.length)
    }
}

fn identity() -> DiffusionModel {
    DiffusionModel::Identity
}

fn zero_forcing() -> ForcingSpec {
    ForcingSpec::Zero
}

fn smooth_initial() -> InitialSpec {
    InitialSpec::Smooth { amplitude: 1.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub grid: GridConfig,
    #[serde(default = "identity")]
    pub diffusion: DiffusionModel,
    #[serde(default = "zero_forcing")]
    pub forcing: ForcingSpec,
    #[serde(default = "smooth_initial")]
    pub initial: InitialSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

fn default_count() -> usize {
    32
}

fn default_spacing() -> Spacing {
    Spacing::Log
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
    /// First sample time; defaults to `T·10⁻³` for log spacing and
    /// `T/count` for linear spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            count: default_count(),
            spacing: default_spacing(),
            start: None,
        }
    }
}

fn default_method() -> Method {
    Method::SplitExponential
}

fn default_safety() -> f64 {
    0.5
}

fn default_horizon() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub schedule: ScheduleConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            safety: default_safety(),
            horizon: default_horizon(),
            schedule: ScheduleConfig::default(),
        }
    }
}

fn default_order() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    /// Highest seminorm order `m` recorded in the series.
    #[serde(default = "default_order")]
    pub order: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            order: default_order(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    M1,
    Mm,
}

fn slope_tolerance() -> f64 {
    0.12
}
fn min_r2() -> f64 {
    0.98
}
fn max_gronwall_c() -> f64 {
    5.0
}
fn mass_tolerance() -> f64 {
    1e-10
}
fn test_modes() -> usize {
    16
}
fn residual_max() -> f64 {
    1e-6
}
fn heat_tolerance() -> f64 {
    1e-8
}
fn galerkin_modes() -> usize {
    33
}
fn galerkin_tolerance() -> f64 {
    1e-6
}
fn monotone_tolerance() -> f64 {
    1e-12
}

/// A requested check; `kind` selects the monitor operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckConfig {
    /// Log-log slope of `‖∇ᵏu‖₂²`; compared with `expected_slope` when set.
    RateFit {
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expected_slope: Option<f64>,
        #[serde(default = "slope_tolerance")]
        tolerance: f64,
        #[serde(default = "min_r2")]
        min_r2: f64,
    },
    SmoothingBound {
        k: usize,
    },
    Dissipation {
        /// Require feasibility with `C = 0`.
        #[serde(default)]
        require_zero: bool,
    },
    Gronwall {
        functional: Functional,
        #[serde(default = "max_gronwall_c")]
        max_c: f64,
    },
    MassBalance {
        #[serde(default = "mass_tolerance")]
        tolerance: f64,
    },
    WeakResidual {
        #[serde(default = "test_modes")]
        test_modes: usize,
        #[serde(default = "residual_max")]
        max: f64,
    },
    /// Compare against the closed-form heat solution (constant `D = cI`).
    HeatOracle {
        #[serde(default = "heat_tolerance")]
        tolerance: f64,
    },
    /// Compare the projected solution with the dense Galerkin system.
    GalerkinOracle {
        #[serde(default = "galerkin_modes")]
        modes: usize,
        #[serde(default = "galerkin_tolerance")]
        tolerance: f64,
    },
    /// Spectral profile at the last sample dominated by the first one.
    DecayProfile,
    /// `‖∇ᵏu‖₂²` nonincreasing for every recorded `k`.
    MonotoneNorms {
        #[serde(default = "monotone_tolerance")]
        tolerance: f64,
    },
}

impl CheckConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CheckConfig::RateFit { .. } => "rate_fit",
            CheckConfig::SmoothingBound { .. } => "smoothing_bound",
            CheckConfig::Dissipation { .. } => "dissipation",
            CheckConfig::Gronwall { .. } => "gronwall",
            CheckConfig::MassBalance { .. } => "mass_balance",
            CheckConfig::WeakResidual { .. } => "weak_residual",
            CheckConfig::HeatOracle { .. } => "heat_oracle",
            CheckConfig::GalerkinOracle { .. } => "galerkin_oracle",
            CheckConfig::DecayProfile => "decay_profile",
            CheckConfig::MonotoneNorms { .. } => "monotone_norms",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative paths resolve against the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: all_formats(),
        }
    }
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_name")]
    pub name: String,
    /// Default seed for rough initial data without an explicit seed.
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub monitor: MonitorConfig,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// Sample times in `(0, T]`.
    pub fn sample_times(&self) -> Vec<f64> {
        let s = &self.solver.schedule;
        let t = self.solver.horizon;
        let start = s.start.unwrap_or_else(|| default_start(s, t));
        match s.spacing {
            Spacing::Log => log_spaced(start, t, s.count),
            Spacing::Linear => linear_spaced(start, t, s.count),
        }
    }

    /// Fill every defaulted value so the serialized form is self-contained.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        let s = &mut c.solver.schedule;
        s.start = Some(s.start.unwrap_or_else(|| default_start(s, self.solver.horizon)));
        c
    }

    /// Canonical TOML of the resolved config.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.resolved()).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Hex SHA-256 of [`ExperimentConfig::to_toml`].
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    /// Semantic checks that need no numerics beyond grid construction.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let grid = self
            .problem
            .grid
            .spec()
            .map_err(|e| Error::validation("problem.grid", e.to_string()))?;
        let n = grid.dim();
        self.problem
            .diffusion
            .validate(n)
            .map_err(|(f, m)| Error::validation(format!("problem.diffusion.{f}"), m))?;
        match &self.problem.initial {
            InitialSpec::Rough { decay, amplitude, .. } => {
                if !(*decay > n as f64 / 2.0) {
                    return Err(Error::DecayTooSmall { decay: *decay, dim: n });
                }
                if !amplitude.is_finite() {
                    return Err(Error::validation("problem.initial.amplitude", "must be finite"));
                }
            }
            other => {
                if let Some(spec) = other.as_field_spec() {
                    spec.validate(&grid)
                        .map_err(|(f, m)| Error::validation(format!("problem.initial.{f}"), m))?;
                }
            }
        }
        let forcing: Option<(&FieldSpec, &str)>;
        let plain;
        match &self.problem.forcing {
            ForcingSpec::Manufactured { target } => forcing = Some((target, "problem.forcing.target")),
            ForcingSpec::Zero => forcing = None,
            ForcingSpec::Constant { value } => {
                plain = FieldSpec::Constant { value: *value };
                forcing = Some((&plain, "problem.forcing"));
            }
            ForcingSpec::Mode { wavevector, amplitude, phase } => {
                plain = FieldSpec::Mode {
                    wavevector: wavevector.clone(),
                    amplitude: *amplitude,
                    phase: *phase,
                };
                forcing = Some((&plain, "problem.forcing"));
            }
        }
        if let Some((spec, prefix)) = forcing {
            spec.validate(&grid)
                .map_err(|(f, m)| Error::validation(format!("{prefix}.{f}"), m))?;
        }
        let solver = &self.solver;
        if !(solver.horizon > 0.0 && solver.horizon.is_finite()) {
            return Err(Error::validation(
                "solver.horizon",
                format!("must be positive, got {}", solver.horizon),
            ));
        }
        if !(solver.safety > 0.0 && solver.safety <= 1.0) {
            return Err(Error::validation(
                "solver.safety",
                format!("must lie in (0, 1], got {}", solver.safety),
            ));
        }
        if solver.method == Method::ExactExponential && !self.problem.diffusion.is_constant() {
            return Err(Error::validation(
                "solver.method",
                "exact integration needs constant diffusion",
            ));
        }
        let s = &solver.schedule;
        if s.count == 0 {
            return Err(Error::validation("solver.schedule.count", "must be positive"));
        }
        if let Some(start) = s.start {
            if !(start > 0.0 && start <= solver.horizon) {
                return Err(Error::validation(
                    "solver.schedule.start",
                    format!("must lie in (0, T], got {start}"),
                ));
            }
            if s.count > 1 && start == solver.horizon {
                return Err(Error::validation(
                    "solver.schedule.start",
                    "must be below the horizon when more than one sample is requested",
                ));
            }
        }
        if self.monitor.order > MAX_ORDER {
            return Err(Error::validation(
                "monitor.order",
                format!("must not exceed {MAX_ORDER}"),
            ));
        }
        for (i, check) in self.checks.iter().enumerate() {
            self.validate_check(i, check, &grid)?;
        }
        if self.output.formats.is_empty() {
            return Err(Error::validation("output.formats", "at least one format required"));
        }
        Ok(())
    }

    fn validate_check(&self, i: usize, check: &CheckConfig, grid: &GridSpec) -> Result<()> {
        let field = |f: &str| format!("checks[{i}].{f}");
        let m = self.monitor.order;
        let order_ok = |k: usize, need: usize| -> Result<()> {
            if k + need > m {
                Err(Error::validation(
                    field("k"),
                    format!("needs monitor.order ≥ {}, got {m}", k + need),
                ))
            } else {
                Ok(())
            }
        };
        match check {
            CheckConfig::RateFit { k, window, .. } => {
                order_ok(*k, 0)?;
                if let Some([lo, hi]) = window {
                    if !(*lo > 0.0 && hi > lo) {
                        return Err(Error::validation(field("window"), "needs 0 < lo < hi"));
                    }
                }
            }
            CheckConfig::SmoothingBound { k } => {
                if *k == 0 {
                    return Err(Error::validation(field("k"), "must be at least 1"));
                }
                order_ok(*k, 0)?;
            }
            CheckConfig::Dissipation { .. } => order_ok(1, 0)?,
            CheckConfig::Gronwall { max_c, .. } => {
                order_ok(1, 0)?;
                if !(*max_c >= 0.0) {
                    return Err(Error::validation(field("max_c"), "must be nonnegative"));
                }
            }
            CheckConfig::WeakResidual { test_modes, .. } => {
                if *test_modes == 0 || *test_modes > MAX_MODES {
                    return Err(Error::validation(
                        field("test_modes"),
                        format!("must lie in 1..={MAX_MODES}"),
                    ));
                }
            }
            CheckConfig::HeatOracle { .. } => {
                if !matches!(
                    self.problem.diffusion,
                    DiffusionModel::Identity | DiffusionModel::Isotropic { .. }
                ) {
                    return Err(Error::validation(
                        field("kind"),
                        "heat oracle needs identity or isotropic diffusion",
                    ));
                }
            }
            CheckConfig::GalerkinOracle { modes, .. } => {
                let available = crate::galerkin::TrigBasis::capacity(grid).min(MAX_MODES);
                if *modes == 0 || *modes > available {
                    return Err(Error::validation(
                        field("modes"),
                        format!("must lie in 1..={available}"),
                    ));
                }
            }
            CheckConfig::MassBalance { .. }
            | CheckConfig::DecayProfile
            | CheckConfig::MonotoneNorms { .. } => {}
        }
        Ok(())
    }
}

fn default_start(s: &ScheduleConfig, horizon: f64) -> f64 {
    match s.spacing {
        Spacing::Log => horizon * 1e-3,
        Spacing::Linear => horizon / s.count.max(1) as f64,
    }
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_error(text: &str, e: toml::de::Error) -> Error {
    let (line, column) = e
        .span()
        .map_or((0, 0), |span| line_column(text, span.start));
    Error::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

/// Report an unknown `kind` as a validation error naming the valid choices.
fn check_kind(table: &toml::Table, path: &[&str], valid: &[&str]) -> Result<()> {
    let mut node = table;
    for key in &path[..path.len() - 1] {
        match node.get(*key).and_then(|v| v.as_table()) {
            Some(t) => node = t,
            None => return Ok(()),
        }
    }
    let last = path[path.len() - 1];
    if let Some(kind) = node.get(last).and_then(|v| v.as_str()) {
        if !valid.contains(&kind) {
            return Err(Error::validation(
                path.join("."),
                format!("unknown name `{kind}`, expected one of: {}", valid.join(", ")),
            ));
        }
    }
    Ok(())
}

/// Parse and validate a TOML experiment config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    check_kind(&table, &["problem", "diffusion", "kind"], &DiffusionModel::NAMES)?;
    check_kind(&table, &["problem", "forcing", "kind"], &FORCING_NAMES)?;
    check_kind(&table, &["problem", "forcing", "target", "kind"], &FIELD_NAMES)?;
    check_kind(&table, &["problem", "initial", "kind"], &INITIAL_NAMES)?;
    check_kind(&table, &["solver", "method"], &METHOD_NAMES)?;
    check_kind(&table, &["solver", "schedule", "spacing"], &SPACING_NAMES)?;
    if let Some(checks) = table.get("checks").and_then(|v| v.as_array()) {
        for (i, c) in checks.iter().enumerate() {
            if let Some(kind) = c.get("kind").and_then(|v| v.as_str()) {
                if !CHECK_NAMES.contains(&kind) {
                    return Err(Error::validation(
                        format!("checks[{i}].kind"),
                        format!("unknown check `{kind}`, expected one of: {}", CHECK_NAMES.join(", ")),
                    ));
                }
            }
        }
    }
    if let Some(formats) = table
        .get("output")
        .and_then(|o| o.get("formats"))
        .and_then(|v| v.as_array())
    {
        for f in formats.iter().filter_map(|f| f.as_str()) {
            if !FORMAT_NAMES.contains(&f) {
                return Err(Error::validation(
                    "output.formats",
                    format!("unknown format `{f}`, expected one of: {}", FORMAT_NAMES.join(", ")),
                ));
            }
        }
    }
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "schema_version = 1\n[problem.grid]\ndim = 1\npoints = 64\n";

    #[test]
    fn minimal_config_is_defaulted() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.problem.diffusion, DiffusionModel::Identity);
        assert_eq!(c.problem.forcing, ForcingSpec::Zero);
        assert_eq!(c.solver.method, Method::SplitExponential);
        assert_eq!(c.solver.schedule.count, 32);
        assert!((c.problem.grid.length - 2.0 * PI).abs() < 1e-15);
        let resolved = c.to_toml().unwrap();
        assert!(resolved.contains("start = 0.001"));
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = parse_config(MINIMAL).unwrap();
        let text = c.to_toml().unwrap();
        let again = parse_config(&text).unwrap();
        assert_eq!(again, c.resolved());
        assert_eq!(again.to_toml().unwrap(), text);
        assert_eq!(again.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn small_decay_is_rejected() {
        let text = format!("{MINIMAL}[problem.initial]\nkind = \"rough\"\ndecay = 0.4\n");
        assert!(matches!(
            parse_config(&text),
            Err(Error::DecayTooSmall { dim: 1, .. })
        ));
    }

    #[test]
    fn unknown_diffusion_lists_stock_names() {
        let text = format!("{MINIMAL}[problem.diffusion]\nkind = \"fancy\"\n");
        match parse_config(&text) {
            Err(Error::Validation { field, message }) => {
                assert_eq!(field, "problem.diffusion.kind");
                for name in DiffusionModel::NAMES {
                    assert!(message.contains(name));
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_horizon_is_rejected() {
        let text = format!("{MINIMAL}[solver]\nhorizon = 0.0\n");
        assert!(matches!(
            parse_config(&text),
            Err(Error::Validation { ref field, .. }) if field == "solver.horizon"
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let text = "schema_version = 1\n[problem.grid\n";
        match parse_config(text) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column >= 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_errors_carry_position() {
        let text = "schema_version = 1\n[problem.grid]\ndim = 1\npoints = \"many\"\n";
        match parse_config(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schedule_is_inside_horizon() {
        let c = parse_config(MINIMAL).unwrap();
        let t = c.sample_times();
        assert_eq!(t.len(), 32);
        assert!((t[0] - 1e-3).abs() < 1e-18);
        assert_eq!(*t.last().unwrap(), 1.0);
    }
}
