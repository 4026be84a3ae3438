//! Declarative experiments: TOML configs, the runner that persists series
//! and reports, and the verification suites.

mod config;
mod criteria;
mod runner;

pub use config::{
    parse_config, CheckConfig, ExperimentConfig, Format, Functional, GridConfig, MonitorConfig,
    OutputConfig, ProblemConfig, ScheduleConfig, SolverConfig, Spacing, CHECK_NAMES,
    SCHEMA_VERSION,
};
pub use criteria::{
    bundled, lattice_slope, run_criterion, title, verify_suite, CriterionOutcome, SuiteReport,
    BUNDLED, SUITES,
};
pub use runner::{
    build_problem, evaluate_check, exit_code, galerkin_gap, oracle_only, output_dir, rates_only,
    run_experiment, series_csv, simulate, write_atomic, CheckVerdict, RunData, RunReport,
    CONFIG_FILE, CSV_FILE, OUTPUT_ROOT_VAR, REPORT_FILE,
};
