//! Command-line front end: run experiments, fit rates, compare against the
//! oracles and execute the verification suites.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use parasmooth::experiment::{
    exit_code, oracle_only, output_dir, parse_config, rates_only, run_experiment, verify_suite,
    ExperimentConfig, Format, RunReport, OUTPUT_ROOT_VAR,
};
use parasmooth::{Error, Result};

#[derive(Parser)]
#[command(name = "parasmooth", version, about = "Parabolic smoothing laboratory")]
struct Cli {
    /// Output root; relative config output directories resolve against it.
    #[arg(long, global = true, env = OUTPUT_ROOT_VAR, default_value = "parasmooth-out")]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Restrict persisted outputs to one format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and all of its checks.
    Run { config: PathBuf },
    /// Run a verification suite: oracle, smoothing, galerkin, weakform or all.
    Verify { suite: String },
    /// Run only rate fits for a config.
    Rates { config: PathBuf },
    /// Compare a config's solution against the applicable oracle.
    OracleCheck { config: PathBuf },
}

fn load(path: &Path, cli: &Cli) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        context: path.to_path_buf(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(f) = cli.format {
        config.output.formats = vec![match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }];
    }
    Ok(config)
}

fn print_report(report: &RunReport, dir: &Path) {
    for v in &report.verdicts {
        let metrics = v
            .metrics
            .iter()
            .map(|(k, x)| format!("{k}={x:.4e}"))
            .collect::<Vec<_>>()
            .join(" ");
        let status = if v.passed { "PASS" } else { "FAIL" };
        match &v.error {
            Some(e) => println!("{status} {:<16} error: {e}", v.kind),
            None => println!("{status} {:<16} {metrics}", v.kind),
        }
    }
    println!(
        "{} checks, {} {} -> {}",
        report.executed_checks,
        if report.passed { "all passed" } else { "some failed" },
        &report.config_hash[..12],
        dir.display()
    );
}

fn run(cli: &Cli) -> Result<bool> {
    if cli.threads > 0 {
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let experiment = |config: ExperimentConfig| -> Result<bool> {
        let report = run_experiment(&config, &cli.out)?;
        print_report(&report, &output_dir(&config, &cli.out));
        Ok(report.passed)
    };
    match &cli.command {
        Command::Run { config } => experiment(load(config, cli)?),
        Command::Rates { config } => experiment(rates_only(&load(config, cli)?)),
        Command::OracleCheck { config } => experiment(oracle_only(&load(config, cli)?)?),
        Command::Verify { suite } => {
            let report = verify_suite(suite)?;
            for o in &report.outcomes {
                println!("{}", o.line());
            }
            println!(
                "suite {}: {}",
                report.suite,
                if report.passed { "PASS" } else { "FAIL" }
            );
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    if let Err(e) = &outcome {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&outcome) as u8)
}
