//! Acceptance criteria 1–10, one PASS/FAIL line each. Runs without the
//! libtest harness so the lines are never captured.

use parasmooth::experiment::{
    bundled, exit_code, run_criterion, run_experiment, title, verify_suite, CriterionOutcome,
    CSV_FILE,
};
use parasmooth::par;

fn determinism() -> CriterionOutcome {
    let run = || -> parasmooth::Result<(Vec<Vec<u8>>, String)> {
        let dir = tempfile::tempdir().map_err(|e| parasmooth::Error::Io {
            context: "tempdir".into(),
            source: e,
        })?;
        let mut csvs = Vec::new();
        let mut hashes = String::new();
        for name in ["heat-rough-rate", "sinusoidal-manufactured", "mixed-2d"] {
            let config = bundled(name)?;
            let report = run_experiment(&config, dir.path())?;
            hashes.push_str(&report.config_hash);
            let path = dir.path().join(name).join(CSV_FILE);
            csvs.push(std::fs::read(&path).map_err(|e| parasmooth::Error::Io {
                context: path,
                source: e,
            })?);
        }
        Ok((csvs, hashes))
    };
    let outcome = (|| -> parasmooth::Result<(bool, String)> {
        let (a, ha) = run()?;
        let (b, hb) = run()?;
        let identical = a == b && ha == hb;
        let unknown = verify_suite("nonsense").map(|r| r.passed);
        let unknown_code = exit_code(&unknown);
        Ok((
            identical && unknown_code == 2,
            format!(
                "{} CSVs byte-identical: {identical}; unknown suite exit code {unknown_code}",
                a.len()
            ),
        ))
    })();
    let (passed, summary) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id: 10,
        title: title(10),
        passed,
        summary,
    }
}

fn main() -> std::process::ExitCode {
    let ids: Vec<u8> = (1..=9).collect();
    let mut outcomes = par::map(&ids, |&id| run_criterion(id));
    // the verify contract: exit 0 exactly when criteria 1–9 pass
    let all_pass = outcomes.iter().all(|o| o.passed);
    let mut tenth = determinism();
    if exit_code(&Ok(all_pass)) != if all_pass { 0 } else { 1 } {
        tenth.passed = false;
    }
    outcomes.push(tenth);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
