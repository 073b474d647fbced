use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qchain_sim::report::{emit, ReportFormat, ScenarioConfig};
use qchain_sim::scenario::run_scenario;

/// Deterministic simulator of quantum attacks on, and quantum defenses for,
/// a proof-of-work blockchain.
///
/// Exit codes: 0 on success, 2 for invalid configs, 3 when a scenario ran but
/// missed a built-in expectation.
#[derive(Parser)]
#[command(name = "qchain-sim", version)]
struct Cli {
    /// Scenario configuration file (JSON).
    config: PathBuf,
    /// Override the config file's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report encoding.
    #[arg(long, default_value = "json", value_parser = ["json", "text"])]
    format: String,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_EXPECTATION_FAILED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format: ReportFormat = cli.format.parse().expect("clap restricts the values");

    let text = match fs::read_to_string(&cli.config) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", cli.config.display());
            return ExitCode::from(EXIT_INVALID_CONFIG);
        }
    };
    let mut config = match ScenarioConfig::from_json(&text) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_INVALID_CONFIG);
        }
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }

    let report = match run_scenario(&config) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_INVALID_CONFIG);
        }
    };

    let bytes = emit(&report, format);
    match &cli.out {
        Some(path) => {
            if let Err(err) = fs::write(path, &bytes) {
                eprintln!("error: cannot write {}: {err}", path.display());
                return ExitCode::FAILURE;
            }
        }
        None => {
            if std::io::stdout().write_all(&bytes).is_err() {
                return ExitCode::FAILURE;
            }
        }
    }

    if report.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!(
            "warning: {} of {} checks failed",
            report.checks.iter().filter(|c| !c.passed).count(),
            report.checks.len()
        );
        ExitCode::from(EXIT_EXPECTATION_FAILED)
    }
}
