use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use morawetz::harness::{run_scenario, selftest, sweep, verify_fields, Config, Scenario};
use morawetz::report::EstimateReport;

/// Defocusing NLS solver with Morawetz and interaction-Morawetz checks.
#[derive(Parser)]
#[command(name = "morawetz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write trace.csv, reports.txt and summary.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario once per value of a numeric key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weight identities and delta limits.
    VerifyFields,
    /// Fast kernels against brute-force oracles.
    Selftest,
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("MORAWETZ_THREADS") {
        let n: usize = value
            .trim()
            .parse()
            .with_context(|| format!("MORAWETZ_THREADS must be a positive integer, got `{value}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn load(path: &Path, overrides: &[String]) -> Result<Config> {
    let mut config =
        Config::from_file(path).with_context(|| format!("reading {}", path.display()))?;
    for o in overrides {
        config.apply_override(o)?;
    }
    Ok(config)
}

fn print_reports(reports: &[EstimateReport]) -> usize {
    for r in reports {
        println!("{}", r.machine_line());
    }
    let failed = reports.iter().filter(|r| r.failed()).count();
    println!("passed={} failed={failed}", reports.len() - failed);
    failed
}

fn execute(cli: Cli) -> Result<usize> {
    configure_threads()?;
    match cli.command {
        Command::Run {
            config,
            overrides,
            out,
        } => {
            let scenario = Scenario::from_config(&load(&config, &overrides)?)?;
            let outcome = run_scenario(&scenario)?;
            print!("{}", outcome.report_lines());
            print!("{}", outcome.summary());
            if let Some(dir) = out.or_else(|| scenario.output_dir.clone()) {
                outcome.write(&dir)?;
                println!("wrote {}", dir.display());
            }
            Ok(outcome.failures())
        }
        Command::Sweep {
            config,
            axis,
            values,
            overrides,
            out,
        } => {
            let base = load(&config, &overrides)?;
            let result = sweep(&base, &axis, &values)?;
            print!("{}", result.table());
            if let Some(dir) = out {
                result.write(&dir)?;
                println!("wrote {}", dir.display());
            }
            Ok(result.failures())
        }
        Command::VerifyFields => Ok(print_reports(&verify_fields()?)),
        Command::Selftest => Ok(print_reports(&selftest()?)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
