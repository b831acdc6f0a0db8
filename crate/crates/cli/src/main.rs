use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use credo_sim::harness::{run_experiment, write_csv, write_experiment, Execution, ExperimentConfig};
use credo_sim::report::{build_report, REPORT_FILE};
use credo_sim::sweep::{Sweep, SWEEP_FILE};

/// Environment variable holding the log filter, e.g. `CREDO_LOG=info`.
const LOG_ENV: &str = "CREDO_LOG";

#[derive(Debug, Parser)]
#[command(name = "credo", version, about = "Credo-tuning multi-agent RL experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write timeseries, summary and checkpoints.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `key=value`, dotted keys reach nested tables (repeatable).
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// Parallel trial workers.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run one experiment per initial credo and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare finished experiment directories and write report.csv.
    Report {
        #[arg(required = true)]
        experiment_dirs: Vec<PathBuf>,
        /// Directory for report.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            mut overrides,
            trials,
            jobs,
        } => {
            if let Some(t) = trials {
                overrides.push(format!("trials={t}"));
            }
            cmd_run(&config, &out, &overrides, Execution::from_jobs(jobs))
        }
        Command::Sweep { config, out, jobs } => cmd_sweep(&config, &out, Execution::from_jobs(jobs)),
        Command::Report {
            experiment_dirs,
            out,
        } => cmd_report(&experiment_dirs, &out),
    }
}

fn cmd_run(config_path: &Path, out: &Path, overrides: &[String], exec: Execution) -> Result<()> {
    let config = ExperimentConfig::load(config_path, overrides)?;
    log::info!(
        "running {} trial(s) of {} batches",
        config.trials,
        config.total_batches
    );
    let result = run_experiment(&config, exec)?;
    write_experiment(out, &config, &result)?;
    let s = &result.summary;
    let last = s.per_batch.last().context("experiment produced no batches")?;
    println!(
        "final mean population reward {:.3} (95% CI ±{:.3}), equality {:.4}",
        last.reward_mean, last.reward_ci95, last.equality_mean
    );
    println!(
        "final-quartile median reward {:.3}, median equality {:.4}",
        s.final_reward_median, s.final_equality_median
    );
    Ok(())
}

fn cmd_sweep(sweep_path: &Path, out: &Path, exec: Execution) -> Result<()> {
    let sweep = Sweep::load(sweep_path)?;
    let rows = sweep.run(exec)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(&out.join(SWEEP_FILE), &rows)?;
    println!("{} sweep cells written to {}", rows.len(), out.join(SWEEP_FILE).display());
    Ok(())
}

fn cmd_report(dirs: &[PathBuf], out: &Path) -> Result<()> {
    let report = build_report(dirs)?;
    print!("{}", report.render());
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(&out.join(REPORT_FILE), &report.rows)?;
    Ok(())
}
