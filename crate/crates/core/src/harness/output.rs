//! Experiment directory layout:
//!
//! ```text
//! <dir>/timeseries.csv          one row per trial x batch x agent
//! <dir>/summary.json           aggregates, role census, seeds, config echo
//! <dir>/checkpoints/trial_NNN.json
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::{ExperimentResult, Summary};
use super::seed::TrialSeeds;
use crate::error::{Error, Result};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CHECKPOINT_DIR: &str = "checkpoints";

pub const TIMESERIES_HEADER: [&str; 10] = [
    "trial",
    "batch",
    "mean_pop_reward",
    "equality",
    "agent_id",
    "apples",
    "cleans",
    "psi",
    "phi",
    "omega",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesRow {
    pub trial: usize,
    pub batch: usize,
    pub mean_pop_reward: f64,
    pub equality: f64,
    pub agent_id: usize,
    pub apples: u64,
    pub cleans: u64,
    pub psi: f64,
    pub phi: f64,
    pub omega: f64,
}

#[derive(Debug, Serialize)]
struct SummaryFile<'a> {
    config: &'a ExperimentConfig,
    seeds: Vec<TrialSeeds>,
    summary: &'a Summary,
}

pub fn timeseries_rows(result: &ExperimentResult) -> Vec<TimeseriesRow> {
    let mut rows = Vec::new();
    for t in &result.trials {
        for (b, batch) in t.batches.iter().enumerate() {
            for (i, a) in batch.agents.iter().enumerate() {
                rows.push(TimeseriesRow {
                    trial: t.trial_index,
                    batch: b,
                    mean_pop_reward: batch.mean_pop_reward,
                    equality: batch.equality,
                    agent_id: i,
                    apples: a.apples,
                    cleans: a.cleans,
                    psi: a.credo.self_weight(),
                    phi: a.credo.team_weight(),
                    omega: a.credo.system_weight(),
                });
            }
        }
    }
    rows
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Writes timeseries, summary and per-trial checkpoints into `dir`.
pub fn write_experiment(dir: &Path, config: &ExperimentConfig, result: &ExperimentResult) -> Result<()> {
    create_dir(dir)?;
    write_csv(&dir.join(TIMESERIES_FILE), &timeseries_rows(result))?;
    let seeds = result
        .trials
        .iter()
        .map(|t| TrialSeeds::derive(config.master_seed, t.trial_index, config.num_agents))
        .collect();
    write_json(
        &dir.join(SUMMARY_FILE),
        &SummaryFile {
            config,
            seeds,
            summary: &result.summary,
        },
    )?;
    let ckpt = dir.join(CHECKPOINT_DIR);
    create_dir(&ckpt)?;
    for t in &result.trials {
        write_json(&checkpoint_path(dir, t.trial_index), &t.checkpoint)?;
    }
    Ok(())
}

pub fn checkpoint_path(dir: &Path, trial_index: usize) -> PathBuf {
    dir.join(CHECKPOINT_DIR)
        .join(format!("trial_{trial_index:03}.json"))
}

/// Reads `timeseries.csv`, checking its header and that it has rows.
pub fn read_timeseries(dir: &Path) -> Result<Vec<TimeseriesRow>> {
    let path = dir.join(TIMESERIES_FILE);
    let mut r = csv::Reader::from_path(&path).map_err(|source| Error::Csv {
        path: path.clone(),
        source,
    })?;
    let header = r.headers().map_err(|source| Error::Csv {
        path: path.clone(),
        source,
    })?;
    if header.iter().ne(TIMESERIES_HEADER) {
        return Err(Error::Parse {
            path,
            message: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let rows: Vec<TimeseriesRow> = read_csv(&path)?;
    if rows.is_empty() {
        return Err(Error::Parse {
            path,
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}
