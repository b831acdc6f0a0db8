//! Cross-experiment comparison from `timeseries.csv` files.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{read_timeseries, TimeseriesRow};
use crate::metrics::{ci95_half_width, final_quartile, mean_population_reward, median};

pub const REPORT_FILE: &str = "report.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub trials: usize,
    pub median_final_reward: f64,
    pub ci95_final_reward: f64,
    pub median_final_equality: f64,
    pub ci95_final_equality: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub left: String,
    pub right: String,
    pub ordering: Ordering,
}

impl Comparison {
    pub fn describe(&self) -> String {
        match self.ordering {
            Ordering::Greater => format!("{} > {}", self.left, self.right),
            Ordering::Less => format!("{} < {}", self.left, self.right),
            Ordering::Equal => format!("{} = {} (tied)", self.left, self.right),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub comparisons: Vec<Comparison>,
}

/// Final-quartile `(reward, equality)` per trial, in trial order.
pub fn final_quartile_by_trial(rows: &[TimeseriesRow]) -> Vec<(f64, f64)> {
    // trial -> batch -> (reward, equality); agent rows repeat the batch values.
    let mut by_trial: BTreeMap<usize, BTreeMap<usize, (f64, f64)>> = BTreeMap::new();
    for r in rows {
        by_trial
            .entry(r.trial)
            .or_default()
            .insert(r.batch, (r.mean_pop_reward, r.equality));
    }
    by_trial
        .values()
        .map(|batches| {
            let series: Vec<(f64, f64)> = batches.values().copied().collect();
            let tail = &series[final_quartile(series.len())];
            let rewards: Vec<f64> = tail.iter().map(|v| v.0).collect();
            let eq: Vec<f64> = tail.iter().map(|v| v.1).collect();
            (mean_population_reward(&rewards), mean_population_reward(&eq))
        })
        .collect()
}

fn experiment_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

pub fn build_report(dirs: &[PathBuf]) -> Result<Report> {
    if dirs.is_empty() {
        return Err(Error::config("experiment_dirs", "need at least one experiment directory"));
    }
    let rows = dirs
        .iter()
        .map(|dir| {
            let finals = final_quartile_by_trial(&read_timeseries(dir)?);
            let rewards: Vec<f64> = finals.iter().map(|f| f.0).collect();
            let equality: Vec<f64> = finals.iter().map(|f| f.1).collect();
            Ok(ReportRow {
                experiment: experiment_name(dir),
                trials: finals.len(),
                median_final_reward: median(&rewards),
                ci95_final_reward: ci95_half_width(&rewards),
                median_final_equality: median(&equality),
                ci95_final_equality: ci95_half_width(&equality),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut comparisons = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            comparisons.push(Comparison {
                left: rows[i].experiment.clone(),
                right: rows[j].experiment.clone(),
                ordering: rows[i]
                    .median_final_reward
                    .total_cmp(&rows[j].median_final_reward),
            });
        }
    }
    Ok(Report { rows, comparisons })
}

impl Report {
    pub fn render(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.experiment.len())
            .max()
            .unwrap_or(0)
            .max("experiment".len());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>12}  {:>10}  {:>12}  {:>10}",
            "experiment", "trials", "reward_med", "reward_ci", "equality_med", "equal_ci"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>12.3}  {:>10.3}  {:>12.4}  {:>10.4}",
                r.experiment,
                r.trials,
                r.median_final_reward,
                r.ci95_final_reward,
                r.median_final_equality,
                r.ci95_final_equality
            );
        }
        for c in &self.comparisons {
            let _ = writeln!(out, "{}", c.describe());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(trial: usize, batch: usize, reward: f64) -> TimeseriesRow {
        TimeseriesRow {
            trial,
            batch,
            mean_pop_reward: reward,
            equality: 1.0,
            agent_id: 0,
            apples: 0,
            cleans: 0,
            psi: 0.0,
            phi: 0.0,
            omega: 1.0,
        }
    }

    #[test]
    fn final_quartile_per_trial() {
        let rows: Vec<TimeseriesRow> = (0..8)
            .map(|b| row(0, b, b as f64))
            .chain((0..8).map(|b| row(1, b, 10.0)))
            .collect();
        assert_eq!(final_quartile_by_trial(&rows), vec![(6.5, 1.0), (10.0, 1.0)]);
    }

    #[test]
    fn empty_dir_list_is_an_error() {
        assert!(build_report(&[]).is_err());
    }

    #[test]
    fn comparison_text() {
        let c = Comparison {
            left: "a".into(),
            right: "b".into(),
            ordering: Ordering::Equal,
        };
        assert_eq!(c.describe(), "a = b (tied)");
    }
}
