use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::trial::{run_trial, TrialRecord};
use crate::error::Result;
use crate::metrics::{
    ci95_half_width, classify_roles, final_quartile, mean_population_reward, median, RoleCensus,
};

/// How trials are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Trials on the global rayon pool. Without the `parallel` feature this
    /// runs sequentially.
    #[default]
    Parallel,
    /// Trials on a dedicated pool of `jobs` threads.
    ParallelWith { jobs: usize },
}

impl Execution {
    pub fn from_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            Some(1) => Execution::Sequential,
            Some(jobs) => Execution::ParallelWith { jobs },
            None => Execution::Parallel,
        }
    }
}

/// Runs `config.trials` independent trials in trial-index order.
pub fn run_trials(config: &ExperimentConfig, exec: Execution) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let indices: Vec<usize> = (0..config.trials).collect();
    map_indices(&indices, exec, |k| run_trial(config, k))
}

#[cfg(feature = "parallel")]
fn map_indices<T, F>(indices: &[usize], exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    use rayon::prelude::*;
    match exec {
        Execution::Sequential => indices.iter().map(|&k| f(k)).collect(),
        Execution::Parallel => indices.par_iter().map(|&k| f(k)).collect(),
        Execution::ParallelWith { jobs } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| crate::Error::config("jobs", e.to_string()))?;
            pool.install(|| indices.par_iter().map(|&k| f(k)).collect())
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn map_indices<T, F>(indices: &[usize], exec: Execution, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    if exec != Execution::Sequential {
        log::debug!("built without the `parallel` feature; running trials sequentially");
    }
    indices.iter().map(|&k| f(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchAggregate {
    pub batch: usize,
    pub reward_mean: f64,
    pub reward_ci95: f64,
    pub equality_mean: f64,
    pub equality_ci95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial_index: usize,
    pub seed: u64,
    /// Mean population reward over the final quarter of batches.
    pub final_reward: f64,
    pub final_equality: f64,
    /// Roles from apple and clean counts summed over the final quarter.
    pub census: RoleCensus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub total_batches: usize,
    pub per_batch: Vec<BatchAggregate>,
    pub per_trial: Vec<TrialSummary>,
    pub final_reward_median: f64,
    pub final_reward_ci95: f64,
    pub final_equality_median: f64,
    pub final_equality_ci95: f64,
}

impl Summary {
    pub fn final_rewards(&self) -> Vec<f64> {
        self.per_trial.iter().map(|t| t.final_reward).collect()
    }

    pub fn final_equalities(&self) -> Vec<f64> {
        self.per_trial.iter().map(|t| t.final_equality).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
}

pub fn run_experiment(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentResult> {
    let trials = run_trials(config, exec)?;
    let summary = summarize(&trials, config.dominance_ratio)?;
    Ok(ExperimentResult { trials, summary })
}

/// Aggregates trial records; every record must have the same batch count.
pub fn summarize(trials: &[TrialRecord], dominance_ratio: f64) -> Result<Summary> {
    let total_batches = trials.first().map_or(0, |t| t.batches.len());
    let per_batch = (0..total_batches)
        .map(|b| {
            let rewards: Vec<f64> = trials.iter().map(|t| t.batches[b].mean_pop_reward).collect();
            let equality: Vec<f64> = trials.iter().map(|t| t.batches[b].equality).collect();
            BatchAggregate {
                batch: b,
                reward_mean: mean_population_reward(&rewards),
                reward_ci95: ci95_half_width(&rewards),
                equality_mean: mean_population_reward(&equality),
                equality_ci95: ci95_half_width(&equality),
            }
        })
        .collect();

    let tail = final_quartile(total_batches);
    let per_trial = trials
        .iter()
        .map(|t| {
            let window = &t.batches[tail.clone()];
            let n = window.first().map_or(0, |b| b.agents.len());
            let apples: Vec<u64> = (0..n)
                .map(|i| window.iter().map(|b| b.agents[i].apples).sum())
                .collect();
            let cleans: Vec<u64> = (0..n)
                .map(|i| window.iter().map(|b| b.agents[i].cleans).sum())
                .collect();
            Ok(TrialSummary {
                trial_index: t.trial_index,
                seed: t.seed,
                final_reward: mean_population_reward(
                    &window.iter().map(|b| b.mean_pop_reward).collect::<Vec<_>>(),
                ),
                final_equality: mean_population_reward(
                    &window.iter().map(|b| b.equality).collect::<Vec<_>>(),
                ),
                census: classify_roles(&apples, &cleans, dominance_ratio)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rewards: Vec<f64> = per_trial.iter().map(|t| t.final_reward).collect();
    let equalities: Vec<f64> = per_trial.iter().map(|t| t.final_equality).collect();
    Ok(Summary {
        trials: trials.len(),
        total_batches,
        per_batch,
        final_reward_median: median(&rewards),
        final_reward_ci95: ci95_half_width(&rewards),
        final_equality_median: median(&equalities),
        final_equality_ci95: ci95_half_width(&equalities),
        per_trial,
    })
}
