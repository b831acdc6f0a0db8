//! One seeded trial of the two-timescale loop.
//!
//! Every step the behavioral learners act, the environment pays out, the
//! rewards are redistributed under the current credos and each learner is
//! updated with its own credo-based reward. Every `episodes_per_batch`
//! episodes the credo policies (in tuning mode) are rewarded with the batch
//! average and pick the credo for the next batch.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{CredoMode, EnvConfig, ExperimentConfig};
use super::seed::TrialSeeds;
use crate::credo::{CredoVector, RedistributionPlan};
use crate::credo_policy::{apply_move, BatchRewardSource, CredoMove, CredoPolicy, LatticePoint};
use crate::envs::{CredoResponseBandit, Environment, MiniCleanup};
use crate::error::Result;
use crate::learners::{QLearner, QTable, Transition};
use crate::metrics::{inverse_gini, mean_population_reward, MeanZeroConvention};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentBatch {
    pub apples: u64,
    pub cleans: u64,
    /// Credo in force during the batch.
    pub credo: CredoVector,
    /// Batch-average reward fed to the credo policy (computed in static mode too).
    pub batch_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub mean_pop_reward: f64,
    pub equality: f64,
    pub env_reward_total: f64,
    pub credo_reward_total: f64,
    pub agents: Vec<AgentBatch>,
}

impl BatchRecord {
    pub fn conservation_gap(&self) -> f64 {
        (self.env_reward_total - self.credo_reward_total).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialCheckpoint {
    pub trial_index: usize,
    pub seed: u64,
    pub behavior_q: Vec<QTable>,
    /// Empty in static mode.
    pub credo_q: Vec<QTable>,
    pub final_credos: Vec<CredoVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub batches: Vec<BatchRecord>,
    pub checkpoint: TrialCheckpoint,
}

impl TrialRecord {
    pub fn reward_series(&self) -> Vec<f64> {
        self.batches.iter().map(|b| b.mean_pop_reward).collect()
    }

    pub fn equality_series(&self) -> Vec<f64> {
        self.batches.iter().map(|b| b.equality).collect()
    }

    pub fn credo_series(&self, agent: usize) -> Vec<CredoVector> {
        self.batches.iter().map(|b| b.agents[agent].credo).collect()
    }
}

/// The credo policies of all agents plus their position on the lattice.
struct CredoTuner {
    policies: Vec<CredoPolicy>,
    points: Vec<LatticePoint>,
    /// Lattice point and move that led to the current point.
    pending: Vec<(LatticePoint, CredoMove)>,
    rngs: Vec<ChaCha8Rng>,
}

impl CredoTuner {
    fn new(config: &ExperimentConfig, credos: &[CredoVector], seeds: &[u64]) -> Result<Self> {
        let d = config.divisions()?;
        let points = credos
            .iter()
            .map(|cr| LatticePoint::from_credo(cr, d))
            .collect::<Result<Vec<_>>>()?;
        let policies = (0..credos.len())
            .map(|_| CredoPolicy::new(config.credo_policy.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(CredoTuner {
            policies,
            pending: points.iter().map(|&p| (p, CredoMove::NoOp)).collect(),
            points,
            rngs: seeds.iter().map(|&s| ChaCha8Rng::seed_from_u64(s)).collect(),
        })
    }

    fn credos(&self) -> Vec<CredoVector> {
        self.points.iter().map(LatticePoint::to_credo).collect()
    }

    /// Credits the last move with the batch reward, then picks the next credo.
    fn boundary(&mut self, batch_rewards: &[f64]) {
        for (i, &reward) in batch_rewards.iter().enumerate() {
            let (prev, mv) = self.pending[i];
            let current = self.points[i];
            self.policies[i].update(&prev, mv, reward, &current);
            let next_move = self.policies[i].select(&current, &mut self.rngs[i]);
            self.pending[i] = (current, next_move);
            self.points[i] = apply_move(current, next_move);
        }
    }

    fn q_tables(&self) -> Vec<QTable> {
        self.policies.iter().map(|p| p.q_table().clone()).collect()
    }
}

/// Runs trial `trial_index`; the record is a pure function of the arguments.
pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<TrialRecord> {
    config.validate()?;
    let seeds = TrialSeeds::derive(config.master_seed, trial_index, config.num_agents);
    match &config.env {
        EnvConfig::Cleanup(c) => {
            let env = MiniCleanup::new(c.clone(), config.num_agents)?;
            run_behavioral(config, trial_index, &seeds, env)
        }
        EnvConfig::Bandit(b) => {
            let bandit = CredoResponseBandit::new(b, config.divisions()?, config.num_agents)?;
            run_bandit(config, trial_index, &seeds, &bandit)
        }
    }
}

fn run_behavioral<E: Environment>(
    config: &ExperimentConfig,
    trial_index: usize,
    seeds: &TrialSeeds,
    mut env: E,
) -> Result<TrialRecord> {
    let n = config.num_agents;
    let desc = env.descriptor();
    let structure = config.team_structure()?;
    let mut credos = config.credos()?;
    let mut tuner = match config.credo_mode {
        CredoMode::Tuning => Some(CredoTuner::new(config, &credos, &seeds.credo)?),
        CredoMode::Static => None,
    };
    let mut learners: Vec<QLearner> = (0..n)
        .map(|_| QLearner::new(config.learner.clone(), desc.observation_space_size, desc.num_actions))
        .collect();
    let mut behavior_rngs: Vec<ChaCha8Rng> = seeds
        .behavior
        .iter()
        .map(|&s| ChaCha8Rng::seed_from_u64(s))
        .collect();
    let mut env_rng = ChaCha8Rng::seed_from_u64(seeds.env);

    let e = config.episodes_per_batch;
    let mut batches = Vec::with_capacity(config.total_batches);
    let mut actions = vec![0usize; n];
    let mut credo_step = vec![0.0; n];

    for _ in 0..config.total_batches {
        let mut plan = RedistributionPlan::new(&structure, &credos)?;
        let mut apples = vec![0u64; n];
        let mut cleans = vec![0u64; n];
        let mut credo_sum = vec![0.0; n];
        let mut env_sum = vec![0.0; n];
        let mut pop_sum = 0.0;
        let mut eq_sum = 0.0;

        for _ in 0..e {
            let mut obs = env.reset(env_rng.next_u64());
            let mut ep_credo = vec![0.0; n];
            let mut ep_env = vec![0.0; n];
            loop {
                for i in 0..n {
                    actions[i] = learners[i].select_action(obs[i], &mut behavior_rngs[i]);
                }
                let step = env.step(&actions);
                plan.apply_in_place(&step.rewards, &mut credo_step);
                for i in 0..n {
                    learners[i].update(&Transition {
                        obs: obs[i],
                        action: actions[i],
                        credo_reward: credo_step[i],
                        next_obs: step.observations[i],
                        terminal: step.done,
                    });
                    ep_credo[i] += credo_step[i];
                    ep_env[i] += step.rewards[i];
                    if step.rewards[i] > 0.0 {
                        apples[i] += 1;
                    }
                    if step.cleaned[i] {
                        cleans[i] += 1;
                    }
                }
                obs = step.observations;
                if step.done {
                    break;
                }
            }
            pop_sum += mean_population_reward(&ep_env);
            eq_sum += inverse_gini(&ep_credo, MeanZeroConvention::FullEquality)?.value();
            for i in 0..n {
                credo_sum[i] += ep_credo[i];
                env_sum[i] += ep_env[i];
            }
        }

        let source = match config.credo_policy.batch_reward {
            BatchRewardSource::Credo => &credo_sum,
            BatchRewardSource::Environment => &env_sum,
        };
        let scale = if config.credo_policy.normalize_batch_reward {
            1.0 / (e * desc.episode_length) as f64
        } else {
            1.0 / e as f64
        };
        let batch_rewards: Vec<f64> = source.iter().map(|r| r * scale).collect();

        batches.push(BatchRecord {
            mean_pop_reward: pop_sum / e as f64,
            equality: eq_sum / e as f64,
            env_reward_total: env_sum.iter().sum(),
            credo_reward_total: credo_sum.iter().sum(),
            agents: (0..n)
                .map(|i| AgentBatch {
                    apples: apples[i],
                    cleans: cleans[i],
                    credo: credos[i],
                    batch_reward: batch_rewards[i],
                })
                .collect(),
        });

        if let Some(t) = tuner.as_mut() {
            t.boundary(&batch_rewards);
            credos = t.credos();
        }
    }

    Ok(TrialRecord {
        trial_index,
        seed: seeds.trial,
        batches,
        checkpoint: TrialCheckpoint {
            trial_index,
            seed: seeds.trial,
            behavior_q: learners.iter().map(|l| l.q_table().clone()).collect(),
            credo_q: tuner.as_ref().map(CredoTuner::q_tables).unwrap_or_default(),
            final_credos: credos,
        },
    })
}

/// High-level loop only: each batch every agent draws one bandit reward for
/// its current credo.
fn run_bandit(
    config: &ExperimentConfig,
    trial_index: usize,
    seeds: &TrialSeeds,
    bandit: &CredoResponseBandit,
) -> Result<TrialRecord> {
    let n = config.num_agents;
    let d = config.divisions()?;
    let mut credos = config.credos()?;
    let mut tuner = match config.credo_mode {
        CredoMode::Tuning => Some(CredoTuner::new(config, &credos, &seeds.credo)?),
        CredoMode::Static => None,
    };
    let mut env_rng = ChaCha8Rng::seed_from_u64(seeds.env);
    let mut batches = Vec::with_capacity(config.total_batches);

    for _ in 0..config.total_batches {
        let rewards = credos
            .iter()
            .map(|cr| Ok(bandit.batch_reward(&LatticePoint::from_credo(cr, d)?, &mut env_rng)))
            .collect::<Result<Vec<f64>>>()?;
        let total: f64 = rewards.iter().sum();
        batches.push(BatchRecord {
            mean_pop_reward: mean_population_reward(&rewards),
            equality: inverse_gini(&rewards, MeanZeroConvention::FullEquality)?.value(),
            env_reward_total: total,
            credo_reward_total: total,
            agents: (0..n)
                .map(|i| AgentBatch {
                    apples: 0,
                    cleans: 0,
                    credo: credos[i],
                    batch_reward: rewards[i],
                })
                .collect(),
        });
        if let Some(t) = tuner.as_mut() {
            t.boundary(&rewards);
            credos = t.credos();
        }
    }

    Ok(TrialRecord {
        trial_index,
        seed: seeds.trial,
        batches,
        checkpoint: TrialCheckpoint {
            trial_index,
            seed: seeds.trial,
            behavior_q: Vec::new(),
            credo_q: tuner.as_ref().map(CredoTuner::q_tables).unwrap_or_default(),
            final_credos: credos,
        },
    })
}
