//! A synthetic environment whose only signal is how close each agent's credo
//! sits to a hidden target. Used to check the credo policy in isolation.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{EnvDescriptor, Environment, JointStep};
use crate::credo::CredoVector;
use crate::credo_policy::LatticePoint;
use crate::error::{Error, Result};

/// `1 - L1(current, target) / 2` plus Gaussian noise.
pub fn bandit_batch_reward<R: Rng + ?Sized>(
    target: &LatticePoint,
    current: &LatticePoint,
    noise_sigma: f64,
    rng: &mut R,
) -> f64 {
    let mean = 1.0 - current.l1_distance(target) / 2.0;
    if noise_sigma > 0.0 {
        let noise = Normal::new(0.0, noise_sigma).expect("finite positive sigma");
        mean + noise.sample(rng)
    } else {
        mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BanditConfig {
    pub target: CredoVector,
    pub noise_sigma: f64,
}

impl Default for BanditConfig {
    fn default() -> Self {
        BanditConfig {
            target: CredoVector::new(0.8, 0.2, 0.0).expect("valid credo"),
            noise_sigma: 0.05,
        }
    }
}

impl BanditConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::config(
                "env.noise_sigma",
                format!("{} is not a finite non-negative number", self.noise_sigma),
            ));
        }
        Ok(())
    }
}

/// Stateless: one observation, one action, zero environmental reward.
/// Credo feedback comes from [`CredoResponseBandit::batch_reward`].
#[derive(Debug, Clone)]
pub struct CredoResponseBandit {
    target: LatticePoint,
    noise_sigma: f64,
    num_agents: usize,
}

impl CredoResponseBandit {
    pub fn new(config: &BanditConfig, divisions: u32, num_agents: usize) -> Result<Self> {
        config.validate()?;
        let target = LatticePoint::from_credo(&config.target, divisions).map_err(|_| {
            Error::config(
                "env.target",
                format!("{} is not on the credo lattice", config.target),
            )
        })?;
        Ok(CredoResponseBandit {
            target,
            noise_sigma: config.noise_sigma,
            num_agents,
        })
    }

    pub fn target(&self) -> LatticePoint {
        self.target
    }

    pub fn batch_reward<R: Rng + ?Sized>(&self, current: &LatticePoint, rng: &mut R) -> f64 {
        bandit_batch_reward(&self.target, current, self.noise_sigma, rng)
    }
}

impl Environment for CredoResponseBandit {
    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            num_agents: self.num_agents,
            num_actions: 1,
            observation_space_size: 1,
            episode_length: 1,
        }
    }

    fn reset(&mut self, _seed: u64) -> Vec<usize> {
        vec![0; self.num_agents]
    }

    fn step(&mut self, joint_actions: &[usize]) -> JointStep {
        assert!(joint_actions.iter().all(|&a| a == 0), "bandit has a single action");
        JointStep {
            observations: vec![0; self.num_agents],
            rewards: vec![0.0; self.num_agents],
            cleaned: vec![false; self.num_agents],
            done: true,
        }
    }
}
