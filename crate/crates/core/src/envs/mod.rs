//! Environments stepped by the trial loop.

mod bandit;
mod cleanup;

pub use bandit::{bandit_batch_reward, BanditConfig, CredoResponseBandit};
pub use cleanup::{
    Action, CleanupConfig, ColumnRange, Direction, Features, MiniCleanup, Zone, NUM_ACTIONS,
};

/// Sizes of a multi-agent environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvDescriptor {
    pub num_agents: usize,
    pub num_actions: usize,
    pub observation_space_size: usize,
    pub episode_length: usize,
}

/// Outcome of one joint action.
#[derive(Debug, Clone, PartialEq)]
pub struct JointStep {
    pub observations: Vec<usize>,
    pub rewards: Vec<f64>,
    /// Agents whose clean action reached at least one river cell.
    pub cleaned: Vec<bool>,
    pub done: bool,
}

pub trait Environment: Send {
    fn descriptor(&self) -> EnvDescriptor;

    /// Returns every agent's initial observation index. The new state is a
    /// pure function of the configuration and `seed`.
    fn reset(&mut self, seed: u64) -> Vec<usize>;

    /// Panics if an action index is out of range.
    fn step(&mut self, joint_actions: &[usize]) -> JointStep;
}
