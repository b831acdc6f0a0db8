//! Independent tabular Q-learners used as the low-level behavioral policy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense `states x actions` table of action values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    states: usize,
    actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn zeros(states: usize, actions: usize) -> Self {
        QTable::filled(states, actions, 0.0)
    }

    pub fn filled(states: usize, actions: usize, value: f64) -> Self {
        QTable {
            states,
            actions,
            values: vec![value; states * actions],
        }
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn num_actions(&self) -> usize {
        self.actions
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.actions..(state + 1) * self.actions]
    }

    pub fn row_mut(&mut self, state: usize) -> &mut [f64] {
        &mut self.values[state * self.actions..(state + 1) * self.actions]
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.actions + action] = value;
    }

    pub fn max(&self, state: usize) -> f64 {
        self.row(state).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action; ties go to the lowest index.
    pub fn greedy(&self, state: usize) -> usize {
        argmax(self.row(state))
    }

    /// One-step Q-learning backup toward `target`.
    pub fn backup(&mut self, state: usize, action: usize, alpha: f64, target: f64) {
        let q = &mut self.values[state * self.actions + action];
        *q += alpha * (target - *q);
    }
}

/// Index of the largest value, first one on ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Steps over which epsilon decays linearly from start to end.
    pub epsilon_decay_steps: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            alpha: 0.1,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 100_000,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config("learner.alpha", format!("{} not in (0, 1]", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config("learner.gamma", format!("{} not in [0, 1)", self.gamma)));
        }
        for (field, v) in [
            ("learner.epsilon_start", self.epsilon_start),
            ("learner.epsilon_end", self.epsilon_end),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(field, format!("{v} not in [0, 1]")));
            }
        }
        if self.epsilon_end > self.epsilon_start {
            return Err(Error::config(
                "learner.epsilon_end",
                "must not exceed epsilon_start",
            ));
        }
        if self.epsilon_decay_steps == 0 {
            return Err(Error::config("learner.epsilon_decay_steps", "must be positive"));
        }
        Ok(())
    }

    pub fn epsilon_at(&self, step: u64) -> f64 {
        let frac = (step as f64 / self.epsilon_decay_steps as f64).min(1.0);
        self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub obs: usize,
    pub action: usize,
    pub credo_reward: f64,
    pub next_obs: usize,
    pub terminal: bool,
}

/// Epsilon-greedy tabular Q-learner for one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct QLearner {
    config: LearnerConfig,
    q: QTable,
    steps: u64,
}

impl QLearner {
    pub fn new(config: LearnerConfig, num_states: usize, num_actions: usize) -> Self {
        QLearner {
            config,
            q: QTable::zeros(num_states, num_actions),
            steps: 0,
        }
    }

    pub fn q_table(&self) -> &QTable {
        &self.q
    }

    pub fn q_table_mut(&mut self) -> &mut QTable {
        &mut self.q
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn epsilon(&self) -> f64 {
        self.config.epsilon_at(self.steps)
    }

    pub fn select_action<R: Rng + ?Sized>(&self, obs: usize, rng: &mut R) -> usize {
        let eps = self.epsilon();
        // Draw only when exploration is possible so a greedy learner
        // consumes no randomness.
        if eps > 0.0 && rng.random::<f64>() < eps {
            rng.random_range(0..self.q.num_actions() as u32) as usize
        } else {
            self.q.greedy(obs)
        }
    }

    pub fn update(&mut self, t: &Transition) {
        let bootstrap = if t.terminal { 0.0 } else { self.q.max(t.next_obs) };
        let target = t.credo_reward + self.config.gamma * bootstrap;
        self.q.backup(t.obs, t.action, self.config.alpha, target);
        self.steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn greedy_config(alpha: f64, gamma: f64) -> LearnerConfig {
        LearnerConfig {
            alpha,
            gamma,
            epsilon_start: 0.0,
            epsilon_end: 0.0,
            epsilon_decay_steps: 1,
        }
    }

    #[test]
    fn greedy_selection_and_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut l = QLearner::new(greedy_config(0.1, 0.9), 3, 6);
        assert_eq!(l.select_action(0, &mut rng), 0);
        l.q_table_mut().row_mut(1).copy_from_slice(&[0.0, 5.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(l.select_action(1, &mut rng), 1);
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn uniform_exploration() {
        let cfg = LearnerConfig {
            epsilon_start: 1.0,
            epsilon_end: 1.0,
            ..greedy_config(0.1, 0.9)
        };
        let l = QLearner::new(cfg, 1, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 10_000;
        let mut counts = [0usize; 6];
        for _ in 0..draws {
            counts[l.select_action(0, &mut rng)] += 1;
        }
        let p = 1.0 / 6.0;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() <= 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn update_rule() {
        let mut l = QLearner::new(greedy_config(0.5, 0.9), 2, 2);
        let t = |r: f64, terminal: bool| Transition {
            obs: 0,
            action: 1,
            credo_reward: r,
            next_obs: 1,
            terminal,
        };
        l.update(&t(0.0, false));
        assert_eq!(l.q_table().get(0, 1), 0.0);
        l.update(&t(1.0, true));
        assert_eq!(l.q_table().get(0, 1), 0.5);

        let mut full = QLearner::new(greedy_config(1.0, 0.9), 2, 2);
        full.update(&t(-2.0, true));
        assert_eq!(full.q_table().get(0, 1), -2.0);

        // non-terminal bootstraps from the next state's best action
        full.q_table_mut().set(1, 0, 10.0);
        full.update(&t(1.0, false));
        assert!((full.q_table().get(0, 1) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn epsilon_schedule() {
        let cfg = LearnerConfig::default();
        assert_eq!(cfg.epsilon_at(0), 1.0);
        assert!((cfg.epsilon_at(50_000) - 0.525).abs() < 1e-12);
        assert!((cfg.epsilon_at(100_000) - 0.05).abs() < 1e-12);
        assert!((cfg.epsilon_at(1_000_000) - 0.05).abs() < 1e-12);
        assert!(cfg.validate().is_ok());
        assert!(LearnerConfig { gamma: 1.0, ..cfg.clone() }.validate().is_err());
        assert!(LearnerConfig { alpha: 0.0, ..cfg.clone() }.validate().is_err());
        assert!(LearnerConfig { epsilon_end: 1.0, epsilon_start: 0.5, ..cfg }.validate().is_err());
    }

    #[test]
    fn q_values_stay_bounded() {
        // Random rewards in [-1, 1] on a random 5-state MDP never push |Q|
        // past R_max / (1 - gamma).
        let gamma = 0.9;
        let cfg = LearnerConfig {
            epsilon_start: 1.0,
            epsilon_end: 1.0,
            ..greedy_config(0.3, gamma)
        };
        let mut l = QLearner::new(cfg, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = 0;
        for _ in 0..20_000 {
            let a = l.select_action(s, &mut rng);
            let next = rng.random_range(0..5u32) as usize;
            let r = rng.random_range(-1.0..=1.0);
            l.update(&Transition { obs: s, action: a, credo_reward: r, next_obs: next, terminal: false });
            s = next;
        }
        let bound = 1.0 / (1.0 - gamma);
        for st in 0..5 {
            assert!(l.q_table().row(st).iter().all(|q| q.is_finite() && q.abs() <= bound));
        }
    }

    /// Two-state chain: action 0 stays, action 1 switches. Being in state 1
    /// pays 1 per step. Value iteration says: switch from 0, stay in 1.
    #[test]
    fn chain_mdp_matches_value_iteration() {
        let gamma = 0.9;
        let next = |s: usize, a: usize| if a == 0 { s } else { 1 - s };
        let reward = |s: usize, a: usize| if next(s, a) == 1 { 1.0 } else { 0.0 };

        let mut v = [0.0f64; 2];
        for _ in 0..1000 {
            v = [0, 1].map(|s| {
                (0..2)
                    .map(|a| reward(s, a) + gamma * v[next(s, a)])
                    .fold(f64::NEG_INFINITY, f64::max)
            });
        }
        let optimal = [0, 1].map(|s| {
            argmax(&[0, 1].map(|a| reward(s, a) + gamma * v[next(s, a)]))
        });

        let mut l = QLearner::new(greedy_config(0.5, gamma), 2, 2);
        for _ in 0..2000 {
            for s in 0..2 {
                for a in 0..2 {
                    l.update(&Transition {
                        obs: s,
                        action: a,
                        credo_reward: reward(s, a),
                        next_obs: next(s, a),
                        terminal: false,
                    });
                }
            }
        }
        assert_eq!([l.q_table().greedy(0), l.q_table().greedy(1)], optimal);
        assert_eq!(optimal, [1, 0]);
        for (s, value) in v.iter().enumerate() {
            assert!((l.q_table().max(s) - value).abs() < 1e-6);
        }
    }
}
