//! Credo vectors, team structures and credo-based reward redistribution.
//!
//! Each agent splits its attention between three reward channels: its own
//! environmental reward, a pot collected by its team, and a pot collected by
//! the whole system. A pot is the credo-weighted sum of its members' rewards
//! and is handed back to the members in proportion to their weight on that
//! channel, so every unit of environmental reward is re-allocated exactly once.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

/// Absolute tolerance for the simplex constraint.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// One of the three reward channels an agent can weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    SelfFocus,
    Team,
    System,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::SelfFocus, Channel::Team, Channel::System];

    pub fn index(self) -> usize {
        match self {
            Channel::SelfFocus => 0,
            Channel::Team => 1,
            Channel::System => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::SelfFocus => "psi",
            Channel::Team => "phi",
            Channel::System => "omega",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CredoViolation {
    #[error("{channel} = {value} lies outside [0, 1]")]
    OutOfRange { channel: Channel, value: f64 },
    #[error("credo sum psi + phi + omega = {sum}, expected 1 (off by {deviation:e})")]
    SumNotOne { sum: f64, deviation: f64 },
}

/// Checks raw weights against the simplex constraints.
pub fn validate_credo(weights: [f64; 3]) -> Result<(), CredoViolation> {
    for channel in Channel::ALL {
        let value = weights[channel.index()];
        if !(0.0..=1.0).contains(&value) {
            return Err(CredoViolation::OutOfRange { channel, value });
        }
    }
    let sum: f64 = weights.iter().sum();
    let deviation = (sum - 1.0).abs();
    if deviation > SIMPLEX_TOLERANCE {
        return Err(CredoViolation::SumNotOne { sum, deviation });
    }
    Ok(())
}

/// An agent's weights on the self, team and system channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct CredoVector {
    weights: [f64; 3],
}

impl CredoVector {
    pub const SELF_FOCUSED: CredoVector = CredoVector {
        weights: [1.0, 0.0, 0.0],
    };
    pub const TEAM_FOCUSED: CredoVector = CredoVector {
        weights: [0.0, 1.0, 0.0],
    };
    pub const SYSTEM_FOCUSED: CredoVector = CredoVector {
        weights: [0.0, 0.0, 1.0],
    };

    pub fn new(self_weight: f64, team_weight: f64, system_weight: f64) -> Result<Self, CredoViolation> {
        let weights = [self_weight, team_weight, system_weight];
        validate_credo(weights)?;
        Ok(CredoVector { weights })
    }

    pub fn self_weight(&self) -> f64 {
        self.weights[0]
    }

    pub fn team_weight(&self) -> f64 {
        self.weights[1]
    }

    pub fn system_weight(&self) -> f64 {
        self.weights[2]
    }

    pub fn weight(&self, channel: Channel) -> f64 {
        self.weights[channel.index()]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.weights
    }
}

impl TryFrom<[f64; 3]> for CredoVector {
    type Error = CredoViolation;

    fn try_from(w: [f64; 3]) -> Result<Self, Self::Error> {
        CredoVector::new(w[0], w[1], w[2])
    }
}

impl From<CredoVector> for [f64; 3] {
    fn from(cr: CredoVector) -> Self {
        cr.weights
    }
}

impl fmt::Display for CredoVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{}, {}, {}>",
            self.weights[0], self.weights[1], self.weights[2]
        )
    }
}

/// Partition of agents `0..num_agents` into disjoint, non-empty teams.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TeamStructure {
    num_agents: usize,
    teams: Vec<Vec<usize>>,
    team_of: Vec<usize>,
}

impl TeamStructure {
    pub fn new(num_agents: usize, teams: Vec<Vec<usize>>) -> Result<Self> {
        if num_agents == 0 {
            return Err(Error::config("num_agents", "population must be non-empty"));
        }
        let mut team_of = vec![usize::MAX; num_agents];
        for (t, members) in teams.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::config("teams", format!("team {t} is empty")));
            }
            for &agent in members {
                if agent >= num_agents {
                    return Err(Error::UnknownAgent { agent, num_agents });
                }
                if team_of[agent] != usize::MAX {
                    return Err(Error::config(
                        "teams",
                        format!("agent {agent} belongs to teams {} and {t}", team_of[agent]),
                    ));
                }
                team_of[agent] = t;
            }
        }
        if let Some(agent) = team_of.iter().position(|&t| t == usize::MAX) {
            return Err(Error::config(
                "teams",
                format!("agent {agent} is not on any team"),
            ));
        }
        Ok(TeamStructure {
            num_agents,
            teams,
            team_of,
        })
    }

    /// Consecutive blocks `{0..k}, {k..2k}, ...`.
    pub fn consecutive(num_agents: usize, team_size: usize) -> Result<Self> {
        if team_size == 0 || !num_agents.is_multiple_of(team_size) {
            return Err(Error::config(
                "team_size",
                format!("{num_agents} agents cannot be split into teams of {team_size}"),
            ));
        }
        let teams = (0..num_agents / team_size)
            .map(|t| (t * team_size..(t + 1) * team_size).collect())
            .collect();
        TeamStructure::new(num_agents, teams)
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_teams(&self) -> usize {
        self.teams.len()
    }

    pub fn teams(&self) -> &[Vec<usize>] {
        &self.teams
    }

    pub fn members(&self, team: usize) -> &[usize] {
        &self.teams[team]
    }

    pub fn team_of(&self, agent: usize) -> usize {
        self.team_of[agent]
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Team pot: `sum over j in team of phi_j * R_j`.
pub fn team_pot(team: &[usize], credos: &[CredoVector], env_rewards: &[f64]) -> Result<f64> {
    check_len(credos.len(), env_rewards.len())?;
    team.iter().try_fold(0.0, |acc, &j| {
        if j >= credos.len() {
            return Err(Error::UnknownAgent {
                agent: j,
                num_agents: credos.len(),
            });
        }
        Ok(acc + credos[j].team_weight() * env_rewards[j])
    })
}

/// System pot: `sum over all j of omega_j * R_j`.
pub fn system_pot(credos: &[CredoVector], env_rewards: &[f64]) -> Result<f64> {
    check_len(credos.len(), env_rewards.len())?;
    Ok(credos
        .iter()
        .zip(env_rewards)
        .map(|(cr, r)| cr.system_weight() * r)
        .sum())
}

/// Credo-based rewards for one timestep.
pub fn redistribute(
    structure: &TeamStructure,
    credos: &[CredoVector],
    env_rewards: &[f64],
) -> Result<Vec<f64>> {
    let plan = RedistributionPlan::new(structure, credos)?;
    let mut out = vec![0.0; env_rewards.len()];
    plan.apply(env_rewards, &mut out)?;
    Ok(out)
}

/// Redistribution shares precomputed for a fixed set of credos.
///
/// Credos only change at batch boundaries, so the trial loop builds one plan
/// per batch and applies it every step.
#[derive(Debug, Clone)]
pub struct RedistributionPlan {
    credos: Vec<CredoVector>,
    team_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    team_share: Vec<f64>,
    system_share: Vec<f64>,
    team_pots: Vec<f64>,
}

impl RedistributionPlan {
    pub fn new(structure: &TeamStructure, credos: &[CredoVector]) -> Result<Self> {
        check_len(structure.num_agents(), credos.len())?;
        let team_totals: Vec<f64> = structure
            .teams()
            .iter()
            .map(|m| m.iter().map(|&j| credos[j].team_weight()).sum())
            .collect();
        let system_total: f64 = credos.iter().map(CredoVector::system_weight).sum();

        // A zero-weight channel has a zero pot, so it pays nothing out.
        let share = |w: f64, total: f64| if total > 0.0 { w / total } else { 0.0 };
        let team_share = (0..credos.len())
            .map(|i| share(credos[i].team_weight(), team_totals[structure.team_of(i)]))
            .collect();
        let system_share = credos
            .iter()
            .map(|cr| share(cr.system_weight(), system_total))
            .collect();

        Ok(RedistributionPlan {
            credos: credos.to_vec(),
            team_of: (0..credos.len()).map(|i| structure.team_of(i)).collect(),
            members: structure.teams().to_vec(),
            team_share,
            system_share,
            team_pots: vec![0.0; structure.num_teams()],
        })
    }

    pub fn credos(&self) -> &[CredoVector] {
        &self.credos
    }

    /// Writes `R_i^cr` for every agent into `out`.
    pub fn apply(&self, env_rewards: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.credos.len(), env_rewards.len())?;
        check_len(self.credos.len(), out.len())?;
        let pots: Vec<f64> = self
            .members
            .iter()
            .map(|m| m.iter().map(|&j| self.credos[j].team_weight() * env_rewards[j]).sum())
            .collect();
        self.write(env_rewards, &pots, out);
        Ok(())
    }

    /// Allocation-free variant of [`apply`](Self::apply) for the step loop.
    pub fn apply_in_place(&mut self, env_rewards: &[f64], out: &mut [f64]) {
        assert_eq!(env_rewards.len(), self.credos.len());
        assert_eq!(out.len(), self.credos.len());
        let mut pots = std::mem::take(&mut self.team_pots);
        for (pot, members) in pots.iter_mut().zip(&self.members) {
            *pot = members
                .iter()
                .map(|&j| self.credos[j].team_weight() * env_rewards[j])
                .sum();
        }
        self.write(env_rewards, &pots, out);
        self.team_pots = pots;
    }

    fn write(&self, env_rewards: &[f64], team_pots: &[f64], out: &mut [f64]) {
        let system: f64 = self
            .credos
            .iter()
            .zip(env_rewards)
            .map(|(cr, r)| cr.system_weight() * r)
            .sum();
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.credos[i].self_weight() * env_rewards[i]
                + self.team_share[i] * team_pots[self.team_of[i]]
                + self.system_share[i] * system;
        }
    }
}

/// Environmental and credo-based rewards for one timestep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RewardLedger {
    pub env_rewards: Vec<f64>,
    pub credo_rewards: Vec<f64>,
}

impl RewardLedger {
    pub fn record(plan: &RedistributionPlan, env_rewards: &[f64]) -> Result<Self> {
        let mut credo_rewards = vec![0.0; env_rewards.len()];
        plan.apply(env_rewards, &mut credo_rewards)?;
        Ok(RewardLedger {
            env_rewards: env_rewards.to_vec(),
            credo_rewards,
        })
    }

    /// `|sum(R^cr) - sum(R)|`; zero up to rounding.
    pub fn conservation_gap(&self) -> f64 {
        let env: f64 = self.env_rewards.iter().sum();
        let credo: f64 = self.credo_rewards.iter().sum();
        (env - credo).abs()
    }
}
