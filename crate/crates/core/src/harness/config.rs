use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::credo::{validate_credo, CredoVector, TeamStructure};
use crate::credo_policy::{divisions_for, CredoPolicyConfig, LatticePoint};
use crate::envs::{BanditConfig, CleanupConfig};
use crate::error::{Error, Result};
use crate::learners::LearnerConfig;
use crate::metrics::DEFAULT_DOMINANCE_RATIO;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CredoMode {
    #[default]
    Static,
    Tuning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvConfig {
    Cleanup(CleanupConfig),
    Bandit(BanditConfig),
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig::Cleanup(CleanupConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub num_agents: usize,
    /// Teams are consecutive id blocks of this size.
    pub team_size: usize,
    pub credo_mode: CredoMode,
    /// One `[psi, phi, omega]` for everyone, or one per agent.
    pub initial_credos: Vec<[f64; 3]>,
    pub episodes_per_batch: usize,
    pub total_batches: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub dominance_ratio: f64,
    pub env: EnvConfig,
    pub learner: LearnerConfig,
    pub credo_policy: CredoPolicyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            num_agents: 6,
            team_size: 2,
            credo_mode: CredoMode::Static,
            initial_credos: vec![[0.0, 0.0, 1.0]],
            episodes_per_batch: 4,
            total_batches: 300,
            trials: 4,
            master_seed: 0,
            dominance_ratio: DEFAULT_DOMINANCE_RATIO,
            env: EnvConfig::default(),
            learner: LearnerConfig::default(),
            credo_policy: CredoPolicyConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_agents == 0 {
            return Err(Error::config("num_agents", "must be positive"));
        }
        self.team_structure()?;
        let n = self.initial_credos.len();
        if n != 1 && n != self.num_agents {
            return Err(Error::config(
                "initial_credos",
                format!("expected 1 or {} credos, got {n}", self.num_agents),
            ));
        }
        for (i, w) in self.initial_credos.iter().enumerate() {
            validate_credo(*w)
                .map_err(|v| Error::config(format!("initial_credos[{i}]"), v.to_string()))?;
        }
        if self.episodes_per_batch == 0 {
            return Err(Error::config("episodes_per_batch", "must be at least 1"));
        }
        if self.total_batches == 0 {
            return Err(Error::config("total_batches", "must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be positive"));
        }
        if self.dominance_ratio.is_nan() || self.dominance_ratio <= 1.0 {
            return Err(Error::config("dominance_ratio", "must exceed 1"));
        }
        self.learner.validate()?;
        self.credo_policy.validate()?;
        match &self.env {
            EnvConfig::Cleanup(c) => c.validate(self.num_agents)?,
            EnvConfig::Bandit(b) => {
                b.validate()?;
                LatticePoint::from_credo(&b.target, self.divisions()?).map_err(|_| {
                    Error::config("env.target", format!("{} is not on the credo lattice", b.target))
                })?;
            }
        }
        if self.credo_mode == CredoMode::Tuning {
            let d = self.divisions()?;
            for (i, cr) in self.credos()?.iter().enumerate().take(n) {
                LatticePoint::from_credo(cr, d).map_err(|_| {
                    Error::config(
                        format!("initial_credos[{i}]"),
                        format!(
                            "{cr} is not a multiple of credo_policy.resolution = {}",
                            self.credo_policy.resolution
                        ),
                    )
                })?;
            }
        }
        Ok(())
    }

    pub fn team_structure(&self) -> Result<TeamStructure> {
        TeamStructure::consecutive(self.num_agents, self.team_size)
    }

    /// Initial credo of every agent.
    pub fn credos(&self) -> Result<Vec<CredoVector>> {
        let parsed = self
            .initial_credos
            .iter()
            .enumerate()
            .map(|(i, w)| {
                CredoVector::try_from(*w)
                    .map_err(|v| Error::config(format!("initial_credos[{i}]"), v.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(if parsed.len() == 1 {
            vec![parsed[0]; self.num_agents]
        } else {
            parsed
        })
    }

    pub fn divisions(&self) -> Result<u32> {
        divisions_for(self.credo_policy.resolution)
    }

    pub fn episode_length(&self) -> usize {
        match &self.env {
            EnvConfig::Cleanup(c) => c.episode_length,
            EnvConfig::Bandit(_) => 1,
        }
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> std::result::Result<Self, String> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        toml::Value::Table(table)
            .try_into::<ExperimentConfig>()
            .map_err(|e| e.to_string())
    }

    /// Reads, overrides and validates a config file.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml_str(&text, overrides).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }
}

/// Applies `a.b.c=value`; the value is parsed as TOML and falls back to a
/// bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> std::result::Result<(), String> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override `{spec}` is not of the form key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("override `{spec}` has an empty key"));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));

    let parts: Vec<&str> = key.split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut cursor = table;
    for part in parents {
        let entry = cursor
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| format!("override `{key}`: `{part}` is not a table"))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let round = ExperimentConfig::from_toml_str(&cfg.to_toml_string(), &[]).unwrap();
        assert_eq!(round, cfg);
    }

    #[test]
    fn parses_a_minimal_file() {
        let text = r#"
            credo_mode = "tuning"
            initial_credos = [[0.0, 0.0, 1.0]]
            [env]
            kind = "cleanup"
            episode_length = 50
            [learner]
            alpha = 0.2
        "#;
        let cfg = ExperimentConfig::from_toml_str(text, &[]).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.credo_mode, CredoMode::Tuning);
        assert_eq!(cfg.episode_length(), 50);
        assert_eq!(cfg.learner.alpha, 0.2);
        assert_eq!(cfg.learner.gamma, 0.99);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "bogus = 1",
            "[learner]\nlr = 0.1",
            "[env]\nkind = \"cleanup\"\nwidth = 4",
            "[env]\nkind = \"bandit\"\nsigma = 0.1",
            "[credo_policy]\neps = 0.1",
        ] {
            assert!(ExperimentConfig::from_toml_str(text, &[]).is_err(), "{text}");
        }
    }

    #[test]
    fn bad_credo_sum_names_the_field() {
        let cfg = ExperimentConfig::from_toml_str("initial_credos = [[0.2, 0.5, 0.5]]", &[]).unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("initial_credos[0]"), "{msg}");
        assert!(msg.contains("credo sum"), "{msg}");
    }

    #[test]
    fn tuning_needs_lattice_credos() {
        let cfg = ExperimentConfig {
            credo_mode: CredoMode::Tuning,
            initial_credos: vec![[0.25, 0.25, 0.5]],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let ok = ExperimentConfig {
            credo_mode: CredoMode::Static,
            ..cfg
        };
        ok.validate().unwrap();
    }

    #[test]
    fn structural_errors() {
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().unwrap_err().to_string()
        };
        assert!(bad(|c| c.team_size = 4).contains("team_size"));
        assert!(bad(|c| c.episodes_per_batch = 0).contains("episodes_per_batch"));
        assert!(bad(|c| c.initial_credos = vec![[1.0, 0.0, 0.0]; 2]).contains("initial_credos"));
        assert!(bad(|c| c.learner.gamma = 1.0).contains("learner.gamma"));
        assert!(bad(|c| c.credo_policy.resolution = 0.3).contains("resolution"));
    }

    #[test]
    fn overrides() {
        let cfg = ExperimentConfig::from_toml_str(
            "",
            &[
                "master_seed=7".into(),
                "env.kind=bandit".into(),
                "env.noise_sigma=0.0".into(),
                "credo_mode=tuning".into(),
                "initial_credos=[[0.0,1.0,0.0]]".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.master_seed, 7);
        assert!(matches!(cfg.env, EnvConfig::Bandit(ref b) if b.noise_sigma == 0.0));
        assert_eq!(cfg.credo_mode, CredoMode::Tuning);
        assert_eq!(cfg.credos().unwrap()[5], CredoVector::TEAM_FOCUSED);
        assert!(ExperimentConfig::from_toml_str("", &["nonsense".into()]).is_err());
        assert!(ExperimentConfig::from_toml_str("", &["not_a_key=1".into()]).is_err());
    }
}
