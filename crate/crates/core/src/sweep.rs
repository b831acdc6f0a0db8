//! Sweeps over initial credos: one experiment per lattice point.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::credo::CredoVector;
use crate::credo_policy::{enumerate_lattice, LatticePoint};
use crate::error::{Error, Result};
use crate::harness::{run_experiment, Execution, ExperimentConfig};
use crate::metrics::{ci95_half_width, mean_population_reward};

pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Experiment config, relative to the sweep file.
    pub base_config: PathBuf,
    /// Initial credos to sweep; every lattice point when absent.
    #[serde(default)]
    pub points: Option<Vec<[f64; 3]>>,
    /// Overrides the base config's trial count.
    #[serde(default)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub psi: f64,
    pub phi: f64,
    pub omega: f64,
    pub mean_final_reward: f64,
    pub ci95: f64,
    pub equality_final: f64,
}

/// A parsed sweep with its base config loaded and its points resolved.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub base: ExperimentConfig,
    pub points: Vec<LatticePoint>,
}

impl Sweep {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let spec: SweepSpec = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base_path = path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&spec.base_config);
        let base = ExperimentConfig::load(&base_path, &[])?;
        Sweep::new(base, spec.points.as_deref(), spec.trials)
    }

    pub fn new(mut base: ExperimentConfig, points: Option<&[[f64; 3]]>, trials: Option<usize>) -> Result<Self> {
        if let Some(t) = trials {
            base.trials = t;
        }
        base.validate()?;
        let d = base.divisions()?;
        let points = match points {
            None => enumerate_lattice(base.credo_policy.resolution)?,
            Some(raw) => {
                let mut out: Vec<LatticePoint> = Vec::with_capacity(raw.len());
                for (k, w) in raw.iter().enumerate() {
                    let field = format!("points[{k}]");
                    let cr = CredoVector::try_from(*w)
                        .map_err(|v| Error::config(field.clone(), v.to_string()))?;
                    let p = LatticePoint::from_credo(&cr, d)
                        .map_err(|_| Error::config(field.clone(), format!("{cr} is not a lattice point")))?;
                    if out.contains(&p) {
                        return Err(Error::config(field, format!("duplicate sweep cell {cr}")));
                    }
                    out.push(p);
                }
                out
            }
        };
        if points.is_empty() {
            return Err(Error::config("points", "sweep has no points"));
        }
        Ok(Sweep { base, points })
    }

    pub fn run(&self, exec: Execution) -> Result<Vec<SweepRow>> {
        self.points
            .iter()
            .map(|p| {
                let cr = p.to_credo();
                let cfg = ExperimentConfig {
                    initial_credos: vec![cr.as_array()],
                    ..self.base.clone()
                };
                let result = run_experiment(&cfg, exec)?;
                log::info!("sweep cell {cr}: median final reward {}", result.summary.final_reward_median);
                let rewards = result.summary.final_rewards();
                Ok(SweepRow {
                    psi: cr.self_weight(),
                    phi: cr.team_weight(),
                    omega: cr.system_weight(),
                    mean_final_reward: mean_population_reward(&rewards),
                    ci95: ci95_half_width(&rewards),
                    equality_final: mean_population_reward(&result.summary.final_equalities()),
                })
            })
            .collect()
    }
}
