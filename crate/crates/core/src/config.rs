//! Experiment configuration files.
//!
//! ```toml
//! out_dir = "runs"
//!
//! [scenario]
//! rule = "dp"
//! supply = 4
//! episodes = 100000
//! master_seed = 7
//!
//! [[roster]]
//! algo = "ppo"
//! checkpoint = "runs/dp_4_ppo_7/checkpoint.bin"
//! mode = "freeze"
//!
//! [hyper.ppo]
//! rollout = 1024
//! ```
//!
//! Omitted keys take their defaults; unknown keys are rejected. A run saves
//! the materialized form, with every default and derived value written out.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{Algo, HyperParams, Mode};
use crate::error::{Error, Result};
use crate::harness::{Seat, Source};
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeatConfig {
    pub algo: Algo,
    /// Start from this checkpoint; a fresh agent when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    #[serde(default)]
    pub mode: Mode,
}

impl SeatConfig {
    pub fn seat(&self) -> Seat {
        Seat {
            algo: self.algo,
            source: self.checkpoint.clone().map_or(Source::Fresh, Source::Checkpoint),
            mode: self.mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    pub scenario: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roster: Vec<SeatConfig>,
    #[serde(default)]
    pub hyper: HyperParams,
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self { out_dir: default_out(), scenario, roster: Vec::new(), hyper: HyperParams::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.hyper.validate()?;
        if !self.roster.is_empty() && self.roster.len() != self.scenario.n_bidders {
            return Err(Error::Config(format!("roster lists {} bidders, scenario has {}", self.roster.len(), self.scenario.n_bidders)));
        }
        Ok(())
    }

    /// Copy with derived defaults filled in.
    pub fn materialized(&self) -> Self {
        let mut c = self.clone();
        c.hyper.materialize(c.scenario.episodes);
        c
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Write the materialized snapshot.
    pub fn save_snapshot(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.materialized().to_toml()?)?;
        Ok(())
    }
}
