//! Per-algorithm hyperparameters with their defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default exploration decay: epsilon reaches 1% after 80% of the session.
pub fn default_decay(episodes: u64) -> f64 {
    if episodes == 0 {
        return 1.0;
    }
    0.01f64.powf(1.0 / (0.8 * episodes as f64))
}

fn hidden() -> Vec<usize> {
    vec![64, 64]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QlConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub value_bins: usize,
    pub eps_max: f64,
    /// Derived from the session length when absent.
    pub decay_rate: Option<f64>,
}

impl Default for QlConfig {
    fn default() -> Self {
        Self { alpha: 0.1, gamma: 0.99, value_bins: 11, eps_max: 1.0, decay_rate: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub buffer: usize,
    pub batch: usize,
    pub sync_every: u64,
    pub warmup: u64,
    pub eps_max: f64,
    pub decay_rate: Option<f64>,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self { hidden: hidden(), lr: 1e-4, buffer: 50_000, batch: 64, sync_every: 1_000, warmup: 1_000, eps_max: 1.0, decay_rate: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VpgConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub value_bins: usize,
}

impl Default for VpgConfig {
    fn default() -> Self {
        Self { alpha: 0.1, gamma: 0.99, value_bins: 11 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DpgConfig {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub batch: usize,
    pub entropy_coef: f64,
}

impl Default for DpgConfig {
    fn default() -> Self {
        Self { hidden: hidden(), lr: 3e-4, batch: 256, entropy_coef: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct A2cConfig {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub batch: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
}

impl Default for A2cConfig {
    fn default() -> Self {
        Self { hidden: hidden(), lr: 7e-4, batch: 5, value_coef: 0.5, entropy_coef: 0.01, max_grad_norm: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub rollout: usize,
    pub epochs: usize,
    pub minibatch: usize,
    pub clip: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            hidden: hidden(),
            lr: 3e-4,
            rollout: 2_048,
            epochs: 10,
            minibatch: 64,
            clip: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.0,
            max_grad_norm: 0.5,
        }
    }
}

/// Hyperparameters for every algorithm.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperParams {
    pub ql: QlConfig,
    pub dqn: DqnConfig,
    pub vpg: VpgConfig,
    pub dpg: DpgConfig,
    pub a2c: A2cConfig,
    pub ppo: PpoConfig,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Config(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

fn unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Config(format!("{name} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

fn nonzero(name: &str, x: usize) -> Result<()> {
    if x == 0 {
        return Err(Error::Config(format!("{name} must be at least 1")));
    }
    Ok(())
}

impl HyperParams {
    /// Fill derived defaults for a session of `episodes` episodes.
    pub fn materialize(&mut self, episodes: u64) {
        let d = default_decay(episodes);
        self.ql.decay_rate.get_or_insert(d);
        self.dqn.decay_rate.get_or_insert(d);
    }

    pub fn validate(&self) -> Result<()> {
        let q = &self.ql;
        unit_interval("ql.alpha", q.alpha)?;
        unit_interval("ql.gamma", q.gamma)?;
        unit_interval("ql.eps_max", q.eps_max)?;
        if let Some(d) = q.decay_rate {
            unit_interval("ql.decay_rate", d)?;
        }
        if q.value_bins < 2 {
            return Err(Error::Config("ql.value_bins must be at least 2".into()));
        }
        let d = &self.dqn;
        positive("dqn.lr", d.lr)?;
        nonzero("dqn.batch", d.batch)?;
        nonzero("dqn.sync_every", d.sync_every as usize)?;
        if d.buffer < d.batch {
            return Err(Error::Config("dqn.buffer must hold at least one batch".into()));
        }
        unit_interval("dqn.eps_max", d.eps_max)?;
        if let Some(r) = d.decay_rate {
            unit_interval("dqn.decay_rate", r)?;
        }
        let v = &self.vpg;
        positive("vpg.alpha", v.alpha)?;
        unit_interval("vpg.gamma", v.gamma)?;
        if v.value_bins < 2 {
            return Err(Error::Config("vpg.value_bins must be at least 2".into()));
        }
        positive("dpg.lr", self.dpg.lr)?;
        nonzero("dpg.batch", self.dpg.batch)?;
        positive("a2c.lr", self.a2c.lr)?;
        nonzero("a2c.batch", self.a2c.batch)?;
        let p = &self.ppo;
        positive("ppo.lr", p.lr)?;
        nonzero("ppo.rollout", p.rollout)?;
        nonzero("ppo.epochs", p.epochs)?;
        nonzero("ppo.minibatch", p.minibatch)?;
        if !(p.clip > 0.0 && p.clip < 1.0) {
            return Err(Error::Config(format!("ppo.clip must lie in (0, 1), got {}", p.clip)));
        }
        for h in [&self.dqn.hidden, &self.dpg.hidden, &self.a2c.hidden, &self.ppo.hidden] {
            if h.contains(&0) {
                return Err(Error::Config("hidden layer widths must be positive".into()));
            }
        }
        Ok(())
    }
}
