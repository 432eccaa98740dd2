//! Bidder agents and the contract they share with the harness.

mod a2c;
mod config;
mod dpg;
mod dqn;
mod policy;
mod ppo;
mod ql;
mod random;
mod replay;
mod schedule;
mod vpg;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use a2c::{a2c_actor_loss_and_grad, a2c_critic_loss_and_grad, a2c_gradients, advantage, A2c, A2cGradients, A2cSample};
pub use config::{A2cConfig, DpgConfig, DqnConfig, HyperParams, PpoConfig, QlConfig, VpgConfig};
pub use dpg::{dpg_loss_and_grad, dpg_update, Dpg, PolicySample};
pub use dqn::{dqn_loss_and_grad, Dqn, DqnSample};
pub use policy::FactoredPolicy;
pub use ppo::{normalize_advantages, ppo_clip_objective, ppo_loss_and_grads, Ppo, PpoDiagnostics, PpoGradients, PpoLearner, PpoSample};
pub use ql::{q_update, QLearner, QTable};
pub use random::RandomBidder;
pub use replay::ReplayBuffer;
pub use schedule::EpsilonSchedule;
pub use vpg::{Vpg, VpgTable};

use crate::action::{ActionGrid, BidAction};
use crate::checkpoint::Checkpoint;
use crate::env::{Observation, Transition};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::scenario::ScenarioConfig;

/// Learning algorithm behind a bidder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Ql,
    Dqn,
    Vpg,
    #[serde(alias = "dpn")]
    Dpg,
    A2c,
    Ppo,
    Random,
}

impl Algo {
    /// The six learners, in tournament bidder-ID order (PPO is bidder 1).
    pub const TOURNAMENT: [Algo; 6] = [Algo::Ppo, Algo::A2c, Algo::Dqn, Algo::Dpg, Algo::Ql, Algo::Vpg];

    pub const LEARNERS: [Algo; 6] = [Algo::Ql, Algo::Dqn, Algo::Vpg, Algo::Dpg, Algo::A2c, Algo::Ppo];

    pub fn tag(self) -> u8 {
        match self {
            Algo::Ql => 0,
            Algo::Dqn => 1,
            Algo::Vpg => 2,
            Algo::Dpg => 3,
            Algo::A2c => 4,
            Algo::Ppo => 5,
            Algo::Random => 6,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        [Algo::Ql, Algo::Dqn, Algo::Vpg, Algo::Dpg, Algo::A2c, Algo::Ppo, Algo::Random].into_iter().find(|a| a.tag() == tag)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Ql => "ql",
            Algo::Dqn => "dqn",
            Algo::Vpg => "vpg",
            Algo::Dpg => "dpg",
            Algo::A2c => "a2c",
            Algo::Ppo => "ppo",
            Algo::Random => "random",
        }
    }

    /// Label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Algo::Ql => "QL",
            Algo::Dqn => "DQN",
            Algo::Vpg => "VPG",
            Algo::Dpg => "DPN",
            Algo::A2c => "A2C",
            Algo::Ppo => "PPO",
            Algo::Random => "RANDOM",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ql" => Ok(Algo::Ql),
            "dqn" => Ok(Algo::Dqn),
            "vpg" => Ok(Algo::Vpg),
            "dpg" | "dpn" => Ok(Algo::Dpg),
            "a2c" => Ok(Algo::A2c),
            "ppo" => Ok(Algo::Ppo),
            "random" => Ok(Algo::Random),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Train,
    Freeze,
}

/// Market facts every agent needs at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentContext {
    pub grid: ActionGrid,
    pub units: usize,
    pub value_lo: f64,
    pub value_hi: f64,
    /// Length of the session, used to derive default exploration decay.
    pub episodes: u64,
}

impl AgentContext {
    pub fn from_scenario(s: &ScenarioConfig) -> Result<Self> {
        Ok(Self {
            grid: ActionGrid::new(s.grid_levels, s.value_lo, s.value_hi)?,
            units: s.units_per_bidder,
            value_lo: s.value_lo,
            value_hi: s.value_hi,
            episodes: s.episodes,
        })
    }

    fn check_obs(&self, obs: &Observation) -> Result<()> {
        if obs.len() != self.units || obs.values.len() != self.units {
            return Err(Error::Shape(format!("observation of length {}, expected {}", obs.len(), self.units)));
        }
        Ok(())
    }

    fn require_pairs(&self, algo: Algo) -> Result<()> {
        if self.units != 2 {
            return Err(Error::Config(format!("{algo} uses the joint bid-pair table and needs exactly 2 units")));
        }
        Ok(())
    }

    /// Tabular state: the first-unit value binned into `bins` equal cells.
    pub fn value_bin(&self, obs: &Observation, bins: usize) -> usize {
        let frac = ((obs.value() - self.value_lo) / (self.value_hi - self.value_lo)).clamp(0.0, 1.0);
        ((frac * (bins - 1) as f64).floor() as usize).min(bins - 1)
    }
}

/// A bidder taking part in the auction.
pub trait Bidder: Send {
    fn algo(&self) -> Algo;

    fn mode(&self) -> Mode;

    fn set_mode(&mut self, mode: Mode);

    /// Choose bids for the observed values. `explore` enables the
    /// algorithm's exploration scheme where it has one.
    fn act(&mut self, obs: &Observation, explore: bool) -> Result<BidAction>;

    /// Feed back the completed episode. Frozen agents ignore it.
    fn learn(&mut self, transition: &Transition) -> Result<()>;

    fn checkpoint(&self) -> Checkpoint;
}

/// Build a fresh agent. `master_seed` and `index` pick its random streams.
pub fn build(algo: Algo, ctx: &AgentContext, hyper: &HyperParams, master_seed: u64, index: u64) -> Result<Box<dyn Bidder>> {
    let mut init = rng::stream(master_seed, Stream::Init, index);
    let act = rng::stream(master_seed, Stream::Agent, index);
    Ok(match algo {
        Algo::Random => Box::new(RandomBidder::new(*ctx, act)),
        Algo::Ql => Box::new(QLearner::new(*ctx, hyper.ql.clone(), act)?),
        Algo::Vpg => Box::new(Vpg::new(*ctx, hyper.vpg.clone(), act)?),
        Algo::Dqn => Box::new(Dqn::new(*ctx, hyper.dqn.clone(), &mut init, act, rng::stream(master_seed, Stream::Replay, index))?),
        Algo::Dpg => Box::new(Dpg::new(*ctx, hyper.dpg.clone(), &mut init, act)?),
        Algo::A2c => Box::new(A2c::new(*ctx, hyper.a2c.clone(), &mut init, act)?),
        Algo::Ppo => Box::new(Ppo::new(*ctx, hyper.ppo.clone(), &mut init, act)?),
    })
}

/// Rebuild an agent from a checkpoint with fresh random streams.
pub fn restore(ck: &Checkpoint, ctx: &AgentContext, hyper: &HyperParams, master_seed: u64, index: u64) -> Result<Box<dyn Bidder>> {
    let act = rng::stream(master_seed, Stream::Agent, index);
    Ok(match ck.algo {
        Algo::Random => Box::new(RandomBidder::new(*ctx, act)),
        Algo::Ql => Box::new(QLearner::restore(ck, *ctx, hyper.ql.clone(), act)?),
        Algo::Vpg => Box::new(Vpg::restore(ck, *ctx, hyper.vpg.clone(), act)?),
        Algo::Dqn => Box::new(Dqn::restore(ck, *ctx, hyper.dqn.clone(), act, rng::stream(master_seed, Stream::Replay, index))?),
        Algo::Dpg => Box::new(Dpg::restore(ck, *ctx, hyper.dpg.clone(), act)?),
        Algo::A2c => Box::new(A2c::restore(ck, *ctx, hyper.a2c.clone(), act)?),
        Algo::Ppo => Box::new(Ppo::restore(ck, *ctx, hyper.ppo.clone(), act)?),
    })
}
