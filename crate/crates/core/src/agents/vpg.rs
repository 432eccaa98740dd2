use super::config::VpgConfig;
use super::{AgentContext, Algo, Bidder, Mode};
use crate::action::{joint_index, joint_pair, BidAction};
use crate::checkpoint::{Checkpoint, Section};
use crate::env::{Observation, Transition};
use crate::error::{Error, Result};
use crate::nn::Categorical;
use crate::rng::SimRng;

/// Softmax policy table over `(value bin, joint action)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VpgTable {
    pub bins: usize,
    pub actions: usize,
    pub logits: Vec<f64>,
}

impl VpgTable {
    pub fn zeros(bins: usize, actions: usize) -> Self {
        Self { bins, actions, logits: vec![0.0; bins * actions] }
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.logits[state * self.actions..(state + 1) * self.actions]
    }

    pub fn policy(&self, state: usize) -> Categorical<f64> {
        Categorical::from_logits(self.row(state))
    }

    /// REINFORCE step `theta += alpha * gamma^t * r * grad log pi(a|s)` for
    /// the step at time `t`. For a softmax row the score is `onehot(a) - pi`.
    pub fn reinforce(&mut self, state: usize, action: usize, ret: f64, alpha: f64, gamma: f64, t: u32) {
        let scale = alpha * gamma.powi(t as i32) * ret;
        if scale == 0.0 {
            return;
        }
        let grad = self.policy(state).log_prob_grad(action);
        let off = state * self.actions;
        for (i, g) in grad.into_iter().enumerate() {
            self.logits[off + i] += scale * g;
        }
    }
}

/// Vanilla policy gradient on the tabular value-bin state.
pub struct Vpg {
    ctx: AgentContext,
    cfg: VpgConfig,
    table: VpgTable,
    rng: SimRng,
    mode: Mode,
}

impl Vpg {
    pub fn new(ctx: AgentContext, cfg: VpgConfig, rng: SimRng) -> Result<Self> {
        ctx.require_pairs(Algo::Vpg)?;
        Ok(Self { table: VpgTable::zeros(cfg.value_bins, ctx.grid.joint_actions()), ctx, cfg, rng, mode: Mode::Train })
    }

    pub fn restore(ck: &Checkpoint, ctx: AgentContext, cfg: VpgConfig, rng: SimRng) -> Result<Self> {
        ck.expect_algo(Algo::Vpg)?;
        let mut agent = Self::new(ctx, cfg, rng)?;
        let (rows, cols, data) = ck.table("logits")?;
        if rows != agent.table.bins || cols != agent.table.actions {
            return Err(Error::Checkpoint(format!("policy table is {rows}x{cols}, scenario needs {}x{}", agent.table.bins, agent.table.actions)));
        }
        agent.table.logits = data;
        Ok(agent)
    }

    pub fn table(&self) -> &VpgTable {
        &self.table
    }
}

impl Bidder for Vpg {
    fn algo(&self) -> Algo {
        Algo::Vpg
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    fn act(&mut self, obs: &Observation, _explore: bool) -> Result<BidAction> {
        self.ctx.check_obs(obs)?;
        let state = self.ctx.value_bin(obs, self.table.bins);
        let (hi, lo) = joint_pair(self.table.policy(state).sample(&mut self.rng));
        Ok(BidAction::new(vec![hi, lo]))
    }

    fn learn(&mut self, tr: &Transition) -> Result<()> {
        if self.mode == Mode::Freeze {
            return Ok(());
        }
        let state = self.ctx.value_bin(&tr.observation, self.table.bins);
        let pair = tr.action.canonical();
        self.table.reinforce(state, joint_index(pair[0], pair[1]), tr.episode_reward, self.cfg.alpha, self.cfg.gamma, 0);
        Ok(())
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(Algo::Vpg).with(
            "logits",
            Section::Table { rows: self.table.bins, cols: self.table.actions, data: self.table.logits.clone() },
        )
    }
}
