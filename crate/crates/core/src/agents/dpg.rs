use rand::Rng;

use super::config::DpgConfig;
use super::{AgentContext, Algo, Bidder, FactoredPolicy, Mode};
use crate::action::BidAction;
use crate::checkpoint::{Checkpoint, Section};
use crate::env::{Observation, Transition};
use crate::error::{Error, Result};
use crate::nn::Adam;
use crate::rng::SimRng;

/// One recorded episode for a policy-network learner.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySample {
    pub obs: Vec<f64>,
    /// Levels in head order.
    pub action: Vec<usize>,
    /// Reward credited to each head, in head order.
    pub rewards: Vec<f64>,
}

/// `-mean(sum_h log pi_h(a_h) * (R_h - mean R_h)) - entropy_coef * mean(H)`
/// and its gradient. Each head has its own batch-mean baseline.
pub fn dpg_loss_and_grad(policy: &FactoredPolicy, batch: &[PolicySample], entropy_coef: f64) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::Underfilled { have: 0, need: 1 });
    }
    if let Some(s) = batch.iter().find(|s| s.rewards.len() != policy.heads) {
        return Err(Error::Shape(format!("{} rewards for {} heads", s.rewards.len(), policy.heads)));
    }
    let n = batch.len() as f64;
    let mut baseline = vec![0.0; policy.heads];
    for s in batch {
        for (b, r) in baseline.iter_mut().zip(&s.rewards) {
            *b += r / n;
        }
    }
    let mut grads = policy.net.zero_grads();
    let mut loss = 0.0;
    for s in batch {
        let adv: Vec<f64> = s.rewards.iter().zip(&baseline).map(|(r, b)| r - b).collect();
        let (dists, cache) = policy.dists(&s.obs)?;
        let weighted: f64 = dists.iter().zip(&s.action).zip(&adv).map(|((d, a), w)| d.log_prob(*a) * w).sum();
        loss -= (weighted + entropy_coef * FactoredPolicy::joint_entropy(&dists)) / n;
        let w: Vec<f64> = adv.iter().map(|a| -a / n).collect();
        policy.accumulate_heads(&cache, &dists, &s.action, &w, -entropy_coef / n, &mut grads)?;
    }
    Ok((loss, grads))
}

/// One optimizer step on a batch; returns the loss before the step.
pub fn dpg_update(policy: &mut FactoredPolicy, batch: &[PolicySample], opt: &mut Adam<f64>, entropy_coef: f64) -> Result<f64> {
    let (loss, grads) = dpg_loss_and_grad(policy, batch, entropy_coef)?;
    opt.step(policy.net.params_mut(), &grads)?;
    Ok(loss)
}

pub(super) fn greedy(policy: &FactoredPolicy, obs: &[f64]) -> Result<Vec<usize>> {
    let (dists, _) = policy.dists(obs)?;
    Ok(dists.iter().map(|d| d.argmax()).collect())
}

/// Policy gradient over a factored MLP policy with a batch-mean baseline.
pub struct Dpg {
    ctx: AgentContext,
    cfg: DpgConfig,
    policy: FactoredPolicy,
    opt: Adam<f64>,
    batch: Vec<PolicySample>,
    rng: SimRng,
    updates: u64,
    mode: Mode,
}

impl Dpg {
    pub fn new<R: Rng + ?Sized>(ctx: AgentContext, cfg: DpgConfig, init: &mut R, rng: SimRng) -> Result<Self> {
        let policy = FactoredPolicy::new(ctx.units, &cfg.hidden, ctx.units, ctx.grid.levels, init)?;
        Ok(Self::assemble(ctx, cfg, policy, rng))
    }

    fn assemble(ctx: AgentContext, cfg: DpgConfig, policy: FactoredPolicy, rng: SimRng) -> Self {
        Self {
            opt: Adam::new(policy.net.n_params(), cfg.lr),
            batch: Vec::with_capacity(cfg.batch),
            policy,
            ctx,
            cfg,
            rng,
            updates: 0,
            mode: Mode::Train,
        }
    }

    pub fn restore(ck: &Checkpoint, ctx: AgentContext, cfg: DpgConfig, rng: SimRng) -> Result<Self> {
        ck.expect_algo(Algo::Dpg)?;
        let policy = restore_policy(ck, "policy", &ctx)?;
        let mut agent = Self::assemble(ctx, cfg, policy, rng);
        agent.updates = ck.counters("steps")?.first().copied().unwrap_or(0);
        Ok(agent)
    }

    pub fn policy(&self) -> &FactoredPolicy {
        &self.policy
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }
}

pub(super) fn restore_policy(ck: &Checkpoint, name: &str, ctx: &AgentContext) -> Result<FactoredPolicy> {
    let net = ck.mlp(name)?;
    if net.input_width() != ctx.units {
        return Err(Error::Checkpoint(format!("`{name}` takes {} inputs, scenario has {} units", net.input_width(), ctx.units)));
    }
    FactoredPolicy::from_net(net, ctx.units, ctx.grid.levels).map_err(|e| Error::Checkpoint(e.to_string()))
}

pub(super) fn policy_act(policy: &FactoredPolicy, ctx: &AgentContext, obs: &Observation, explore: bool, rng: &mut SimRng) -> Result<(Vec<usize>, f64)> {
    ctx.check_obs(obs)?;
    if explore {
        policy.sample(&obs.normalized_values, rng)
    } else {
        let a = greedy(policy, &obs.normalized_values)?;
        let lp = policy.log_prob(&obs.normalized_values, &a)?;
        Ok((a, lp))
    }
}

impl Bidder for Dpg {
    fn algo(&self) -> Algo {
        Algo::Dpg
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    fn act(&mut self, obs: &Observation, explore: bool) -> Result<BidAction> {
        let (levels, _) = policy_act(&self.policy, &self.ctx, obs, explore, &mut self.rng)?;
        Ok(BidAction::new(levels))
    }

    fn learn(&mut self, tr: &Transition) -> Result<()> {
        if self.mode == Mode::Freeze {
            return Ok(());
        }
        self.batch.push(PolicySample {
            obs: tr.observation.normalized_values.clone(),
            action: tr.action.levels.clone(),
            rewards: tr.head_rewards(),
        });
        if self.batch.len() >= self.cfg.batch {
            dpg_update(&mut self.policy, &self.batch, &mut self.opt, self.cfg.entropy_coef)?;
            self.batch.clear();
            self.updates += 1;
        }
        Ok(())
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(Algo::Dpg)
            .with("policy", Section::Mlp(self.policy.net.clone()))
            .with("steps", Section::Counters(vec![self.updates]))
    }
}
