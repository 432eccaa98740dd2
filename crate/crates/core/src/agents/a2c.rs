use rand::Rng;

use super::config::A2cConfig;
use super::dpg::{policy_act, restore_policy};
use super::{AgentContext, Algo, Bidder, FactoredPolicy, Mode};
use crate::action::BidAction;
use crate::checkpoint::{Checkpoint, Section};
use crate::env::{Observation, Transition};
use crate::error::{Error, Result};
use crate::nn::{clip_grad_norm, Activation, Adam, Mlp};
use crate::rng::SimRng;

/// `A = R - V(s)`. Episodes are a single step, so the action value is the
/// realized reward.
pub fn advantage(reward: f64, value: f64) -> f64 {
    reward - value
}

#[derive(Debug, Clone, PartialEq)]
pub struct A2cSample {
    pub obs: Vec<f64>,
    pub action: Vec<usize>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct A2cGradients {
    pub actor: Vec<f64>,
    pub critic: Vec<f64>,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub advantages: Vec<f64>,
}

pub(super) fn critic_net<R: Rng + ?Sized>(input: usize, hidden: &[usize], rng: &mut R) -> Result<Mlp<f64>> {
    let mut widths = vec![input];
    widths.extend_from_slice(hidden);
    widths.push(1);
    let mut gains = vec![std::f64::consts::SQRT_2; widths.len() - 2];
    gains.push(1.0);
    Mlp::orthogonal(&widths, Activation::Tanh, &gains, rng)
}

pub(super) fn restore_critic(ck: &Checkpoint, ctx: &AgentContext) -> Result<Mlp<f64>> {
    let critic = ck.mlp("critic")?;
    if critic.input_width() != ctx.units || critic.output_width() != 1 {
        return Err(Error::Checkpoint("critic layout does not match the scenario".into()));
    }
    Ok(critic)
}

/// Actor loss `-sum(log pi(a) * A) - entropy_coef * sum(H)` for fixed advantages.
pub fn a2c_actor_loss_and_grad(actor: &FactoredPolicy, batch: &[A2cSample], advantages: &[f64], entropy_coef: f64) -> Result<(f64, Vec<f64>)> {
    let mut grads = actor.net.zero_grads();
    let mut loss = 0.0;
    for (s, adv) in batch.iter().zip(advantages) {
        let (dists, cache) = actor.dists(&s.obs)?;
        loss -= FactoredPolicy::joint_log_prob(&dists, &s.action) * adv + entropy_coef * FactoredPolicy::joint_entropy(&dists);
        actor.accumulate(&cache, &dists, &s.action, -adv, -entropy_coef, &mut grads)?;
    }
    Ok((loss, grads))
}

/// Critic loss `value_coef * 1/2 * sum (R - V(s))^2`.
pub fn a2c_critic_loss_and_grad(critic: &Mlp<f64>, batch: &[A2cSample], value_coef: f64) -> Result<(f64, Vec<f64>)> {
    let mut grads = critic.zero_grads();
    let mut loss = 0.0;
    for s in batch {
        let (v, cache) = critic.forward(&s.obs)?;
        let err = v[0] - s.reward;
        loss += 0.5 * value_coef * err * err;
        critic.backward(&cache, &[value_coef * err], &mut grads)?;
    }
    Ok((loss, grads))
}

/// Gradients of both losses, with advantages taken from the current critic
/// and held constant for the actor.
pub fn a2c_gradients(actor: &FactoredPolicy, critic: &Mlp<f64>, batch: &[A2cSample], cfg: &A2cConfig) -> Result<A2cGradients> {
    if batch.is_empty() {
        return Err(Error::Underfilled { have: 0, need: 1 });
    }
    let advantages = batch
        .iter()
        .map(|s| Ok(advantage(s.reward, critic.predict(&s.obs)?[0])))
        .collect::<Result<Vec<_>>>()?;
    let (policy_loss, actor_g) = a2c_actor_loss_and_grad(actor, batch, &advantages, cfg.entropy_coef)?;
    let (value_loss, critic_g) = a2c_critic_loss_and_grad(critic, batch, cfg.value_coef)?;
    Ok(A2cGradients { actor: actor_g, critic: critic_g, policy_loss, value_loss, advantages })
}

/// Advantage actor-critic with separate actor and critic networks.
pub struct A2c {
    ctx: AgentContext,
    cfg: A2cConfig,
    actor: FactoredPolicy,
    critic: Mlp<f64>,
    actor_opt: Adam<f64>,
    critic_opt: Adam<f64>,
    batch: Vec<A2cSample>,
    rng: SimRng,
    updates: u64,
    mode: Mode,
}

impl A2c {
    pub fn new<R: Rng + ?Sized>(ctx: AgentContext, cfg: A2cConfig, init: &mut R, rng: SimRng) -> Result<Self> {
        let actor = FactoredPolicy::new(ctx.units, &cfg.hidden, ctx.units, ctx.grid.levels, init)?;
        let critic = critic_net(ctx.units, &cfg.hidden, init)?;
        Ok(Self::assemble(ctx, cfg, actor, critic, rng))
    }

    fn assemble(ctx: AgentContext, cfg: A2cConfig, actor: FactoredPolicy, critic: Mlp<f64>, rng: SimRng) -> Self {
        Self {
            actor_opt: Adam::new(actor.net.n_params(), cfg.lr),
            critic_opt: Adam::new(critic.n_params(), cfg.lr),
            batch: Vec::with_capacity(cfg.batch),
            actor,
            critic,
            ctx,
            cfg,
            rng,
            updates: 0,
            mode: Mode::Train,
        }
    }

    pub fn restore(ck: &Checkpoint, ctx: AgentContext, cfg: A2cConfig, rng: SimRng) -> Result<Self> {
        ck.expect_algo(Algo::A2c)?;
        let actor = restore_policy(ck, "actor", &ctx)?;
        let critic = restore_critic(ck, &ctx)?;
        let mut agent = Self::assemble(ctx, cfg, actor, critic, rng);
        agent.updates = ck.counters("steps")?.first().copied().unwrap_or(0);
        Ok(agent)
    }

    pub fn actor(&self) -> &FactoredPolicy {
        &self.actor
    }

    pub fn critic(&self) -> &Mlp<f64> {
        &self.critic
    }

    /// One actor step and one critic step on `batch`.
    pub fn update(&mut self, batch: &[A2cSample]) -> Result<(f64, f64)> {
        let mut g = a2c_gradients(&self.actor, &self.critic, batch, &self.cfg)?;
        clip_grad_norm(&mut g.actor, self.cfg.max_grad_norm);
        clip_grad_norm(&mut g.critic, self.cfg.max_grad_norm);
        self.actor_opt.step(self.actor.net.params_mut(), &g.actor)?;
        self.critic_opt.step(self.critic.params_mut(), &g.critic)?;
        self.updates += 1;
        Ok((g.policy_loss, g.value_loss))
    }
}

impl Bidder for A2c {
    fn algo(&self) -> Algo {
        Algo::A2c
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    fn act(&mut self, obs: &Observation, explore: bool) -> Result<BidAction> {
        let (levels, _) = policy_act(&self.actor, &self.ctx, obs, explore, &mut self.rng)?;
        Ok(BidAction::new(levels))
    }

    fn learn(&mut self, tr: &Transition) -> Result<()> {
        if self.mode == Mode::Freeze {
            return Ok(());
        }
        self.batch.push(A2cSample {
            obs: tr.observation.normalized_values.clone(),
            action: tr.action.levels.clone(),
            reward: tr.episode_reward,
        });
        if self.batch.len() >= self.cfg.batch {
            let batch = std::mem::take(&mut self.batch);
            self.update(&batch)?;
        }
        Ok(())
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(Algo::A2c)
            .with("actor", Section::Mlp(self.actor.net.clone()))
            .with("critic", Section::Mlp(self.critic.clone()))
            .with("steps", Section::Counters(vec![self.updates]))
    }
}
