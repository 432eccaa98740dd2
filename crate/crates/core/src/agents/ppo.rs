use rand::seq::SliceRandom;
use rand::Rng;

use super::a2c::{advantage, critic_net, restore_critic};
use super::config::PpoConfig;
use super::dpg::{policy_act, restore_policy};
use super::{AgentContext, Algo, Bidder, FactoredPolicy, Mode};
use crate::action::BidAction;
use crate::checkpoint::{Checkpoint, Section};
use crate::env::{Observation, Transition};
use crate::error::{Error, Result};
use crate::nn::{clip_grad_norm, Adam, Mlp};
use crate::rng::SimRng;

/// `min(r * A, clip(r, 1 - eps, 1 + eps) * A)`.
pub fn ppo_clip_objective(ratio: f64, adv: f64, eps: f64) -> f64 {
    (ratio * adv).min(ratio.clamp(1.0 - eps, 1.0 + eps) * adv)
}

/// Shift to mean 0 and scale to unit population standard deviation.
/// A constant batch becomes all zeros.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let std = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
    for a in adv.iter_mut() {
        *a = if std > 0.0 { (*a - mean) / std } else { 0.0 };
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpoSample {
    pub obs: Vec<f64>,
    pub action: Vec<usize>,
    pub reward: f64,
    /// Joint log-probability under the policy that collected the sample.
    pub old_log_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpoGradients {
    pub actor: Vec<f64>,
    pub critic: Vec<f64>,
    /// `-mean(clipped surrogate) + value_coef * mean((R - V)^2) - entropy_coef * mean(H)`
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub ratios: Vec<f64>,
    pub clip_fraction: f64,
}

/// Minibatch loss and gradients for both networks. `advantages` are fixed
/// inputs, aligned with `batch`.
pub fn ppo_loss_and_grads(actor: &FactoredPolicy, critic: &Mlp<f64>, batch: &[&PpoSample], advantages: &[f64], cfg: &PpoConfig) -> Result<PpoGradients> {
    if batch.is_empty() {
        return Err(Error::Underfilled { have: 0, need: 1 });
    }
    if advantages.len() != batch.len() {
        return Err(Error::Shape(format!("{} advantages for {} samples", advantages.len(), batch.len())));
    }
    let n = batch.len() as f64;
    let mut out = PpoGradients {
        actor: actor.net.zero_grads(),
        critic: critic.zero_grads(),
        loss: 0.0,
        policy_loss: 0.0,
        value_loss: 0.0,
        entropy: 0.0,
        ratios: Vec::with_capacity(batch.len()),
        clip_fraction: 0.0,
    };
    let mut clipped = 0usize;
    for (s, &adv) in batch.iter().zip(advantages) {
        let (dists, cache) = actor.dists(&s.obs)?;
        let ratio = (FactoredPolicy::joint_log_prob(&dists, &s.action) - s.old_log_prob).exp();
        let surrogate = ppo_clip_objective(ratio, adv, cfg.clip);
        let entropy = FactoredPolicy::joint_entropy(&dists);
        // d surrogate / d log pi is r * A on the unclipped branch, 0 on the flat one
        let unclipped = ratio * adv <= ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
        let w_logp = if unclipped { -adv * ratio / n } else { 0.0 };
        if (ratio - 1.0).abs() > cfg.clip {
            clipped += 1;
        }
        actor.accumulate(&cache, &dists, &s.action, w_logp, -cfg.entropy_coef / n, &mut out.actor)?;

        let (v, vcache) = critic.forward(&s.obs)?;
        let err = v[0] - s.reward;
        critic.backward(&vcache, &[2.0 * cfg.value_coef * err / n], &mut out.critic)?;

        out.policy_loss -= surrogate / n;
        out.value_loss += err * err / n;
        out.entropy += entropy / n;
        out.ratios.push(ratio);
    }
    out.loss = out.policy_loss + cfg.value_coef * out.value_loss - cfg.entropy_coef * out.entropy;
    out.clip_fraction = clipped as f64 / n;
    Ok(out)
}

/// Averages over every minibatch of one update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PpoDiagnostics {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub minibatches: usize,
}

/// Actor, critic and their optimizers, independent of the auction.
#[derive(Debug, Clone)]
pub struct PpoLearner {
    pub actor: FactoredPolicy,
    pub critic: Mlp<f64>,
    pub cfg: PpoConfig,
    actor_opt: Adam<f64>,
    critic_opt: Adam<f64>,
}

impl PpoLearner {
    pub fn new<R: Rng + ?Sized>(input: usize, heads: usize, levels: usize, cfg: PpoConfig, init: &mut R) -> Result<Self> {
        let actor = FactoredPolicy::new(input, &cfg.hidden, heads, levels, init)?;
        let critic = critic_net(input, &cfg.hidden, init)?;
        Ok(Self::from_nets(actor, critic, cfg))
    }

    pub fn from_nets(actor: FactoredPolicy, critic: Mlp<f64>, cfg: PpoConfig) -> Self {
        Self {
            actor_opt: Adam::new(actor.net.n_params(), cfg.lr),
            critic_opt: Adam::new(critic.n_params(), cfg.lr),
            actor,
            critic,
            cfg,
        }
    }

    /// Rollout advantages `R - V(s)` under the current critic, normalized.
    pub fn advantages(&self, rollout: &[PpoSample]) -> Result<Vec<f64>> {
        let mut adv = rollout
            .iter()
            .map(|s| Ok(advantage(s.reward, self.critic.predict(&s.obs)?[0])))
            .collect::<Result<Vec<_>>>()?;
        normalize_advantages(&mut adv);
        Ok(adv)
    }

    /// Several epochs of clipped-surrogate steps over shuffled minibatches.
    pub fn update<R: Rng + ?Sized>(&mut self, rollout: &[PpoSample], rng: &mut R) -> Result<PpoDiagnostics> {
        if rollout.is_empty() {
            return Err(Error::Underfilled { have: 0, need: 1 });
        }
        let adv = self.advantages(rollout)?;
        let mut order: Vec<usize> = (0..rollout.len()).collect();
        let mut diag = PpoDiagnostics::default();
        for _ in 0..self.cfg.epochs {
            order.shuffle(rng);
            for chunk in order.chunks(self.cfg.minibatch.max(1)) {
                let batch: Vec<&PpoSample> = chunk.iter().map(|&i| &rollout[i]).collect();
                let a: Vec<f64> = chunk.iter().map(|&i| adv[i]).collect();
                let mut g = ppo_loss_and_grads(&self.actor, &self.critic, &batch, &a, &self.cfg)?;
                clip_grad_norm(&mut g.actor, self.cfg.max_grad_norm);
                clip_grad_norm(&mut g.critic, self.cfg.max_grad_norm);
                self.actor_opt.step(self.actor.net.params_mut(), &g.actor)?;
                self.critic_opt.step(self.critic.params_mut(), &g.critic)?;
                diag.policy_loss += g.policy_loss;
                diag.value_loss += g.value_loss;
                diag.entropy += g.entropy;
                diag.clip_fraction += g.clip_fraction;
                diag.minibatches += 1;
            }
        }
        if diag.minibatches > 0 {
            let m = diag.minibatches as f64;
            diag.policy_loss /= m;
            diag.value_loss /= m;
            diag.entropy /= m;
            diag.clip_fraction /= m;
        }
        Ok(diag)
    }
}

/// Proximal policy optimization bidder.
pub struct Ppo {
    ctx: AgentContext,
    learner: PpoLearner,
    rollout: Vec<PpoSample>,
    rng: SimRng,
    updates: u64,
    last: Option<PpoDiagnostics>,
    mode: Mode,
}

impl Ppo {
    pub fn new<R: Rng + ?Sized>(ctx: AgentContext, cfg: PpoConfig, init: &mut R, rng: SimRng) -> Result<Self> {
        let learner = PpoLearner::new(ctx.units, ctx.units, ctx.grid.levels, cfg, init)?;
        Ok(Self::assemble(ctx, learner, rng))
    }

    fn assemble(ctx: AgentContext, learner: PpoLearner, rng: SimRng) -> Self {
        Self { rollout: Vec::with_capacity(learner.cfg.rollout), ctx, learner, rng, updates: 0, last: None, mode: Mode::Train }
    }

    pub fn restore(ck: &Checkpoint, ctx: AgentContext, cfg: PpoConfig, rng: SimRng) -> Result<Self> {
        ck.expect_algo(Algo::Ppo)?;
        let actor = restore_policy(ck, "actor", &ctx)?;
        let critic = restore_critic(ck, &ctx)?;
        let mut agent = Self::assemble(ctx, PpoLearner::from_nets(actor, critic, cfg), rng);
        agent.updates = ck.counters("steps")?.first().copied().unwrap_or(0);
        Ok(agent)
    }

    pub fn learner(&self) -> &PpoLearner {
        &self.learner
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn last_diagnostics(&self) -> Option<PpoDiagnostics> {
        self.last
    }
}

impl Bidder for Ppo {
    fn algo(&self) -> Algo {
        Algo::Ppo
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    fn act(&mut self, obs: &Observation, explore: bool) -> Result<BidAction> {
        let (levels, _) = policy_act(&self.learner.actor, &self.ctx, obs, explore, &mut self.rng)?;
        Ok(BidAction::new(levels))
    }

    fn learn(&mut self, tr: &Transition) -> Result<()> {
        if self.mode == Mode::Freeze {
            return Ok(());
        }
        // the policy only changes at rollout boundaries, so this is the
        // log-probability the action was sampled with
        let obs = tr.observation.normalized_values.clone();
        let old_log_prob = self.learner.actor.log_prob(&obs, &tr.action.levels)?;
        self.rollout.push(PpoSample { obs, action: tr.action.levels.clone(), reward: tr.episode_reward, old_log_prob });
        if self.rollout.len() >= self.learner.cfg.rollout {
            let rollout = std::mem::take(&mut self.rollout);
            self.last = Some(self.learner.update(&rollout, &mut self.rng)?);
            self.updates += 1;
        }
        Ok(())
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(Algo::Ppo)
            .with("actor", Section::Mlp(self.learner.actor.net.clone()))
            .with("critic", Section::Mlp(self.learner.critic.clone()))
            .with("steps", Section::Counters(vec![self.updates]))
    }
}
