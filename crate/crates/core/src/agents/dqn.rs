use rand::Rng;

use super::config::{default_decay, DqnConfig};
use super::{AgentContext, Algo, Bidder, EpsilonSchedule, Mode, ReplayBuffer};
use crate::action::{joint_index, joint_pair, BidAction};
use crate::checkpoint::{Checkpoint, Section};
use crate::env::{Observation, Transition};
use crate::error::{Error, Result};
use crate::nn::{Activation, Adam, Mlp};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct DqnSample {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
}

/// Mean squared error between `Q(s, a)` and the terminal target `r`, with
/// its gradient in the network's parameter layout.
pub fn dqn_loss_and_grad(net: &Mlp<f64>, batch: &[&DqnSample]) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::Underfilled { have: 0, need: 1 });
    }
    let n = batch.len() as f64;
    let mut grads = net.zero_grads();
    let mut loss = 0.0;
    let mut g_out = vec![0.0; net.output_width()];
    for s in batch {
        let (q, cache) = net.forward(&s.obs)?;
        let err = q[s.action] - s.reward;
        loss += err * err / n;
        g_out.fill(0.0);
        g_out[s.action] = 2.0 * err / n;
        net.backward(&cache, &g_out, &mut grads)?;
    }
    Ok((loss, grads))
}

/// Deep Q-network over canonical bid pairs with replay and a target network.
///
/// Episodes are terminal after one step, so the regression target is the
/// reward itself; the target network is still kept in sync on schedule.
pub struct Dqn {
    ctx: AgentContext,
    cfg: DqnConfig,
    online: Mlp<f64>,
    target: Mlp<f64>,
    opt: Adam<f64>,
    buffer: ReplayBuffer<DqnSample>,
    schedule: EpsilonSchedule,
    rng: SimRng,
    replay_rng: SimRng,
    seen: u64,
    train_steps: u64,
    mode: Mode,
}

impl Dqn {
    pub fn new<R: Rng + ?Sized>(ctx: AgentContext, cfg: DqnConfig, init: &mut R, rng: SimRng, replay_rng: SimRng) -> Result<Self> {
        ctx.require_pairs(Algo::Dqn)?;
        let mut widths = vec![ctx.units];
        widths.extend_from_slice(&cfg.hidden);
        widths.push(ctx.grid.joint_actions());
        let online = Mlp::new(&widths, Activation::Tanh, init)?;
        Ok(Self::assemble(ctx, cfg, online.clone(), online, rng, replay_rng))
    }

    fn assemble(ctx: AgentContext, cfg: DqnConfig, online: Mlp<f64>, target: Mlp<f64>, rng: SimRng, replay_rng: SimRng) -> Self {
        let decay = cfg.decay_rate.unwrap_or_else(|| default_decay(ctx.episodes));
        Self {
            opt: Adam::new(online.n_params(), cfg.lr),
            buffer: ReplayBuffer::new(cfg.buffer),
            schedule: EpsilonSchedule::new(cfg.eps_max, decay),
            online,
            target,
            ctx,
            cfg,
            rng,
            replay_rng,
            seen: 0,
            train_steps: 0,
            mode: Mode::Train,
        }
    }

    pub fn restore(ck: &Checkpoint, ctx: AgentContext, cfg: DqnConfig, rng: SimRng, replay_rng: SimRng) -> Result<Self> {
        ck.expect_algo(Algo::Dqn)?;
        ctx.require_pairs(Algo::Dqn)?;
        let (online, target) = (ck.mlp("online")?, ck.mlp("target")?);
        if online.input_width() != ctx.units || online.output_width() != ctx.grid.joint_actions() || target.widths() != online.widths() {
            return Err(Error::Checkpoint("Q-network layout does not match the scenario".into()));
        }
        let mut agent = Self::assemble(ctx, cfg, online, target, rng, replay_rng);
        let (_, _, sched) = ck.table("schedule")?;
        let c = ck.counters("steps")?;
        agent.schedule = EpsilonSchedule { eps_max: sched[0], decay_rate: sched[1], t: c[0] };
        agent.seen = c[1];
        agent.train_steps = c[2];
        Ok(agent)
    }

    pub fn online(&self) -> &Mlp<f64> {
        &self.online
    }

    pub fn target(&self) -> &Mlp<f64> {
        &self.target
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    pub fn set_schedule(&mut self, schedule: EpsilonSchedule) {
        self.schedule = schedule;
    }

    pub fn push(&mut self, sample: DqnSample) {
        self.buffer.push(sample);
    }

    /// One gradient step on a replay batch; syncs the target network every
    /// `sync_every` steps.
    pub fn train_step(&mut self) -> Result<f64> {
        let batch = self.buffer.sample(self.cfg.batch, &mut self.replay_rng)?;
        let (loss, grads) = dqn_loss_and_grad(&self.online, &batch)?;
        self.opt.step(self.online.params_mut(), &grads)?;
        self.train_steps += 1;
        if self.train_steps % self.cfg.sync_every == 0 {
            self.target = self.online.clone();
        }
        Ok(loss)
    }
}

impl Bidder for Dqn {
    fn algo(&self) -> Algo {
        Algo::Dqn
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    fn act(&mut self, obs: &Observation, explore: bool) -> Result<BidAction> {
        self.ctx.check_obs(obs)?;
        let eps = if explore { self.schedule.current() } else { 0.0 };
        // the schedule is training state; a frozen agent keeps its epsilon
        if explore && self.mode == Mode::Train {
            self.schedule.advance();
        }
        let index = if eps > 0.0 && self.rng.random::<f64>() < eps {
            self.rng.random_range(0..self.ctx.grid.joint_actions())
        } else {
            let q = self.online.predict(&obs.normalized_values)?;
            let mut best = 0;
            for (i, v) in q.iter().enumerate() {
                if *v > q[best] {
                    best = i;
                }
            }
            best
        };
        let (hi, lo) = joint_pair(index);
        Ok(BidAction::new(vec![hi, lo]))
    }

    fn learn(&mut self, tr: &Transition) -> Result<()> {
        if self.mode == Mode::Freeze {
            return Ok(());
        }
        let pair = tr.action.canonical();
        self.buffer.push(DqnSample {
            obs: tr.observation.normalized_values.clone(),
            action: joint_index(pair[0], pair[1]),
            reward: tr.episode_reward,
        });
        self.seen += 1;
        if self.seen >= self.cfg.warmup && self.buffer.len() >= self.cfg.batch {
            self.train_step()?;
        }
        Ok(())
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(Algo::Dqn)
            .with("online", Section::Mlp(self.online.clone()))
            .with("target", Section::Mlp(self.target.clone()))
            .with("schedule", Section::Table { rows: 1, cols: 2, data: vec![self.schedule.eps_max, self.schedule.decay_rate] })
            .with("steps", Section::Counters(vec![self.schedule.t, self.seen, self.train_steps]))
    }
}
