use rand::Rng;

use super::config::{default_decay, QlConfig};
use super::{AgentContext, Algo, Bidder, EpsilonSchedule, Mode};
use crate::action::{joint_index, joint_pair, BidAction};
use crate::checkpoint::{Checkpoint, Section};
use crate::env::{Observation, Transition};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// One temporal-difference step for a terminal transition.
///
/// Episodes end after one step, so the bootstrap term `max Q(s', .)` is zero
/// and `gamma` drops out: `Q + alpha * (r + gamma * 0 - Q)`.
pub fn q_update(q: f64, alpha: f64, gamma: f64, reward: f64) -> f64 {
    let bootstrap = 0.0;
    q + alpha * (reward + gamma * bootstrap - q)
}

/// Dense `(value bin, joint action) -> Q` table.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub bins: usize,
    pub actions: usize,
    pub data: Vec<f64>,
}

impl QTable {
    pub fn zeros(bins: usize, actions: usize) -> Self {
        Self { bins, actions, data: vec![0.0; bins * actions] }
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.data[state * self.actions..(state + 1) * self.actions]
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.data[state * self.actions + action]
    }

    pub fn get_mut(&mut self, state: usize, action: usize) -> &mut f64 {
        &mut self.data[state * self.actions + action]
    }

    /// Highest entry of a row, lowest index on ties.
    pub fn argmax(&self, state: usize) -> usize {
        let row = self.row(state);
        let mut best = 0;
        for (i, q) in row.iter().enumerate() {
            if *q > row[best] {
                best = i;
            }
        }
        best
    }
}

/// Tabular Q-learning over binned values and canonical bid pairs.
pub struct QLearner {
    ctx: AgentContext,
    cfg: QlConfig,
    table: QTable,
    schedule: EpsilonSchedule,
    rng: SimRng,
    mode: Mode,
}

impl QLearner {
    pub fn new(ctx: AgentContext, cfg: QlConfig, rng: SimRng) -> Result<Self> {
        ctx.require_pairs(Algo::Ql)?;
        let decay = cfg.decay_rate.unwrap_or_else(|| default_decay(ctx.episodes));
        Ok(Self {
            table: QTable::zeros(cfg.value_bins, ctx.grid.joint_actions()),
            schedule: EpsilonSchedule::new(cfg.eps_max, decay),
            ctx,
            cfg,
            rng,
            mode: Mode::Train,
        })
    }

    pub fn restore(ck: &Checkpoint, ctx: AgentContext, cfg: QlConfig, rng: SimRng) -> Result<Self> {
        ck.expect_algo(Algo::Ql)?;
        let mut agent = Self::new(ctx, cfg, rng)?;
        let (rows, cols, data) = ck.table("q")?;
        if rows != agent.table.bins || cols != agent.table.actions {
            return Err(Error::Checkpoint(format!(
                "Q-table is {rows}x{cols}, scenario needs {}x{}",
                agent.table.bins, agent.table.actions
            )));
        }
        agent.table.data = data;
        let (_, _, sched) = ck.table("schedule")?;
        let t = ck.counters("steps")?;
        agent.schedule = EpsilonSchedule { eps_max: sched[0], decay_rate: sched[1], t: t[0] };
        Ok(agent)
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn table_mut(&mut self) -> &mut QTable {
        &mut self.table
    }

    pub fn schedule(&self) -> &EpsilonSchedule {
        &self.schedule
    }

    pub fn set_schedule(&mut self, schedule: EpsilonSchedule) {
        self.schedule = schedule;
    }

    /// Epsilon-greedy joint action index for `obs`.
    pub fn select(&mut self, obs: &Observation, explore: bool) -> Result<usize> {
        self.ctx.check_obs(obs)?;
        let state = self.ctx.value_bin(obs, self.table.bins);
        let eps = if explore { self.schedule.current() } else { 0.0 };
        // the schedule is training state; a frozen agent keeps its epsilon
        if explore && self.mode == Mode::Train {
            self.schedule.advance();
        }
        if eps > 0.0 && self.rng.random::<f64>() < eps {
            Ok(self.rng.random_range(0..self.table.actions))
        } else {
            Ok(self.table.argmax(state))
        }
    }
}

impl Bidder for QLearner {
    fn algo(&self) -> Algo {
        Algo::Ql
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    fn act(&mut self, obs: &Observation, explore: bool) -> Result<BidAction> {
        let (hi, lo) = joint_pair(self.select(obs, explore)?);
        Ok(BidAction::new(vec![hi, lo]))
    }

    fn learn(&mut self, tr: &Transition) -> Result<()> {
        if self.mode == Mode::Freeze {
            return Ok(());
        }
        let state = self.ctx.value_bin(&tr.observation, self.table.bins);
        let pair = tr.action.canonical();
        let action = joint_index(pair[0], pair[1]);
        let q = self.table.get_mut(state, action);
        *q = q_update(*q, self.cfg.alpha, self.cfg.gamma, tr.episode_reward);
        Ok(())
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(Algo::Ql)
            .with("q", Section::Table { rows: self.table.bins, cols: self.table.actions, data: self.table.data.clone() })
            .with("schedule", Section::Table { rows: 1, cols: 2, data: vec![self.schedule.eps_max, self.schedule.decay_rate] })
            .with("steps", Section::Counters(vec![self.schedule.t]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use crate::scenario::{Rule, ScenarioConfig};

    fn agent() -> QLearner {
        let ctx = AgentContext::from_scenario(&ScenarioConfig::standard(Rule::Dp, 4, 1_000, 0)).unwrap();
        QLearner::new(ctx, QlConfig::default(), stream(0, Stream::Agent, 0)).unwrap()
    }

    #[test]
    fn single_update() {
        assert!((q_update(0.0, 0.1, 0.99, 1.0) - 0.1).abs() < 1e-15);
        assert_eq!(q_update(0.7, 0.0, 0.99, 5.0), 0.7);
    }

    #[test]
    fn repeated_updates_converge_geometrically() {
        let mut q = 0.0;
        for _ in 0..100 {
            q = q_update(q, 0.1, 0.99, 1.0);
        }
        assert!((q - 1.0).abs() < 1e-3);
        assert!(((1.0 - q) - 0.9f64.powi(100)).abs() < 1e-12);
    }

    #[test]
    fn discount_is_inert() {
        for (q, r) in [(0.0, 1.0), (0.3, -0.7), (-2.0, 0.25)] {
            let a = q_update(q, 0.2, 0.0, r);
            assert_eq!(a, q_update(q, 0.2, 0.5, r));
            assert_eq!(a, q_update(q, 0.2, 0.99, r));
        }
    }

    #[test]
    fn greedy_picks_row_max_and_lowest_on_ties() {
        let mut a = agent();
        let obs = Observation::from_values(&[5.2, 5.2], 10.0);
        assert_eq!(a.select(&obs, false).unwrap(), 0);
        *a.table.get_mut(5, 17) = 1.0;
        assert_eq!(a.select(&obs, false).unwrap(), 17);
        *a.table.get_mut(5, 3) = 1.0;
        assert_eq!(a.select(&obs, false).unwrap(), 3);
    }

    #[test]
    fn full_exploration_is_uniform_over_canonical_pairs() {
        let mut a = agent();
        a.set_schedule(EpsilonSchedule::new(1.0, 1.0));
        let obs = Observation::from_values(&[5.0, 5.0], 10.0);
        let mut counts = vec![0usize; 231];
        let n = 231 * 200;
        for _ in 0..n {
            counts[a.select(&obs, true).unwrap()] += 1;
        }
        let chi2: f64 = counts.iter().map(|c| (*c as f64 - 200.0).powi(2) / 200.0).sum();
        // 99.9th percentile of chi-square with 230 degrees of freedom is about 311
        assert!(chi2 < 311.0, "chi2 = {chi2}");
    }

    #[test]
    fn learn_updates_the_visited_cell() {
        let mut a = agent();
        let obs = Observation::from_values(&[7.1, 7.1], 10.0);
        let tr = Transition { observation: obs, action: BidAction::new(vec![4, 9]), per_slot: vec![], episode_reward: 1.0 };
        a.learn(&tr).unwrap();
        assert!((a.table.get(7, joint_index(9, 4)) - 0.1).abs() < 1e-15);
        a.set_mode(Mode::Freeze);
        a.learn(&tr).unwrap();
        assert!((a.table.get(7, joint_index(9, 4)) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn checkpoint_roundtrip_preserves_schedule() {
        let mut a = agent();
        let obs = Observation::from_values(&[3.0, 3.0], 10.0);
        for _ in 0..10 {
            a.act(&obs, true).unwrap();
        }
        let ck = a.checkpoint();
        let b = QLearner::restore(&ck, a.ctx, QlConfig::default(), stream(9, Stream::Agent, 0)).unwrap();
        assert_eq!(b.schedule, a.schedule);
        assert_eq!(b.checkpoint().to_bytes(), ck.to_bytes());
    }
}
