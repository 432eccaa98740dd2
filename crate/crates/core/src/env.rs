//! Single-step multi-agent auction episodes.
//!
//! `reset` draws one private value per bidder and shows it to the agents,
//! `step` clears the joint bids and scores every bid slot with [`reward`].

use rand::Rng;

use crate::action::{ActionGrid, BidAction};
use crate::auction::{self, AuctionOutcome, BidMatrix, ValuationVector};
use crate::error::{Error, Result};
use crate::rng::{self, SimRng, Stream};
use crate::scenario::ScenarioConfig;

/// Penalty for an unsuccessful bid.
pub const LOSS_PENALTY: f64 = -0.01;

/// Per-bid reward.
///
/// A winning bid earns `p / max(v, 1)` when the payoff `p` is positive and
/// `-(v - p) / max(v, 1)` otherwise; a losing bid earns a flat `-0.01`.
pub fn reward(won: bool, payoff: f64, value: f64) -> f64 {
    let scale = value.max(1.0);
    match (won, payoff > 0.0) {
        (true, true) => payoff / scale,
        (true, false) => -(value - payoff) / scale,
        (false, _) => LOSS_PENALTY,
    }
}

/// What an agent sees: its marginal values divided by the top of the value range.
///
/// The raw values are kept alongside so that bidders can compare bids with
/// values without a round trip through the normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub normalized_values: Vec<f64>,
    pub values: Vec<f64>,
}

impl Observation {
    pub fn from_values(values: &[f64], value_hi: f64) -> Self {
        Self { normalized_values: values.iter().map(|v| v / value_hi).collect(), values: values.to_vec() }
    }

    pub fn len(&self) -> usize {
        self.normalized_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normalized_values.is_empty()
    }

    /// Value of the first unit in currency.
    pub fn value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Result for one bid slot of one bidder, slots ordered by bid high to low.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotResult {
    pub won: bool,
    pub bid: f64,
    pub value: f64,
    pub payment: f64,
    pub payoff: f64,
    pub reward: f64,
}

/// One agent's record of a completed episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    pub action: BidAction,
    pub per_slot: Vec<SlotResult>,
    pub episode_reward: f64,
}

impl Transition {
    pub fn units_won(&self) -> usize {
        self.per_slot.iter().filter(|s| s.won).count()
    }

    pub fn payment_total(&self) -> f64 {
        self.per_slot.iter().map(|s| s.payment).sum()
    }

    pub fn payoff_total(&self) -> f64 {
        self.per_slot.iter().map(|s| s.payoff).sum()
    }

    /// Slot rewards in the order of `action.levels`, so that each policy head
    /// is credited with the slot its own bid landed in. Equal levels keep
    /// head order.
    pub fn head_rewards(&self) -> Vec<f64> {
        let mut heads: Vec<usize> = (0..self.action.levels.len()).collect();
        heads.sort_by(|a, b| self.action.levels[*b].cmp(&self.action.levels[*a]));
        let mut out = vec![0.0; heads.len()];
        for (slot, head) in heads.into_iter().enumerate() {
            out[head] = self.per_slot[slot].reward;
        }
        out
    }
}

/// Everything produced by one `step`.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub transitions: Vec<Transition>,
    pub outcome: AuctionOutcome<f64>,
    pub valuations: Vec<ValuationVector<f64>>,
    pub bids: BidMatrix<f64>,
}

#[derive(Debug)]
pub struct AuctionEnv {
    config: ScenarioConfig,
    grid: ActionGrid,
    value_rng: SimRng,
    tie_rng: SimRng,
    current: Option<Vec<ValuationVector<f64>>>,
}

impl AuctionEnv {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let grid = ActionGrid::new(config.grid_levels, config.value_lo, config.value_hi)?;
        let seed = config.master_seed;
        Ok(Self {
            config,
            grid,
            value_rng: rng::stream(seed, Stream::Values, 0),
            tie_rng: rng::stream(seed, Stream::TieBreak, 0),
            current: None,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn grid(&self) -> &ActionGrid {
        &self.grid
    }

    /// Draw fresh values: one uniform draw per bidder, shared by all its units.
    pub fn reset(&mut self) -> Vec<Observation> {
        let (lo, hi) = (self.config.value_lo, self.config.value_hi);
        let k = self.config.units_per_bidder;
        let valuations: Vec<ValuationVector<f64>> = (0..self.config.n_bidders)
            .map(|_| {
                let v = self.value_rng.random_range(lo..=hi);
                ValuationVector::flat(v, k).expect("uniform draw is non-negative")
            })
            .collect();
        self.install(valuations)
    }

    /// Start an episode with fixed valuations.
    pub fn reset_with(&mut self, valuations: Vec<ValuationVector<f64>>) -> Result<Vec<Observation>> {
        if valuations.len() != self.config.n_bidders
            || valuations.iter().any(|v| v.values().len() != self.config.units_per_bidder)
        {
            return Err(Error::Shape("valuations do not match the scenario".into()));
        }
        let (lo, hi) = (self.config.value_lo, self.config.value_hi);
        if valuations.iter().flat_map(|v| v.values()).any(|x| *x < lo || *x > hi) {
            return Err(Error::Config("valuation outside the value range".into()));
        }
        Ok(self.install(valuations))
    }

    fn install(&mut self, valuations: Vec<ValuationVector<f64>>) -> Vec<Observation> {
        let hi = self.config.value_hi;
        let obs = valuations.iter().map(|v| Observation::from_values(v.values(), hi)).collect();
        self.current = Some(valuations);
        obs
    }

    /// Clear the joint bids and score them. The episode ends immediately.
    pub fn step(&mut self, actions: &[BidAction]) -> Result<StepResult> {
        let valuations = self
            .current
            .take()
            .ok_or_else(|| Error::Config("step called before reset".into()))?;
        if actions.len() != self.config.n_bidders {
            return Err(Error::Shape(format!(
                "{} actions for {} bidders",
                actions.len(),
                self.config.n_bidders
            )));
        }
        let k = self.config.units_per_bidder;
        let mut rows = Vec::with_capacity(actions.len());
        for a in actions {
            a.validate(&self.grid, k)?;
            rows.push(a.decode(&self.grid)?);
        }
        let bids = BidMatrix::new(rows)?;
        let outcome = auction::clear_with_rng(self.config.rule, &bids, self.config.supply, &mut self.tie_rng);

        let hi = self.config.value_hi;
        let transitions = actions
            .iter()
            .enumerate()
            .map(|(b, action)| {
                let per_slot: Vec<SlotResult> = (0..k)
                    .map(|slot| {
                        let value = valuations[b].get(slot);
                        let bid = bids.row(b)[slot];
                        match outcome.winner_at(b, slot) {
                            Some(w) => {
                                let payoff = value - w.payment;
                                SlotResult { won: true, bid, value, payment: w.payment, payoff, reward: reward(true, payoff, value) }
                            }
                            None => SlotResult { won: false, bid, value, payment: 0.0, payoff: 0.0, reward: LOSS_PENALTY },
                        }
                    })
                    .collect();
                Transition {
                    observation: Observation::from_values(valuations[b].values(), hi),
                    action: action.clone(),
                    episode_reward: per_slot.iter().map(|s| s.reward).sum(),
                    per_slot,
                }
            })
            .collect();
        Ok(StepResult { transitions, outcome, valuations, bids })
    }
}
