use rand::Rng;

use super::{AgentContext, Algo, Bidder, Mode};
use crate::action::BidAction;
use crate::checkpoint::Checkpoint;
use crate::env::{Observation, Transition};
use crate::error::Result;
use crate::rng::SimRng;

/// Bids uniformly over the grid points at or below each unit's value.
pub struct RandomBidder {
    ctx: AgentContext,
    rng: SimRng,
    mode: Mode,
}

impl RandomBidder {
    pub fn new(ctx: AgentContext, rng: SimRng) -> Self {
        Self { ctx, rng, mode: Mode::Train }
    }
}

impl Bidder for RandomBidder {
    fn algo(&self) -> Algo {
        Algo::Random
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    fn act(&mut self, obs: &Observation, _explore: bool) -> Result<BidAction> {
        self.ctx.check_obs(obs)?;
        let levels = obs
            .values
            .iter()
            .map(|v| {
                let top = self.ctx.grid.max_level_at_or_below(*v).unwrap_or(0);
                self.rng.random_range(0..=top)
            })
            .collect();
        Ok(BidAction::new(levels))
    }

    fn learn(&mut self, _transition: &Transition) -> Result<()> {
        Ok(())
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(Algo::Random)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use crate::scenario::{Rule, ScenarioConfig};

    #[test]
    fn bids_uniformly_at_or_below_value() {
        let ctx = AgentContext::from_scenario(&ScenarioConfig::standard(Rule::Dp, 4, 10, 0)).unwrap();
        let mut agent = RandomBidder::new(ctx, stream(1, Stream::Agent, 0));
        let obs = Observation::from_values(&[6.0, 6.0], 10.0);
        let mut counts = [0usize; 21];
        for _ in 0..13_000 {
            for l in agent.act(&obs, true).unwrap().levels {
                counts[l] += 1;
            }
        }
        assert!(counts[13..].iter().all(|c| *c == 0));
        for c in &counts[..13] {
            assert!((*c as f64 - 2_000.0).abs() < 200.0, "{counts:?}");
        }
    }

    #[test]
    fn never_above_value() {
        let ctx = AgentContext::from_scenario(&ScenarioConfig::standard(Rule::Up, 4, 10, 0)).unwrap();
        let mut agent = RandomBidder::new(ctx, stream(2, Stream::Agent, 0));
        let mut vrng = stream(3, Stream::Values, 0);
        for _ in 0..5_000 {
            let v: f64 = vrng.random_range(0.0..=10.0);
            let obs = Observation::from_values(&[v, v], 10.0);
            for b in agent.act(&obs, true).unwrap().decode(&ctx.grid).unwrap() {
                assert!(b <= v);
            }
        }
    }
}
