//! Bid grid and action encodings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear map between grid levels `0..levels` and bids on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionGrid {
    pub levels: usize,
    pub lo: f64,
    pub hi: f64,
}

impl ActionGrid {
    pub fn new(levels: usize, lo: f64, hi: f64) -> Result<Self> {
        if levels < 2 || lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Config(format!("invalid grid: {levels} levels on [{lo}, {hi}]")));
        }
        Ok(Self { levels, lo, hi })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.levels - 1) as f64
    }

    pub fn decode(&self, level: usize) -> Result<f64> {
        if level >= self.levels {
            return Err(Error::ActionOutOfGrid { level, levels: self.levels });
        }
        if level == self.levels - 1 {
            return Ok(self.hi);
        }
        Ok(self.lo + level as f64 * (self.hi - self.lo) / (self.levels - 1) as f64)
    }

    /// Inverse of [`decode`](Self::decode); the bid must lie on the grid.
    pub fn encode(&self, bid: f64) -> Result<usize> {
        let pos = (bid - self.lo) / self.step();
        let level = pos.round();
        if !(0.0..self.levels as f64).contains(&level) || (pos - level).abs() > 1e-9 {
            return Err(Error::Config(format!("bid {bid} is not a grid point")));
        }
        Ok(level as usize)
    }

    /// Highest level whose bid does not exceed `value`.
    pub fn max_level_at_or_below(&self, value: f64) -> Option<usize> {
        if value < self.lo {
            return None;
        }
        let mut level = (((value - self.lo) / self.step()).floor() as usize).min(self.levels - 1);
        // guard against rounding in the division
        while level > 0 && self.decode(level).ok()? > value {
            level -= 1;
        }
        while level + 1 < self.levels && self.decode(level + 1).ok()? <= value {
            level += 1;
        }
        Some(level)
    }

    /// Number of weakly decreasing level pairs `(hi, lo)`.
    pub fn joint_actions(&self) -> usize {
        self.levels * (self.levels + 1) / 2
    }
}

/// Grid levels submitted by one bidder, in the order the policy produced them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BidAction {
    pub levels: Vec<usize>,
}

impl BidAction {
    pub fn new(levels: Vec<usize>) -> Self {
        Self { levels }
    }

    pub fn validate(&self, grid: &ActionGrid, units: usize) -> Result<()> {
        if self.levels.len() != units {
            return Err(Error::Shape(format!("action has {} levels, expected {units}", self.levels.len())));
        }
        if let Some(&level) = self.levels.iter().find(|&&l| l >= grid.levels) {
            return Err(Error::ActionOutOfGrid { level, levels: grid.levels });
        }
        Ok(())
    }

    /// Levels sorted high to low.
    pub fn canonical(&self) -> Vec<usize> {
        let mut v = self.levels.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    pub fn decode(&self, grid: &ActionGrid) -> Result<Vec<f64>> {
        self.canonical().into_iter().map(|l| grid.decode(l)).collect()
    }
}

/// Index of the canonical pair `(high, low)` with `high >= low`.
pub fn joint_index(high: usize, low: usize) -> usize {
    debug_assert!(high >= low);
    high * (high + 1) / 2 + low
}

/// Inverse of [`joint_index`].
pub fn joint_pair(index: usize) -> (usize, usize) {
    // largest h with h(h+1)/2 <= index
    let mut high = ((((8 * index + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    while high * (high + 1) / 2 > index {
        high -= 1;
    }
    while (high + 1) * (high + 2) / 2 <= index {
        high += 1;
    }
    (high, index - high * (high + 1) / 2)
}
