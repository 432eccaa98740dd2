use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Payment rule applied after the top-`K` bids are selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// Discriminatory price: each winning bid pays itself.
    Dp,
    /// Generalized second price: pay the next lower bid from another bidder.
    Gsp,
    /// Uniform price: every unit pays the highest losing bid.
    Up,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::Dp, Rule::Gsp, Rule::Up];

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Dp => "dp",
            Rule::Gsp => "gsp",
            Rule::Up => "up",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dp" => Ok(Rule::Dp),
            "gsp" => Ok(Rule::Gsp),
            "up" => Ok(Rule::Up),
            other => Err(Error::Config(format!("unknown auction rule `{other}`"))),
        }
    }
}

/// Static description of one auction market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub rule: Rule,
    #[serde(default = "defaults::bidders")]
    pub n_bidders: usize,
    #[serde(default = "defaults::units")]
    pub units_per_bidder: usize,
    /// Units on offer (`K`).
    pub supply: usize,
    #[serde(default = "defaults::value_lo")]
    pub value_lo: f64,
    #[serde(default = "defaults::value_hi")]
    pub value_hi: f64,
    #[serde(default = "defaults::grid_levels")]
    pub grid_levels: usize,
    pub episodes: u64,
    #[serde(default)]
    pub master_seed: u64,
}

mod defaults {
    pub fn bidders() -> usize {
        6
    }
    pub fn units() -> usize {
        2
    }
    pub fn value_lo() -> f64 {
        0.0
    }
    pub fn value_hi() -> f64 {
        10.0
    }
    pub fn grid_levels() -> usize {
        21
    }
}

impl ScenarioConfig {
    /// Six bidders demanding two units each, values on `[0, 10]`, 21 bid levels.
    pub fn standard(rule: Rule, supply: usize, episodes: u64, master_seed: u64) -> Self {
        Self {
            rule,
            n_bidders: defaults::bidders(),
            units_per_bidder: defaults::units(),
            supply,
            value_lo: defaults::value_lo(),
            value_hi: defaults::value_hi(),
            grid_levels: defaults::grid_levels(),
            episodes,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bidders < 2 {
            return Err(Error::Config("at least two bidders are required".into()));
        }
        if self.units_per_bidder < 1 {
            return Err(Error::Config("bidders must demand at least one unit".into()));
        }
        if self.supply <= 2 {
            return Err(Error::Config(format!("supply must exceed 2, got {}", self.supply)));
        }
        if self.n_bidders * self.units_per_bidder <= self.supply {
            return Err(Error::Config(format!(
                "total demand {}x{} must exceed supply {}",
                self.n_bidders, self.units_per_bidder, self.supply
            )));
        }
        if !(self.value_lo.is_finite() && self.value_hi.is_finite()) || self.value_lo < 0.0 {
            return Err(Error::Config("value bounds must be finite and non-negative".into()));
        }
        if self.value_lo >= self.value_hi {
            return Err(Error::Config("value_lo must be below value_hi".into()));
        }
        if self.grid_levels < 2 {
            return Err(Error::Config("grid_levels must be at least 2".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_scenarios_validate() {
        for rule in Rule::ALL {
            for k in [4, 6, 8] {
                ScenarioConfig::standard(rule, k, 10, 0).validate().unwrap();
            }
        }
    }

    #[test]
    fn rejects_degenerate_markets() {
        let mut c = ScenarioConfig::standard(Rule::Dp, 12, 10, 0);
        assert!(c.validate().is_err());
        c.supply = 2;
        assert!(c.validate().is_err());
        c = ScenarioConfig::standard(Rule::Dp, 4, 10, 0);
        c.grid_levels = 1;
        assert!(c.validate().is_err());
        c = ScenarioConfig::standard(Rule::Dp, 4, 10, 0);
        c.value_hi = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rule_parses_case_insensitively() {
        assert_eq!("GSP".parse::<Rule>().unwrap(), Rule::Gsp);
        assert!("vcg".parse::<Rule>().is_err());
    }
}
