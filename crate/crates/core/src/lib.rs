//! Multi-unit sealed-bid auctions with learning bidders.
//!
//! Bidders each hold several units of demand and submit one bid per unit.
//! The auctioneer sells `K` identical items under a discriminatory,
//! generalized second-price or uniform-price rule. Six learners (tabular
//! Q-learning, DQN, tabular REINFORCE, a policy-gradient network, A2C and
//! PPO) bid against each other or against random bidders, and the harness
//! logs every episode for the metrics and report code.

pub mod action;
pub mod agents;
pub mod auction;
pub mod checkpoint;
pub mod config;
pub mod env;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod nn;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod scenario;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use scalar::{Money, Real};
pub use scenario::{Rule, ScenarioConfig};

/// Bid matrix in currency units.
pub type Bids = auction::BidMatrix<f64>;
/// Clearing result in currency units.
pub type Outcome = auction::AuctionOutcome<f64>;
pub type Valuation = auction::ValuationVector<f64>;
/// Network type used by every agent.
pub type Network = nn::Mlp<f64>;
pub type Optimizer = nn::Adam<f64>;
