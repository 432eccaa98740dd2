//! Session orchestration: pretraining against random bidders, tournaments,
//! and the log rows every episode produces.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::agents::{self, Algo, AgentContext, Bidder, HyperParams, Mode};
use crate::auction::{efficiency_gap, efficiency_ratio};
use crate::checkpoint::Checkpoint;
use crate::env::{AuctionEnv, StepResult};
use crate::error::{Error, Result};
use crate::metrics::{bid_ratio, learning_ratio, AuctionRow, CsvLog, EpisodeRow};
use crate::scenario::{Rule, ScenarioConfig};

pub const EPISODES_CSV: &str = "episodes.csv";
pub const AUCTIONS_CSV: &str = "auctions.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const CONFIG_FILE: &str = "config.toml";
/// Supplies used by the full experiment grid.
pub const SUPPLIES: [usize; 3] = [4, 6, 8];

/// Destination for log rows.
pub trait Sink {
    fn episode(&mut self, row: &EpisodeRow) -> Result<()>;
    fn auction(&mut self, row: &AuctionRow) -> Result<()>;
    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

pub struct NullSink;

impl Sink for NullSink {
    fn episode(&mut self, _: &EpisodeRow) -> Result<()> {
        Ok(())
    }

    fn auction(&mut self, _: &AuctionRow) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct MemorySink {
    pub episodes: Vec<EpisodeRow>,
    pub auctions: Vec<AuctionRow>,
}

impl Sink for MemorySink {
    fn episode(&mut self, row: &EpisodeRow) -> Result<()> {
        self.episodes.push(row.clone());
        Ok(())
    }

    fn auction(&mut self, row: &AuctionRow) -> Result<()> {
        self.auctions.push(row.clone());
        Ok(())
    }
}

/// Writes `episodes.csv` and `auctions.csv` into a run directory.
pub struct CsvSink {
    episodes: CsvLog<BufWriter<File>>,
    auctions: CsvLog<BufWriter<File>>,
}

impl CsvSink {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            episodes: CsvLog::create::<EpisodeRow>(&dir.join(EPISODES_CSV))?,
            auctions: CsvLog::create::<AuctionRow>(&dir.join(AUCTIONS_CSV))?,
        })
    }
}

impl Sink for CsvSink {
    fn episode(&mut self, row: &EpisodeRow) -> Result<()> {
        self.episodes.write(row)
    }

    fn auction(&mut self, row: &AuctionRow) -> Result<()> {
        self.auctions.write(row)
    }

    fn finish(&mut self) -> Result<()> {
        self.episodes.flush()?;
        self.auctions.flush()
    }
}

/// One reset-act-step cycle. With `learn`, every agent receives its own
/// transition afterwards.
pub fn run_episode(env: &mut AuctionEnv, agents: &mut [Box<dyn Bidder>], explore: bool, learn: bool) -> Result<StepResult> {
    let obs = env.reset();
    let actions = agents.iter_mut().zip(&obs).map(|(a, o)| a.act(o, explore)).collect::<Result<Vec<_>>>()?;
    let step = env.step(&actions)?;
    if learn {
        for (a, t) in agents.iter_mut().zip(&step.transitions) {
            a.learn(t)?;
        }
    }
    Ok(step)
}

/// Log row for bidder `index` (0-based) of a finished episode.
pub fn episode_row(episode: u64, index: usize, id: usize, algo: Algo, step: &StepResult) -> EpisodeRow {
    let t = &step.transitions[index];
    let value = |s: usize| t.per_slot.get(s).map_or(0.0, |x| x.value);
    let bid = |s: usize| t.per_slot.get(s).map_or(0.0, |x| x.bid);
    EpisodeRow {
        episode,
        agent_id: id,
        algo,
        value: value(0),
        bid1: bid(0),
        bid2: bid(1),
        units_won: t.units_won(),
        payment_total: t.payment_total(),
        payoff_total: t.payoff_total(),
        reward_total: t.episode_reward,
        learning_ratio1: learning_ratio(value(0), bid(0)),
        learning_ratio2: learning_ratio(value(1), bid(1)),
        bid_ratio1: bid_ratio(value(0), bid(0)),
        bid_ratio2: bid_ratio(value(1), bid(1)),
    }
}

pub fn auction_row(episode: u64, scenario: &ScenarioConfig, step: &StepResult) -> AuctionRow {
    AuctionRow {
        episode,
        rule: scenario.rule,
        supply: scenario.supply,
        revenue: step.outcome.revenue,
        efficiency_ratio: efficiency_ratio(&step.valuations, &step.outcome, scenario.supply),
        efficiency_gap: efficiency_gap(&step.valuations, &step.outcome, scenario.supply),
    }
}

/// A seated bidder.
pub struct Member {
    /// 1-based bidder ID.
    pub id: usize,
    pub agent: Box<dyn Bidder>,
    /// Whether its rows go to the episode log.
    pub logged: bool,
}

/// A roster bound to an environment.
pub struct Session {
    scenario: ScenarioConfig,
    env: AuctionEnv,
    ids: Vec<usize>,
    logged: Vec<bool>,
    agents: Vec<Box<dyn Bidder>>,
    episode: u64,
}

impl Session {
    pub fn new(scenario: ScenarioConfig, members: Vec<Member>) -> Result<Self> {
        if members.len() != scenario.n_bidders {
            return Err(Error::Config(format!("roster of {} for {} bidders", members.len(), scenario.n_bidders)));
        }
        let env = AuctionEnv::new(scenario.clone())?;
        let mut ids = Vec::new();
        let mut logged = Vec::new();
        let mut agents = Vec::new();
        for m in members {
            ids.push(m.id);
            logged.push(m.logged);
            agents.push(m.agent);
        }
        Ok(Self { scenario, env, ids, logged, agents, episode: 0 })
    }

    pub fn agents(&self) -> &[Box<dyn Bidder>] {
        &self.agents
    }

    pub fn into_agents(self) -> Vec<Box<dyn Bidder>> {
        self.agents
    }

    /// Play `episodes` episodes with exploration and learning on.
    pub fn run(&mut self, episodes: u64, sink: &mut dyn Sink) -> Result<()> {
        let tick = (episodes / 10).max(1);
        for _ in 0..episodes {
            let step = run_episode(&mut self.env, &mut self.agents, true, true)?;
            let ep = self.episode;
            for (i, (&id, &logged)) in self.ids.iter().zip(&self.logged).enumerate() {
                if logged {
                    sink.episode(&episode_row(ep, i, id, self.agents[i].algo(), &step))?;
                }
            }
            sink.auction(&auction_row(ep, &self.scenario, &step))?;
            self.episode += 1;
            if self.episode % tick == 0 {
                log::info!("{} {}: episode {}/{}", self.scenario.rule, self.scenario.supply, self.episode, episodes);
            }
        }
        sink.finish()
    }
}

/// Train one learner against random bidders. The learner sits at ID 1 and
/// is the only bidder logged.
pub fn pretrain(algo: Algo, scenario: &ScenarioConfig, hyper: &HyperParams, sink: &mut dyn Sink) -> Result<Box<dyn Bidder>> {
    let ctx = AgentContext::from_scenario(scenario)?;
    let seed = scenario.master_seed;
    let mut members = vec![Member { id: 1, agent: agents::build(algo, &ctx, hyper, seed, 0)?, logged: true }];
    for i in 1..scenario.n_bidders {
        members.push(Member { id: i + 1, agent: agents::build(Algo::Random, &ctx, hyper, seed, i as u64)?, logged: false });
    }
    let mut session = Session::new(scenario.clone(), members)?;
    session.run(scenario.episodes, sink)?;
    Ok(session.into_agents().swap_remove(0))
}

/// Where a tournament seat gets its agent.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Fresh,
    Checkpoint(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seat {
    pub algo: Algo,
    pub source: Source,
    pub mode: Mode,
}

/// Algorithms in ID order: the six distinct learners, or six PPO copies.
pub fn tournament_algos(all_ppo: bool) -> Vec<Algo> {
    if all_ppo {
        vec![Algo::Ppo; 6]
    } else {
        Algo::TOURNAMENT.to_vec()
    }
}

/// Head-to-head session. Seat `i` becomes bidder `i + 1` and gets its own
/// random streams, so identical checkpoints still act independently.
pub fn tournament(scenario: &ScenarioConfig, seats: &[Seat], hyper: &HyperParams, sink: &mut dyn Sink) -> Result<Vec<Box<dyn Bidder>>> {
    let ctx = AgentContext::from_scenario(scenario)?;
    let seed = scenario.master_seed;
    let mut members = Vec::with_capacity(seats.len());
    for (i, seat) in seats.iter().enumerate() {
        let mut agent = match &seat.source {
            Source::Fresh => agents::build(seat.algo, &ctx, hyper, seed, i as u64)?,
            Source::Checkpoint(path) => {
                let ck = Checkpoint::load(path)?;
                ck.expect_algo(seat.algo)?;
                agents::restore(&ck, &ctx, hyper, seed, i as u64)?
            }
        };
        agent.set_mode(seat.mode);
        members.push(Member { id: i + 1, agent, logged: true });
    }
    let mut session = Session::new(scenario.clone(), members)?;
    session.run(scenario.episodes, sink)?;
    Ok(session.into_agents())
}

/// One cell of the pretraining grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PretrainJob {
    pub algo: Algo,
    pub rule: Rule,
    pub supply: usize,
}

/// Every learner under every rule and supply: 6 x 3 x 3 sessions.
pub fn pretrain_manifest() -> Vec<PretrainJob> {
    let mut jobs = Vec::new();
    for rule in Rule::ALL {
        for supply in SUPPLIES {
            for algo in Algo::LEARNERS {
                jobs.push(PretrainJob { algo, rule, supply });
            }
        }
    }
    jobs
}

/// `root/{rule}_{K}_{tag}_{seed}`.
pub fn run_dir(root: &Path, rule: Rule, supply: usize, tag: &str, seed: u64) -> PathBuf {
    root.join(format!("{rule}_{supply}_{tag}_{seed}"))
}
