use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use maulab::agents::{Algo, Mode};
use maulab::config::SeatConfig;
use maulab::harness::{self, CsvSink, Seat, Source, CHECKPOINT_FILE, CONFIG_FILE};
use maulab::report;
use maulab::{Error, ExperimentConfig, Rule, ScenarioConfig};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CHECKPOINT: u8 = 4;
const EXIT_LOGS: u8 = 5;

const DEFAULT_EPISODES: u64 = 100_000;

#[derive(Parser)]
#[command(name = "maulab", version, about = "Multi-unit auctions with learning bidders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train learners against five random bidders.
    Pretrain(PretrainArgs),
    /// Run the six-bidder head-to-head session.
    Tournament(TournamentArgs),
    /// Summarize finished runs into tables and figures.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// Payment rule.
    #[arg(long, value_parser = ["dp", "gsp", "up"])]
    auction: Option<String>,
    /// Units on offer.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["4", "6", "8"]))]
    items: Option<String>,
    #[arg(long)]
    episodes: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output root; run directories are created beneath it.
    #[arg(long, env = "MAULAB_OUT")]
    out: Option<PathBuf>,
    /// Experiment file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PretrainArgs {
    #[arg(long, required_unless_present = "all", value_parser = ["ql", "dqn", "vpg", "dpg", "dpn", "a2c", "ppo"])]
    algo: Option<String>,
    /// Run all 54 algorithm x rule x supply sessions.
    #[arg(long, conflicts_with_all = ["algo", "auction", "items"])]
    all: bool,
    /// Worker threads for --all.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TournamentArgs {
    /// Seat six copies of the PPO agent.
    #[arg(long)]
    all_ppo: bool,
    /// Disable learning during the session.
    #[arg(long)]
    freeze: bool,
    /// Start from untrained agents instead of checkpoints.
    #[arg(long)]
    fresh: bool,
    /// Root holding the pretraining run directories (default: the output root).
    #[arg(long)]
    checkpoints: Option<PathBuf>,
    /// Seed of the pretraining runs to load (default: --seed).
    #[arg(long)]
    pretrain_seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory; repeat to combine runs.
    #[arg(long, required = true)]
    run: Vec<PathBuf>,
    /// Where to write tables and figures (default: the first run directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Shape(_) | Error::ActionOutOfGrid { .. } => EXIT_USAGE,
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        Error::MissingCheckpoint(_) | Error::Checkpoint(_) | Error::Integrity => EXIT_CHECKPOINT,
        Error::Log(_) => EXIT_LOGS,
        _ => 1,
    }
}

/// Scenario and hyperparameters from the config file (if any) with flags on top.
fn experiment(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(ScenarioConfig::standard(Rule::Dp, 4, DEFAULT_EPISODES, 0)),
    };
    if let Some(a) = &common.auction {
        cfg.scenario.rule = a.parse()?;
    }
    if let Some(k) = &common.items {
        cfg.scenario.supply = k.parse().map_err(|_| Error::Config(format!("bad --items {k}")))?;
    }
    if let Some(e) = common.episodes {
        cfg.scenario.episodes = e;
    }
    if let Some(s) = common.seed {
        cfg.scenario.master_seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn pretrain_one(cfg: &ExperimentConfig, algo: Algo) -> Result<PathBuf, Error> {
    let sc = &cfg.scenario;
    let dir = harness::run_dir(&cfg.out_dir, sc.rule, sc.supply, algo.as_str(), sc.master_seed);
    let mut snapshot = cfg.clone();
    snapshot.roster.clear();
    snapshot.save_snapshot(&dir.join(CONFIG_FILE))?;
    let mut sink = CsvSink::create(&dir)?;
    let hyper = snapshot.materialized().hyper;
    let agent = harness::pretrain(algo, sc, &hyper, &mut sink)?;
    agent.checkpoint().save(&dir.join(CHECKPOINT_FILE))?;
    Ok(dir)
}

fn write_manifest(cfg: &ExperimentConfig, jobs: &[harness::PretrainJob]) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join("manifest.csv");
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&path)?;
    w.write_record(["algo", "rule", "K", "episodes", "seed", "dir"])?;
    for j in jobs {
        let dir = harness::run_dir(&cfg.out_dir, j.rule, j.supply, j.algo.as_str(), cfg.scenario.master_seed);
        w.write_record([
            j.algo.as_str().to_string(),
            j.rule.to_string(),
            j.supply.to_string(),
            cfg.scenario.episodes.to_string(),
            cfg.scenario.master_seed.to_string(),
            dir.display().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(path)
}

fn pretrain(args: PretrainArgs) -> Result<Vec<PathBuf>, Error> {
    let cfg = experiment(&args.common)?;
    if !args.all {
        let algo: Algo = args.algo.as_deref().unwrap_or("ppo").parse()?;
        return Ok(vec![pretrain_one(&cfg, algo)?]);
    }
    let jobs = harness::pretrain_manifest();
    let manifest = write_manifest(&cfg, &jobs)?;
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::new());
    let failure = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..args.jobs.min(jobs.len() as u64) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= jobs.len() || failure.lock().unwrap().is_some() {
                    break;
                }
                let j = jobs[i];
                let mut c = cfg.clone();
                c.scenario.rule = j.rule;
                c.scenario.supply = j.supply;
                match pretrain_one(&c, j.algo) {
                    Ok(dir) => done.lock().unwrap().push((i, dir)),
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut done = done.into_inner().unwrap();
    done.sort();
    let mut paths = vec![manifest];
    paths.extend(done.into_iter().map(|(_, d)| d));
    Ok(paths)
}

fn tournament(args: TournamentArgs) -> Result<Vec<PathBuf>, Error> {
    let cfg = experiment(&args.common)?;
    let sc = cfg.scenario.clone();
    let mode = if args.freeze { Mode::Freeze } else { Mode::Train };
    let ck_root = args.checkpoints.clone().unwrap_or_else(|| cfg.out_dir.clone());
    let pre_seed = args.pretrain_seed.unwrap_or(sc.master_seed);
    let roster: Vec<SeatConfig> = if !cfg.roster.is_empty() && !args.all_ppo {
        cfg.roster.clone()
    } else {
        harness::tournament_algos(args.all_ppo)
            .into_iter()
            .map(|algo| SeatConfig {
                algo,
                checkpoint: (!args.fresh).then(|| harness::run_dir(&ck_root, sc.rule, sc.supply, algo.as_str(), pre_seed).join(CHECKPOINT_FILE)),
                mode,
            })
            .collect()
    };
    let seats: Vec<Seat> = roster
        .iter()
        .map(|s| Seat { mode: if args.freeze { Mode::Freeze } else { s.mode }, ..s.seat() })
        .collect();
    for s in &seats {
        if let Source::Checkpoint(p) = &s.source {
            if !p.exists() {
                return Err(Error::MissingCheckpoint(p.clone()));
            }
        }
    }
    let tag = if args.all_ppo { "allppo" } else { "tournament" };
    let dir = harness::run_dir(&cfg.out_dir, sc.rule, sc.supply, tag, sc.master_seed);
    let mut snapshot = cfg.clone();
    snapshot.roster = roster;
    snapshot.save_snapshot(&dir.join(CONFIG_FILE))?;
    let mut sink = CsvSink::create(&dir)?;
    let agents = harness::tournament(&sc, &seats, &snapshot.materialized().hyper, &mut sink)?;
    let ck_dir = dir.join("checkpoints");
    for (i, a) in agents.iter().enumerate() {
        a.checkpoint().save(&ck_dir.join(format!("{}_{}.bin", i + 1, a.algo().as_str())))?;
    }
    Ok(vec![dir])
}

fn report(args: ReportArgs) -> Result<Vec<PathBuf>, Error> {
    let runs = args.run.iter().map(|d| report::load_run(d)).collect::<Result<Vec<_>, _>>()?;
    let out = args.out.clone().unwrap_or_else(|| args.run[0].clone());
    let r = report::report(&runs, &out)?;
    for w in &r.warnings {
        log::warn!("{w}");
    }
    print!("{}", r.render());
    Ok(r.files)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Pretrain(a) => pretrain(a),
        Command::Tournament(a) => tournament(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
