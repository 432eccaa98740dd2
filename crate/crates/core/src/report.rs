//! Tables and figures from finished run directories.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::harness::{AUCTIONS_CSV, CONFIG_FILE, EPISODES_CSV};
use crate::metrics::{
    line_chart, read_csv, render_auction_table, render_bidder_table, rolling_mean, summary_tables, AuctionRow, AuctionSummary, BidderSummary,
    EpisodeRow, Pane, Series, AUCTION_TABLE_HEADER, BIDDER_TABLE_HEADER,
};
use crate::scenario::Rule;

pub const BIDDER_TABLE: &str = "bidder_table.csv";
pub const AUCTION_TABLE: &str = "auction_table.csv";
pub const FIGURES: [&str; 3] = ["learning_ratios.svg", "revenue.svg", "efficiency.svg"];

/// Window for the smoothed series in the figures.
pub const WINDOW: usize = 1_000;
const MAX_POINTS: usize = 500;

/// Logs of one run directory.
#[derive(Debug, Clone)]
pub struct RunLogs {
    pub name: String,
    pub episodes: Vec<EpisodeRow>,
    pub auctions: Vec<AuctionRow>,
    pub warnings: Vec<String>,
}

/// Load a run directory. Missing, empty or damaged logs are errors; a cut
/// final line or fewer episodes than configured only produce warnings.
pub fn load_run(dir: &Path) -> Result<RunLogs> {
    let name = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
    let open = |file: &str| {
        let path = dir.join(file);
        if !path.exists() {
            return Err(Error::Log(format!("{} is missing", path.display())));
        }
        Ok(path)
    };
    let episodes = read_csv::<EpisodeRow>(&open(EPISODES_CSV)?)?;
    let auctions = read_csv::<AuctionRow>(&open(AUCTIONS_CSV)?)?;
    let mut warnings = Vec::new();
    if episodes.truncated || auctions.truncated {
        warnings.push(format!("{name}: final log line is incomplete and was skipped"));
    }
    if auctions.rows.is_empty() {
        return Err(Error::Log(format!("{name}: logs hold no episodes")));
    }
    let played = auctions.rows.len() as u64;
    if let Ok(cfg) = ExperimentConfig::load(&dir.join(CONFIG_FILE)) {
        if played < cfg.scenario.episodes {
            warnings.push(format!("{name}: {played} of {} episodes logged; tables cover the available episodes", cfg.scenario.episodes));
        }
    }
    Ok(RunLogs { name, episodes: episodes.rows, auctions: auctions.rows, warnings })
}

#[derive(Debug, Clone)]
pub struct Report {
    pub bidders: Vec<(String, Vec<BidderSummary>)>,
    pub auctions: Vec<AuctionSummary>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, rows) in &self.bidders {
            out.push_str(&format!("{name}\n{}\n", render_bidder_table(rows)));
        }
        out.push_str(&render_auction_table(&self.auctions));
        out
    }
}

fn thin(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points;
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let last = *points.last().unwrap();
    let mut out: Vec<(f64, f64)> = points.into_iter().step_by(stride).collect();
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

fn smoothed(xs: &[f64], ys: &[f64]) -> Result<Vec<(f64, f64)>> {
    Ok(thin(xs.iter().copied().zip(rolling_mean(ys, WINDOW)?).collect()))
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Build tables and figures for `runs` and write them to `out`.
pub fn report(runs: &[RunLogs], out: &Path) -> Result<Report> {
    std::fs::create_dir_all(out)?;
    let mut bidders = Vec::new();
    let mut all_auctions = Vec::new();
    let mut ratio_panes = Vec::new();
    for run in runs {
        let (b, _) = summary_tables(&run.episodes, &[]);
        let mut by_id: BTreeMap<usize, Vec<&EpisodeRow>> = BTreeMap::new();
        for r in &run.episodes {
            by_id.entry(r.agent_id).or_default().push(r);
        }
        for (id, rows) in by_id {
            let xs: Vec<f64> = rows.iter().map(|r| r.episode as f64).collect();
            let l1: Vec<f64> = rows.iter().map(|r| r.learning_ratio1).collect();
            let l2: Vec<f64> = rows.iter().map(|r| r.learning_ratio2).collect();
            ratio_panes.push(Pane {
                title: format!("{} / {} (ID {id})", run.name, rows[0].algo.label()),
                series: vec![
                    Series { label: "unit 1".into(), points: smoothed(&xs, &l1)? },
                    Series { label: "unit 2".into(), points: smoothed(&xs, &l2)? },
                ],
            });
        }
        bidders.push((run.name.clone(), b));
        all_auctions.extend(run.auctions.iter().cloned());
    }
    let (_, auctions) = summary_tables(&[], &all_auctions);

    let mut by_market: BTreeMap<usize, BTreeMap<Rule, Vec<&AuctionRow>>> = BTreeMap::new();
    for r in &all_auctions {
        by_market.entry(r.supply).or_default().entry(r.rule).or_default().push(r);
    }
    let market_panes = |pick: fn(&AuctionRow) -> f64| -> Result<Vec<Pane>> {
        by_market
            .iter()
            .map(|(supply, rules)| {
                let series = rules
                    .iter()
                    .map(|(rule, rows)| {
                        let xs: Vec<f64> = rows.iter().map(|r| r.episode as f64).collect();
                        let ys: Vec<f64> = rows.iter().map(|r| pick(r)).collect();
                        Ok(Series { label: rule.as_str().to_uppercase(), points: smoothed(&xs, &ys)? })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Pane { title: format!("{supply} items"), series })
            })
            .collect()
    };

    let mut files = Vec::new();
    let path = out.join(BIDDER_TABLE);
    let mut header = vec!["run"];
    header.extend(BIDDER_TABLE_HEADER);
    write_table(
        &path,
        &header,
        bidders.iter().flat_map(|(name, rows)| {
            rows.iter().map(move |r| {
                let mut f = vec![name.clone()];
                f.extend(r.to_fields());
                f
            })
        }),
    )?;
    files.push(path);
    let path = out.join(AUCTION_TABLE);
    write_table(&path, &AUCTION_TABLE_HEADER, auctions.iter().map(AuctionSummary::to_fields))?;
    files.push(path);

    let figures = [
        line_chart("Learning ratio (rolling mean)", "episode", "(value - bid) / value", &ratio_panes),
        line_chart("Revenue (rolling mean)", "episode", "revenue", &market_panes(|r| r.revenue)?),
        line_chart("Efficiency (rolling mean)", "episode", "efficiency ratio", &market_panes(|r| r.efficiency_ratio)?),
    ];
    for (name, svg) in FIGURES.iter().zip(figures) {
        let path = out.join(name);
        std::fs::write(&path, svg)?;
        files.push(path);
    }
    let warnings = runs.iter().flat_map(|r| r.warnings.iter().cloned()).collect();
    Ok(Report { bidders, auctions, warnings, files })
}
