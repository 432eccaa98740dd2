//! Per-episode log rows, their CSV form, and the aggregates built from them.

mod svg;
mod tables;

pub use svg::{line_chart, Pane, Series};
pub use tables::{
    render_auction_table, render_bidder_table, summary_tables, AuctionSummary, BidderSummary, AUCTION_TABLE_HEADER, BIDDER_TABLE_HEADER,
};

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::agents::Algo;
use crate::error::{Error, Result};
use crate::scenario::Rule;

const VALUE_GUARD: f64 = 1e-6;

/// `(v - b) / v`: positive when shading, zero when truthful, negative when overbidding.
pub fn learning_ratio(value: f64, bid: f64) -> f64 {
    (value - bid) / value.max(VALUE_GUARD)
}

/// `b / v`, the alternative reading of the learning ratio.
pub fn bid_ratio(value: f64, bid: f64) -> f64 {
    bid / value.max(VALUE_GUARD)
}

/// Trailing mean over the last `window` points; early points average what
/// is available.
pub fn rolling_mean(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::Config("rolling window must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for (i, x) in series.iter().enumerate() {
        sum += x;
        if i >= window {
            sum -= series[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    Ok(out)
}

/// One bidder in one episode. Bids are listed high to low.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRow {
    pub episode: u64,
    /// 1-based bidder ID.
    pub agent_id: usize,
    pub algo: Algo,
    pub value: f64,
    pub bid1: f64,
    pub bid2: f64,
    pub units_won: usize,
    pub payment_total: f64,
    pub payoff_total: f64,
    pub reward_total: f64,
    pub learning_ratio1: f64,
    pub learning_ratio2: f64,
    pub bid_ratio1: f64,
    pub bid_ratio2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionRow {
    pub episode: u64,
    pub rule: Rule,
    pub supply: usize,
    pub revenue: f64,
    pub efficiency_ratio: f64,
    pub efficiency_gap: f64,
}

pub const EPISODE_HEADER: [&str; 14] = [
    "episode",
    "agent_id",
    "algo",
    "value",
    "bid1",
    "bid2",
    "units_won",
    "payment_total",
    "payoff_total",
    "reward_total",
    "learning_ratio1",
    "learning_ratio2",
    "bid_ratio1",
    "bid_ratio2",
];

pub const AUCTION_HEADER: [&str; 6] = ["episode", "rule", "K", "revenue", "efficiency_ratio", "efficiency_gap"];

fn real(x: f64) -> String {
    let s = format!("{x:.6}");
    // keep a single spelling of zero
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// A row type with a fixed CSV layout.
pub trait LogRecord: Sized {
    const HEADER: &'static [&'static str];
    fn to_fields(&self) -> Vec<String>;
    fn from_fields(fields: &csv::StringRecord) -> Result<Self>;
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    rec.get(i)
        .ok_or_else(|| Error::Log(format!("missing column `{name}`")))?
        .parse()
        .map_err(|_| Error::Log(format!("bad `{name}` value {:?}", rec.get(i).unwrap_or(""))))
}

impl LogRecord for EpisodeRow {
    const HEADER: &'static [&'static str] = &EPISODE_HEADER;

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.episode.to_string(),
            self.agent_id.to_string(),
            self.algo.label().to_string(),
            real(self.value),
            real(self.bid1),
            real(self.bid2),
            self.units_won.to_string(),
            real(self.payment_total),
            real(self.payoff_total),
            real(self.reward_total),
            real(self.learning_ratio1),
            real(self.learning_ratio2),
            real(self.bid_ratio1),
            real(self.bid_ratio2),
        ]
    }

    fn from_fields(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != EPISODE_HEADER.len() {
            return Err(Error::Log(format!("episode row has {} fields, expected {}", r.len(), EPISODE_HEADER.len())));
        }
        Ok(Self {
            episode: field(r, 0, "episode")?,
            agent_id: field(r, 1, "agent_id")?,
            algo: field(r, 2, "algo")?,
            value: field(r, 3, "value")?,
            bid1: field(r, 4, "bid1")?,
            bid2: field(r, 5, "bid2")?,
            units_won: field(r, 6, "units_won")?,
            payment_total: field(r, 7, "payment_total")?,
            payoff_total: field(r, 8, "payoff_total")?,
            reward_total: field(r, 9, "reward_total")?,
            learning_ratio1: field(r, 10, "learning_ratio1")?,
            learning_ratio2: field(r, 11, "learning_ratio2")?,
            bid_ratio1: field(r, 12, "bid_ratio1")?,
            bid_ratio2: field(r, 13, "bid_ratio2")?,
        })
    }
}

impl LogRecord for AuctionRow {
    const HEADER: &'static [&'static str] = &AUCTION_HEADER;

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.episode.to_string(),
            self.rule.to_string(),
            self.supply.to_string(),
            real(self.revenue),
            real(self.efficiency_ratio),
            real(self.efficiency_gap),
        ]
    }

    fn from_fields(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != AUCTION_HEADER.len() {
            return Err(Error::Log(format!("auction row has {} fields, expected {}", r.len(), AUCTION_HEADER.len())));
        }
        Ok(Self {
            episode: field(r, 0, "episode")?,
            rule: field(r, 1, "rule")?,
            supply: field(r, 2, "K")?,
            revenue: field(r, 3, "revenue")?,
            efficiency_ratio: field(r, 4, "efficiency_ratio")?,
            efficiency_gap: field(r, 5, "efficiency_gap")?,
        })
    }
}

/// Streaming CSV writer with LF line endings.
pub struct CsvLog<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvLog<W> {
    pub fn new<R: LogRecord>(out: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        inner.write_record(R::HEADER)?;
        Ok(Self { inner })
    }

    pub fn write<R: LogRecord>(&mut self, row: &R) -> Result<()> {
        self.inner.write_record(row.to_fields())?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

impl CsvLog<std::io::BufWriter<File>> {
    pub fn create<R: LogRecord>(path: &Path) -> Result<Self> {
        Self::new::<R>(std::io::BufWriter::new(File::create(path)?))
    }
}

pub fn write_csv<R: LogRecord>(rows: &[R], path: &Path) -> Result<()> {
    let mut log = CsvLog::create::<R>(path)?;
    for r in rows {
        log.write(r)?;
    }
    log.flush()
}

/// Rows read from a log, plus whether the final line was cut short.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLog<R> {
    pub rows: Vec<R>,
    pub truncated: bool,
}

/// Parse a log. A malformed final line is dropped and reported as
/// truncation; malformed lines elsewhere are errors.
pub fn parse_csv<R: LogRecord, Rd: Read>(input: Rd) -> Result<ParsedLog<R>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = reader.headers().map_err(|e| Error::Log(e.to_string()))?.clone();
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(Error::Log(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let records: Vec<std::result::Result<csv::StringRecord, csv::Error>> = reader.records().collect();
    let n = records.len();
    let mut rows = Vec::with_capacity(n);
    let mut truncated = false;
    for (i, rec) in records.into_iter().enumerate() {
        let parsed = rec.map_err(|e| Error::Log(e.to_string())).and_then(|r| R::from_fields(&r));
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i + 1 == n => truncated = true,
            Err(e) => return Err(Error::Log(format!("line {}: {e}", i + 2))),
        }
    }
    Ok(ParsedLog { rows, truncated })
}

pub fn read_csv<R: LogRecord>(path: &Path) -> Result<ParsedLog<R>> {
    parse_csv(File::open(path)?)
}
