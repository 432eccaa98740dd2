use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{real, AuctionRow, EpisodeRow};
use crate::agents::Algo;
use crate::scenario::Rule;

/// One line of the bidder ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct BidderSummary {
    pub rank: usize,
    pub id: usize,
    pub algo: Algo,
    pub payoff_total: f64,
    /// Mean payoff over episodes in which the bidder won at least one unit.
    pub payoff_mean: f64,
    /// Mean payoff over all episodes.
    pub payoff_mean_all: f64,
    /// Mean price paid per unit won.
    pub cost_mean: f64,
    pub items_won: u64,
    pub episodes: u64,
}

/// Revenue and efficiency for one (rule, supply) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionSummary {
    pub rule: Rule,
    pub supply: usize,
    pub episodes: u64,
    pub revenue_total: f64,
    pub revenue_mean: f64,
    pub revenue_min: f64,
    pub revenue_max: f64,
    pub revenue_sd: f64,
    pub efficiency_mean: f64,
    pub efficiency_min: f64,
    pub efficiency_max: f64,
    pub efficiency_sd: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[derive(Default)]
struct Acc {
    algo: Option<Algo>,
    payoff: f64,
    payment: f64,
    items: u64,
    episodes: u64,
    winning: u64,
}

struct Stats {
    n: u64,
    sum: f64,
    sum_sq: f64,
    min: f64,
    max: f64,
}

impl Stats {
    fn new() -> Self {
        Self { n: 0, sum: 0.0, sum_sq: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY }
    }

    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    fn mean(&self) -> f64 {
        ratio(self.sum, self.n as f64)
    }

    /// Sample standard deviation.
    fn sd(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0).sqrt()
    }
}

/// Bidder ranking by total payoff (ties by ID) and per-market auction table.
pub fn summary_tables(episodes: &[EpisodeRow], auctions: &[AuctionRow]) -> (Vec<BidderSummary>, Vec<AuctionSummary>) {
    let mut by_id: BTreeMap<usize, Acc> = BTreeMap::new();
    for r in episodes {
        let a = by_id.entry(r.agent_id).or_default();
        a.algo.get_or_insert(r.algo);
        a.payoff += r.payoff_total;
        a.payment += r.payment_total;
        a.items += r.units_won as u64;
        a.episodes += 1;
        if r.units_won > 0 {
            a.winning += 1;
        }
    }
    let mut bidders: Vec<BidderSummary> = by_id
        .into_iter()
        .map(|(id, a)| BidderSummary {
            rank: 0,
            id,
            algo: a.algo.unwrap_or(Algo::Random),
            payoff_total: a.payoff,
            payoff_mean: ratio(a.payoff, a.winning as f64),
            payoff_mean_all: ratio(a.payoff, a.episodes as f64),
            cost_mean: ratio(a.payment, a.items as f64),
            items_won: a.items,
            episodes: a.episodes,
        })
        .collect();
    // stable sort keeps ID order among equal totals
    bidders.sort_by(|a, b| b.payoff_total.total_cmp(&a.payoff_total));
    for (i, b) in bidders.iter_mut().enumerate() {
        b.rank = i + 1;
    }

    let mut markets: BTreeMap<(Rule, usize), (Stats, Stats)> = BTreeMap::new();
    for r in auctions {
        let (rev, eff) = markets.entry((r.rule, r.supply)).or_insert_with(|| (Stats::new(), Stats::new()));
        rev.push(r.revenue);
        eff.push(r.efficiency_ratio);
    }
    let auctions = markets
        .into_iter()
        .map(|((rule, supply), (rev, eff))| AuctionSummary {
            rule,
            supply,
            episodes: rev.n,
            revenue_total: rev.sum,
            revenue_mean: rev.mean(),
            revenue_min: rev.min,
            revenue_max: rev.max,
            revenue_sd: rev.sd(),
            efficiency_mean: eff.mean(),
            efficiency_min: eff.min,
            efficiency_max: eff.max,
            efficiency_sd: eff.sd(),
        })
        .collect();
    (bidders, auctions)
}

pub const BIDDER_TABLE_HEADER: [&str; 9] =
    ["rank", "id", "type", "payoff_total", "payoff_mean", "payoff_mean_all", "cost_mean", "items_won", "episodes"];

pub const AUCTION_TABLE_HEADER: [&str; 12] = [
    "rule",
    "K",
    "episodes",
    "revenue_total",
    "revenue_mean",
    "revenue_min",
    "revenue_max",
    "revenue_sd",
    "efficiency_mean",
    "efficiency_min",
    "efficiency_max",
    "efficiency_sd",
];

impl BidderSummary {
    pub fn to_fields(&self) -> Vec<String> {
        vec![
            self.rank.to_string(),
            self.id.to_string(),
            self.algo.label().to_string(),
            real(self.payoff_total),
            real(self.payoff_mean),
            real(self.payoff_mean_all),
            real(self.cost_mean),
            self.items_won.to_string(),
            self.episodes.to_string(),
        ]
    }
}

impl AuctionSummary {
    pub fn to_fields(&self) -> Vec<String> {
        vec![
            self.rule.to_string(),
            self.supply.to_string(),
            self.episodes.to_string(),
            real(self.revenue_total),
            real(self.revenue_mean),
            real(self.revenue_min),
            real(self.revenue_max),
            real(self.revenue_sd),
            real(self.efficiency_mean),
            real(self.efficiency_min),
            real(self.efficiency_max),
            real(self.efficiency_sd),
        ]
    }
}

fn render(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in &rows {
        for (w, f) in widths.iter_mut().zip(r) {
            *w = (*w).max(f.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, fields: &mut dyn Iterator<Item = &str>| {
        let cells: Vec<String> = fields.zip(&widths).map(|(f, w)| format!("{f:>w$}")).collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    };
    line(&mut out, &mut header.iter().copied());
    for r in &rows {
        line(&mut out, &mut r.iter().map(String::as_str));
    }
    out
}

pub fn render_bidder_table(rows: &[BidderSummary]) -> String {
    render(&BIDDER_TABLE_HEADER, rows.iter().map(BidderSummary::to_fields).collect())
}

pub fn render_auction_table(rows: &[AuctionSummary]) -> String {
    render(&AUCTION_TABLE_HEADER, rows.iter().map(AuctionSummary::to_fields).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ep(episode: u64, agent_id: usize, algo: Algo, units_won: usize, payment: f64, payoff: f64) -> EpisodeRow {
        EpisodeRow {
            episode,
            agent_id,
            algo,
            value: 5.0,
            bid1: 4.0,
            bid2: 3.0,
            units_won,
            payment_total: payment,
            payoff_total: payoff,
            reward_total: 0.0,
            learning_ratio1: 0.2,
            learning_ratio2: 0.4,
            bid_ratio1: 0.8,
            bid_ratio2: 0.6,
        }
    }

    #[test]
    fn hand_built_totals() {
        let eps = vec![
            ep(0, 1, Algo::Ppo, 2, 7.0, 3.0),
            ep(0, 2, Algo::A2c, 0, 0.0, 0.0),
            ep(1, 1, Algo::Ppo, 0, 0.0, 0.0),
            ep(1, 2, Algo::A2c, 1, 2.0, 3.0),
            ep(2, 1, Algo::Ppo, 1, 4.0, 1.0),
            ep(2, 2, Algo::A2c, 1, 1.5, 0.5),
        ];
        let (b, _) = summary_tables(&eps, &[]);
        assert_eq!(b[0].id, 1);
        assert_eq!(b[0].payoff_total, 4.0);
        assert_eq!(b[0].payoff_mean, 2.0);
        assert!((b[0].payoff_mean_all - 4.0 / 3.0).abs() < 1e-15);
        assert!((b[0].cost_mean - 11.0 / 3.0).abs() < 1e-15);
        assert_eq!(b[0].items_won, 3);
        assert_eq!((b[1].id, b[1].rank, b[1].payoff_total, b[1].items_won), (2, 2, 3.5, 2));
        assert_eq!(b[1].cost_mean, 1.75);
    }

    #[test]
    fn equal_totals_rank_by_id() {
        let eps = vec![ep(0, 3, Algo::Dqn, 1, 1.0, 2.0), ep(0, 1, Algo::Ppo, 1, 1.0, 2.0), ep(0, 2, Algo::A2c, 1, 1.0, 5.0)];
        let (b, _) = summary_tables(&eps, &[]);
        let ids: Vec<usize> = b.iter().map(|r| r.id).collect();
        assert_eq!(ids, vec![2, 1, 3]);
    }

    #[test]
    fn auction_table_groups_markets() {
        let rows: Vec<AuctionRow> = [(Rule::Dp, 4, 10.0, 0.8), (Rule::Dp, 4, 20.0, 1.0), (Rule::Up, 4, 6.0, 0.9)]
            .iter()
            .enumerate()
            .map(|(i, &(rule, supply, revenue, eff))| AuctionRow {
                episode: i as u64,
                rule,
                supply,
                revenue,
                efficiency_ratio: eff,
                efficiency_gap: 0.0,
            })
            .collect();
        let (_, a) = summary_tables(&[], &rows);
        assert_eq!(a.len(), 2);
        assert_eq!((a[0].rule, a[0].revenue_total, a[0].revenue_mean, a[0].revenue_min, a[0].revenue_max), (Rule::Dp, 30.0, 15.0, 10.0, 20.0));
        assert!((a[0].efficiency_mean - 0.9).abs() < 1e-15);
        assert!((a[0].revenue_sd - 50f64.sqrt()).abs() < 1e-12);
        assert_eq!(a[1].episodes, 1);
    }

    #[test]
    fn empty_logs_give_header_only_tables() {
        let (b, a) = summary_tables(&[], &[]);
        assert!(b.is_empty() && a.is_empty());
        assert_eq!(render_bidder_table(&b).lines().count(), 1);
    }
}
