//! Bid ranking, the three payment rules, revenue and allocative efficiency.
//!
//! Everything here is a pure function of the bids and an explicit
//! [`TieBreak`]. The code is generic over [`Money`] so that the same rules run
//! on floating point during simulation and on exact rationals in tests.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{total, Money};
use crate::scenario::Rule;

/// Position of one bid: which bidder submitted it and for which unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub bidder: usize,
    pub slot: usize,
}

/// Sort a row into weakly decreasing order.
pub fn canonicalize<T: Money>(row: &mut [T]) {
    row.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
}

/// All submitted bids, one weakly decreasing row per bidder.
#[derive(Debug, Clone, PartialEq)]
pub struct BidMatrix<T> {
    rows: Vec<Vec<T>>,
    units: usize,
}

impl<T: Money> BidMatrix<T> {
    /// Build from raw rows. Rows are sorted descending; every row must have
    /// the same length and every bid must be non-negative.
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let units = rows.first().map_or(0, Vec::len);
        let mut rows = rows;
        for (i, row) in rows.iter_mut().enumerate() {
            if row.len() != units {
                return Err(Error::Shape(format!(
                    "bidder {i} submitted {} bids, expected {units}",
                    row.len()
                )));
            }
            // rejects NaN too
            if !row.iter().all(|b| *b >= T::zero()) {
                return Err(Error::Config(format!("bidder {i} submitted a negative or undefined bid")));
            }
            canonicalize(row);
        }
        Ok(Self { rows, units })
    }

    pub fn n_bidders(&self) -> usize {
        self.rows.len()
    }

    pub fn units_per_bidder(&self) -> usize {
        self.units
    }

    pub fn len(&self) -> usize {
        self.rows.len() * self.units
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bid(&self, s: Slot) -> T {
        self.rows[s.bidder][s.slot]
    }

    pub fn row(&self, bidder: usize) -> &[T] {
        &self.rows[bidder]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    fn flat(&self, s: Slot) -> usize {
        s.bidder * self.units + s.slot
    }

    fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        (0..self.rows.len()).flat_map(move |bidder| (0..self.units).map(move |slot| Slot { bidder, slot }))
    }
}

/// Priority of every bid slot among equal bids; lower wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieBreak {
    priority: Vec<u32>,
}

impl TieBreak {
    /// Uniformly random order among equal bids.
    ///
    /// Equal bids from the same bidder keep their slot order, so a bidder's
    /// winning slots are always a prefix of its row.
    pub fn draw<T: Money, R: Rng + ?Sized>(bids: &BidMatrix<T>, rng: &mut R) -> Self {
        let mut priority: Vec<u32> = (0..bids.len() as u32).collect();
        priority.shuffle(rng);
        let k = bids.units_per_bidder();
        for b in 0..bids.n_bidders() {
            let row = bids.row(b);
            let mut start = 0;
            while start < k {
                let mut end = start + 1;
                while end < k && row[end] == row[start] {
                    end += 1;
                }
                let seg = &mut priority[b * k + start..b * k + end];
                seg.sort_unstable();
                start = end;
            }
        }
        Self { priority }
    }

    /// Ties resolved by bidder index, then slot index.
    pub fn by_index(n_slots: usize) -> Self {
        Self { priority: (0..n_slots as u32).collect() }
    }

    /// Explicit priorities in flat `bidder * k + slot` order.
    pub fn from_priorities(priority: Vec<u32>) -> Self {
        Self { priority }
    }

    pub fn priorities(&self) -> &[u32] {
        &self.priority
    }
}

/// Every bid slot, highest bid first; equal bids ordered by `tie`.
/// The first `K` entries are the winners.
pub fn rank_bids<T: Money>(bids: &BidMatrix<T>, tie: &TieBreak) -> Vec<Slot> {
    assert_eq!(tie.priority.len(), bids.len(), "tie-break does not match bid matrix");
    let mut order: Vec<Slot> = bids.slots().collect();
    order.sort_by(|a, b| {
        bids.bid(*b)
            .partial_cmp(&bids.bid(*a))
            .unwrap_or(Ordering::Equal)
            .then_with(|| tie.priority[bids.flat(*a)].cmp(&tie.priority[bids.flat(*b)]))
    });
    order
}

/// One allocated unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winner<T> {
    pub bidder: usize,
    pub slot: usize,
    pub bid: T,
    pub payment: T,
}

/// Allocation and payments after clearing, winners in rank order.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome<T> {
    pub rule: Rule,
    pub winners: Vec<Winner<T>>,
    /// Set only for the uniform-price rule.
    pub clearing_price: Option<T>,
    pub revenue: T,
}

impl<T: Money> AuctionOutcome<T> {
    fn from_winners(rule: Rule, winners: Vec<Winner<T>>, clearing_price: Option<T>) -> Self {
        let revenue = total(winners.iter().map(|w| w.payment));
        Self { rule, winners, clearing_price, revenue }
    }

    pub fn units_won(&self, bidder: usize) -> usize {
        self.winners.iter().filter(|w| w.bidder == bidder).count()
    }

    pub fn payment_of(&self, bidder: usize) -> T {
        total(self.winners.iter().filter(|w| w.bidder == bidder).map(|w| w.payment))
    }

    pub fn winner_at(&self, bidder: usize, slot: usize) -> Option<&Winner<T>> {
        self.winners.iter().find(|w| w.bidder == bidder && w.slot == slot)
    }
}

fn winners_from<T: Money>(bids: &BidMatrix<T>, ranked: &[Slot], supply: usize, pay: impl Fn(usize) -> T) -> Vec<Winner<T>> {
    ranked
        .iter()
        .take(supply)
        .enumerate()
        .map(|(pos, s)| Winner { bidder: s.bidder, slot: s.slot, bid: bids.bid(*s), payment: pay(pos) })
        .collect()
}

/// Pay-as-bid.
pub fn clear_dp<T: Money>(bids: &BidMatrix<T>, supply: usize, tie: &TieBreak) -> AuctionOutcome<T> {
    let ranked = rank_bids(bids, tie);
    let winners = winners_from(bids, &ranked, supply, |pos| bids.bid(ranked[pos]));
    AuctionOutcome::from_winners(Rule::Dp, winners, None)
}

/// Each winner pays the highest lower-ranked bid of a different bidder, or
/// zero when there is none.
pub fn clear_gsp<T: Money>(bids: &BidMatrix<T>, supply: usize, tie: &TieBreak) -> AuctionOutcome<T> {
    let ranked = rank_bids(bids, tie);
    let winners = winners_from(bids, &ranked, supply, |pos| {
        let own = ranked[pos].bidder;
        ranked[pos + 1..]
            .iter()
            .find(|s| s.bidder != own)
            .map_or_else(T::zero, |s| bids.bid(*s))
    });
    AuctionOutcome::from_winners(Rule::Gsp, winners, None)
}

/// Every unit pays the `(K+1)`-th highest bid, zero if there is no losing bid.
pub fn clear_up<T: Money>(bids: &BidMatrix<T>, supply: usize, tie: &TieBreak) -> AuctionOutcome<T> {
    let ranked = rank_bids(bids, tie);
    let price = ranked.get(supply).map_or_else(T::zero, |s| bids.bid(*s));
    let winners = winners_from(bids, &ranked, supply, |_| price);
    AuctionOutcome::from_winners(Rule::Up, winners, Some(price))
}

pub fn clear<T: Money>(rule: Rule, bids: &BidMatrix<T>, supply: usize, tie: &TieBreak) -> AuctionOutcome<T> {
    match rule {
        Rule::Dp => clear_dp(bids, supply, tie),
        Rule::Gsp => clear_gsp(bids, supply, tie),
        Rule::Up => clear_up(bids, supply, tie),
    }
}

/// Draw a tie-break from `rng` and clear under `rule`.
pub fn clear_with_rng<T: Money, R: Rng + ?Sized>(
    rule: Rule,
    bids: &BidMatrix<T>,
    supply: usize,
    rng: &mut R,
) -> AuctionOutcome<T> {
    let tie = TieBreak::draw(bids, rng);
    clear(rule, bids, supply, &tie)
}

pub fn revenue<T: Money>(outcome: &AuctionOutcome<T>) -> T {
    total(outcome.winners.iter().map(|w| w.payment))
}

/// A bidder's private marginal values, weakly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationVector<T> {
    values: Vec<T>,
}

impl<T: Money> ValuationVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if !values.iter().all(|v| *v >= T::zero()) {
            return Err(Error::Config("marginal values must be non-negative".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Config("marginal values must be weakly decreasing".into()));
        }
        Ok(Self { values })
    }

    /// The same value for each of `units` units.
    pub fn flat(value: T, units: usize) -> Result<Self> {
        Self::new(vec![value; units])
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, slot: usize) -> T {
        self.values[slot]
    }
}

fn top_k_sum<T: Money>(valuations: &[ValuationVector<T>], supply: usize) -> T {
    let mut all: Vec<T> = valuations.iter().flat_map(|v| v.values.iter().copied()).collect();
    canonicalize(&mut all);
    total(all.into_iter().take(supply))
}

// summed in the same order as `top_k_sum`, so an efficient allocation gives
// bit-identical totals
fn allocated_sum<T: Money>(valuations: &[ValuationVector<T>], outcome: &AuctionOutcome<T>) -> T {
    let mut won: Vec<T> = outcome.winners.iter().map(|w| valuations[w.bidder].get(w.slot)).collect();
    canonicalize(&mut won);
    total(won)
}

/// Value of the allocated units over the best attainable value of `K` units.
/// Returns one when nothing of value could be allocated.
pub fn efficiency_ratio<T: Money>(valuations: &[ValuationVector<T>], outcome: &AuctionOutcome<T>, supply: usize) -> T {
    let best = top_k_sum(valuations, supply);
    if best == T::zero() {
        return T::one();
    }
    allocated_sum(valuations, outcome) / best
}

/// Best attainable value minus allocated value; zero for an efficient allocation.
pub fn efficiency_gap<T: Money>(valuations: &[ValuationVector<T>], outcome: &AuctionOutcome<T>, supply: usize) -> T {
    top_k_sum(valuations, supply) - allocated_sum(valuations, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&[f64]]) -> BidMatrix<f64> {
        BidMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn example() -> BidMatrix<f64> {
        m(&[&[9.0, 7.0], &[8.0, 2.0], &[5.0, 1.0]])
    }

    fn payments_by_bidder(o: &AuctionOutcome<f64>, n: usize) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); n];
        for w in &o.winners {
            out[w.bidder].push(w.payment);
        }
        out
    }

    #[test]
    fn rank_example() {
        let b = example();
        let ranked = rank_bids(&b, &TieBreak::by_index(6));
        let top: Vec<(usize, usize)> = ranked[..4].iter().map(|s| (s.bidder, s.slot)).collect();
        assert_eq!(top, vec![(0, 0), (1, 0), (0, 1), (2, 0)]);
    }

    #[test]
    fn rows_are_canonicalized() {
        let b = m(&[&[2.0, 9.0]]);
        assert_eq!(b.row(0), &[9.0, 2.0]);
        assert!(BidMatrix::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(BidMatrix::new(vec![vec![-1.0, 2.0]]).is_err());
        assert!(BidMatrix::new(vec![vec![f64::NAN, 2.0]]).is_err());
    }

    #[test]
    fn dp_example() {
        let o = clear_dp(&example(), 4, &TieBreak::by_index(6));
        assert_eq!(payments_by_bidder(&o, 3), vec![vec![9.0, 7.0], vec![8.0], vec![5.0]]);
        assert_eq!(o.revenue, 29.0);
        assert_eq!(o.clearing_price, None);
        let single = m(&[&[3.0, 2.0], &[0.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(clear_dp(&single, 2, &TieBreak::by_index(6)).revenue, 5.0);
    }

    #[test]
    fn gsp_example() {
        let o = clear_gsp(&example(), 4, &TieBreak::by_index(6));
        let pays: Vec<f64> = o.winners.iter().map(|w| w.payment).collect();
        assert_eq!(pays, vec![8.0, 7.0, 5.0, 2.0]);
        assert_eq!(o.revenue, 22.0);
        let lone = m(&[&[9.0, 8.0], &[0.0, 0.0], &[0.0, 0.0]]);
        let o = clear_gsp(&lone, 2, &TieBreak::by_index(6));
        assert!(o.winners.iter().all(|w| w.bidder == 0 && w.payment == 0.0));
    }

    #[test]
    fn gsp_without_lower_foreign_bid_pays_zero() {
        let b = m(&[&[9.0, 8.0], &[7.0, 6.0]]);
        let o = clear_gsp(&b, 3, &TieBreak::by_index(4));
        // bidder 1's 7 is followed only by its own 6
        let pays: Vec<f64> = o.winners.iter().map(|w| w.payment).collect();
        assert_eq!(pays, vec![7.0, 7.0, 0.0]);
    }

    #[test]
    fn up_example() {
        let o = clear_up(&example(), 4, &TieBreak::by_index(6));
        assert_eq!(o.clearing_price, Some(2.0));
        assert_eq!(o.revenue, 8.0);
        let o = clear_up(&example(), 6, &TieBreak::by_index(6));
        assert_eq!(o.clearing_price, Some(0.0));
        assert_eq!(o.revenue, 0.0);
        assert_eq!(o.winners.len(), 6);
    }

    #[test]
    fn up_truthful_equal_values_zero_payoff() {
        let b = m(&[&[4.0, 4.0], &[4.0, 4.0], &[4.0, 4.0]]);
        let o = clear_up(&b, 4, &TieBreak::by_index(6));
        assert_eq!(o.clearing_price, Some(4.0));
        assert!(o.winners.iter().all(|w| w.bid - w.payment == 0.0));
    }

    #[test]
    fn zero_bids_zero_revenue() {
        let b = m(&[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]]);
        for rule in Rule::ALL {
            let o = clear(rule, &b, 4, &TieBreak::by_index(6));
            assert_eq!(o.winners.len(), 4);
            assert_eq!(o.revenue, 0.0);
        }
    }

    #[test]
    fn all_zero_ties_are_uniform() {
        let b = m(&[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut wins = [0usize; 3];
        let trials = 30_000;
        for _ in 0..trials {
            let o = clear_with_rng(Rule::Dp, &b, 3, &mut rng);
            for w in &o.winners {
                wins[w.bidder] += 1;
            }
        }
        for w in wins {
            let share = w as f64 / (3 * trials) as f64;
            assert!((share - 1.0 / 3.0).abs() < 0.01, "share {share}");
        }
    }

    #[test]
    fn tie_break_replays_under_fixed_seed() {
        let b = m(&[&[9.0, 9.0], &[9.0, 0.0]]);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| clear_with_rng(Rule::Dp, &b, 2, &mut rng).winners).collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
    }

    #[test]
    fn own_equal_bids_win_in_slot_order() {
        let b = m(&[&[5.0, 5.0], &[5.0, 5.0], &[5.0, 5.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let o = clear_with_rng(Rule::Gsp, &b, 3, &mut rng);
            for w in &o.winners {
                if w.slot == 1 {
                    assert!(o.winner_at(w.bidder, 0).is_some());
                }
            }
        }
    }

    #[test]
    fn revenue_sums_payments() {
        let o = clear_dp(&example(), 4, &TieBreak::by_index(6));
        assert_eq!(revenue(&o), 29.0);
        let o = clear_up(&example(), 4, &TieBreak::by_index(6));
        assert_eq!(revenue(&o), 8.0);
        let empty: AuctionOutcome<f64> = AuctionOutcome::from_winners(Rule::Dp, vec![], None);
        assert_eq!(revenue(&empty), 0.0);
    }

    #[test]
    fn efficiency_examples() {
        let vals: Vec<ValuationVector<f64>> =
            [[10.0, 10.0], [1.0, 1.0], [1.0, 1.0]].iter().map(|v| ValuationVector::new(v.to_vec()).unwrap()).collect();
        let good = m(&[&[9.0, 9.0], &[1.0, 1.0], &[0.0, 0.0]]);
        let o = clear_dp(&good, 2, &TieBreak::by_index(6));
        assert_eq!(efficiency_ratio(&vals, &o, 2), 1.0);
        assert_eq!(efficiency_gap(&vals, &o, 2), 0.0);
        let bad = m(&[&[9.0, 0.0], &[5.0, 1.0], &[0.0, 0.0]]);
        let o = clear_dp(&bad, 2, &TieBreak::by_index(6));
        assert!((efficiency_ratio(&vals, &o, 2) - 0.55).abs() < 1e-12);
        assert_eq!(efficiency_gap(&vals, &o, 2), 9.0);
    }

    #[test]
    fn efficiency_with_zero_values_is_one() {
        let vals = vec![ValuationVector::flat(0.0, 2).unwrap(); 3];
        let o = clear_dp(&example(), 4, &TieBreak::by_index(6));
        assert_eq!(efficiency_ratio(&vals, &o, 4), 1.0);
    }

    #[test]
    fn valuation_vector_rejects_increasing() {
        assert!(ValuationVector::new(vec![1.0, 2.0]).is_err());
        assert!(ValuationVector::new(vec![-1.0]).is_err());
    }
}
