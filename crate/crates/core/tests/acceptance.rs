//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a gating criterion fails.
//!
//! `MAULAB_C8_EPISODES` sets the length of the rule comparison sessions
//! (default 5000; the full comparison uses 100000).

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use maulab::agents::{
    a2c_actor_loss_and_grad, a2c_critic_loss_and_grad, a2c_gradients, build, dpg_loss_and_grad, dqn_loss_and_grad,
    ppo_loss_and_grads, A2cConfig, A2cSample, AgentContext, Algo, Bidder, DqnSample, FactoredPolicy, HyperParams, Mode,
    PolicySample, PpoConfig, PpoSample, VpgTable,
};
use maulab::auction::{clear, clear_up, efficiency_ratio, BidMatrix, TieBreak};
use maulab::env::{reward, AuctionEnv};
use maulab::harness::{pretrain, run_episode, tournament, CsvSink, MemorySink, Member, Seat, Session, Source};
use maulab::metrics::rolling_mean;
use maulab::nn::{finite_diff_check, Activation, Categorical, Mlp};
use maulab::{Money, Rule, ScenarioConfig};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    id: &'static str,
    title: &'static str,
    gating: bool,
    pass: bool,
    detail: String,
}

fn main() -> ExitCode {
    let checks: [(&str, &str, bool, fn() -> (bool, String)); 8] = [
        ("C1", "mechanism oracle equivalence", true, c1_oracle),
        ("C2", "reward exactness", true, c2_reward),
        ("C3", "gradient correctness", true, c3_gradients),
        ("C4", "uniform-price first-unit truthfulness", true, c4_truthfulness),
        ("C5", "learning improvement", true, c5_learning),
        ("C6", "accounting invariants", true, c6_accounting),
        ("C7", "determinism", true, c7_determinism),
        ("C8", "rule comparison (report only)", false, c8_comparison),
    ];
    let mut verdicts = Vec::new();
    for (id, title, gating, check) in checks {
        let start = Instant::now();
        let (pass, detail) = check();
        let detail = format!("{detail} [{:.1}s]", start.elapsed().as_secs_f64());
        let v = Verdict { id, title, gating, pass, detail };
        println!("{} {} {}: {}", v.id, status(&v), v.title, v.detail);
        verdicts.push(v);
    }
    println!();
    println!("acceptance summary");
    for v in &verdicts {
        println!("  {} {}", v.id, status(&v));
    }
    if verdicts.iter().any(|v| v.gating && !v.pass) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn status(v: &Verdict) -> &'static str {
    match (v.gating, v.pass) {
        (_, true) => "PASS",
        (true, false) => "FAIL",
        (false, false) => "DEVIATES",
    }
}

// ---------------------------------------------------------------- C1

/// Clearing by counting: a slot's rank is the number of slots that beat it.
fn oracle<T: Money>(rule: Rule, rows: &[Vec<T>], supply: usize, priority: &[u32]) -> (Vec<(usize, usize, T)>, T) {
    let k = rows[0].len();
    let slots: Vec<(usize, usize)> = (0..rows.len()).flat_map(|b| (0..k).map(move |s| (b, s))).collect();
    let bid = |(b, s): (usize, usize)| rows[b][s];
    let prio = |(b, s): (usize, usize)| priority[b * k + s];
    let beats = |x: (usize, usize), y: (usize, usize)| bid(x) > bid(y) || (bid(x) == bid(y) && prio(x) < prio(y));
    let rank = |y: (usize, usize)| slots.iter().filter(|x| beats(**x, y)).count();
    let mut winners = Vec::new();
    let mut revenue = T::zero();
    for &a in &slots {
        let r = rank(a);
        if r >= supply {
            continue;
        }
        let pay = match rule {
            Rule::Dp => bid(a),
            Rule::Gsp => slots
                .iter()
                .filter(|c| c.0 != a.0 && rank(**c) > r)
                .map(|c| bid(*c))
                .fold(T::zero(), |m, x| if x > m { x } else { m }),
            Rule::Up => slots.iter().find(|c| rank(**c) == supply).map_or(T::zero(), |c| bid(*c)),
        };
        revenue = revenue + pay;
        winners.push((a.0, a.1, pay));
    }
    (winners, revenue)
}

fn agrees<T: Money>(rule: Rule, rows: Vec<Vec<T>>, supply: usize, tie: &TieBreak) -> bool {
    let bids = BidMatrix::new(rows).unwrap();
    let out = clear(rule, &bids, supply, tie);
    let mut got: Vec<(usize, usize, T)> = out.winners.iter().map(|w| (w.bidder, w.slot, w.payment)).collect();
    got.sort_by_key(|w| (w.0, w.1));
    let (want, revenue) = oracle(rule, bids.rows(), supply, tie.priorities());
    got == want && out.revenue == revenue
}

fn c1_oracle() -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut mismatches = 0;
    let instances = 10_000;
    for _ in 0..instances {
        let n = rng.random_range(1..=4);
        let supply = rng.random_range(1..=5);
        let ints: Vec<Vec<i64>> = (0..n).map(|_| (0..2).map(|_| rng.random_range(0..=6)).collect()).collect();
        let as_f64: Vec<Vec<f64>> = ints.iter().map(|r| r.iter().map(|x| *x as f64).collect()).collect();
        let tie = TieBreak::draw(&BidMatrix::new(as_f64.clone()).unwrap(), &mut rng);
        for rule in Rule::ALL {
            let exact: Vec<Vec<Ratio<i64>>> = ints.iter().map(|r| r.iter().map(|x| Ratio::from_integer(*x)).collect()).collect();
            if !agrees(rule, as_f64.clone(), supply, &tie) || !agrees(rule, exact, supply, &tie) {
                mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (mismatches == 0 && secs < 10.0, format!("{instances} instances x 3 rules x {{f64, rational}}, {mismatches} mismatches"))
}

// ---------------------------------------------------------------- C2

fn c2_reward() -> (bool, String) {
    let table: [(bool, f64, f64, f64); 6] = [
        (true, 2.0, 3.0, 2.0 / 3.0),
        (true, 2.0, 9.0, 2.0 / 9.0),
        (false, 0.0, 5.0, -0.01),
        (false, 7.0, 0.3, -0.01),
        (true, -1.0, 4.0, -1.25),
        (true, 0.2, 0.5, 0.2),
    ];
    let mut bad = table.iter().filter(|(s, p, v, want)| (reward(*s, *p, *v) - want).abs() > 1e-12).count();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..1_000 {
        let won = rng.random_bool(0.7);
        let v: f64 = rng.random_range(0.0..10.0);
        let p: f64 = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(-10.0..10.0) };
        // payoff form for profitable wins, payment form otherwise
        let want = if !won {
            -0.01
        } else if p > 0.0 {
            p / v.max(1.0)
        } else {
            let payment = v - p;
            -payment / v.max(1.0)
        };
        if (reward(won, p, v) - want).abs() > 1e-12 {
            bad += 1;
        }
    }
    (bad == 0, format!("{} table rows and 1000 random inputs, {bad} off by more than 1e-12", table.len()))
}

// ---------------------------------------------------------------- C3

const FD_TOL: f64 = 1e-4;

struct Shape {
    input: usize,
    hidden: Vec<usize>,
    heads: usize,
    levels: usize,
    batch: usize,
}

fn random_shape(rng: &mut ChaCha8Rng) -> Shape {
    let layers = rng.random_range(1..=2);
    Shape {
        input: rng.random_range(1..=3),
        hidden: (0..layers).map(|_| rng.random_range(3..=8)).collect(),
        heads: rng.random_range(1..=2),
        levels: rng.random_range(2..=5),
        batch: rng.random_range(1..=8),
    }
}

fn random_obs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..1.0)).collect()
}

fn random_action(rng: &mut ChaCha8Rng, s: &Shape) -> Vec<usize> {
    (0..s.heads).map(|_| rng.random_range(0..s.levels)).collect()
}

fn policy(rng: &mut ChaCha8Rng, s: &Shape) -> FactoredPolicy {
    let mut p = FactoredPolicy::new(s.input, &s.hidden, s.heads, s.levels, rng).unwrap();
    let scale = rng.random_range(0.5..3.0);
    for x in p.net.params_mut() {
        *x *= scale;
    }
    p
}

fn value_net(rng: &mut ChaCha8Rng, s: &Shape, out: usize) -> Mlp<f64> {
    let mut w = vec![s.input];
    w.extend_from_slice(&s.hidden);
    w.push(out);
    Mlp::new(&w, Activation::Tanh, rng).unwrap()
}

fn c3_gradients() -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut note = |name: &'static str, err: f64| {
        let w = worst.entry(name).or_insert(0.0);
        *w = w.max(err);
    };
    let mut flat_regions = 0;
    for _ in 0..100 {
        let s = random_shape(&mut rng);
        let h = 1e-5;

        // DQN regression
        let net = value_net(&mut rng, &s, s.levels);
        let batch: Vec<DqnSample> = (0..s.batch)
            .map(|_| DqnSample { obs: random_obs(&mut rng, s.input), action: rng.random_range(0..s.levels), reward: rng.random_range(-2.0..2.0) })
            .collect();
        let refs: Vec<&DqnSample> = batch.iter().collect();
        let (_, g) = dqn_loss_and_grad(&net, &refs).unwrap();
        let mut probe = net.clone();
        note("dqn", finite_diff_check(net.params(), &g, |x| {
            probe.params_mut().copy_from_slice(x);
            dqn_loss_and_grad(&probe, &refs).unwrap().0
        }, h, 60, &mut rng));

        // tabular score function: the update direction is r * grad log pi(a)
        let actions = s.levels * s.levels;
        let mut table = VpgTable::zeros(1, actions);
        for l in table.logits.iter_mut() {
            *l = rng.random_range(-2.0..2.0);
        }
        let a = rng.random_range(0..actions);
        let (alpha, r) = (rng.random_range(0.01..0.5), rng.random_range(0.1..2.0));
        let before = table.logits.clone();
        table.reinforce(0, a, r, alpha, 1.0, 0);
        let analytic: Vec<f64> = table.logits.iter().zip(&before).map(|(x, y)| (x - y) / (alpha * r)).collect();
        note("vpg", finite_diff_check(&before, &analytic, |x| Categorical::from_logits(x).log_prob(a), h, 60, &mut rng));

        // batch-baseline policy gradient with per-head rewards
        let pol = policy(&mut rng, &s);
        let batch: Vec<PolicySample> = (0..s.batch)
            .map(|_| PolicySample {
                obs: random_obs(&mut rng, s.input),
                action: random_action(&mut rng, &s),
                rewards: (0..s.heads).map(|_| rng.random_range(-2.0..2.0)).collect(),
            })
            .collect();
        let ent = rng.random_range(0.0..0.1);
        let (_, g) = dpg_loss_and_grad(&pol, &batch, ent).unwrap();
        let mut probe = pol.clone();
        note("dpg", finite_diff_check(pol.net.params(), &g, |x| {
            probe.net.params_mut().copy_from_slice(x);
            dpg_loss_and_grad(&probe, &batch, ent).unwrap().0
        }, h, 60, &mut rng));

        // actor-critic
        let actor = policy(&mut rng, &s);
        let critic = value_net(&mut rng, &s, 1);
        let batch: Vec<A2cSample> = (0..s.batch)
            .map(|_| A2cSample { obs: random_obs(&mut rng, s.input), action: random_action(&mut rng, &s), reward: rng.random_range(-2.0..2.0) })
            .collect();
        let cfg = A2cConfig { entropy_coef: rng.random_range(0.0..0.1), ..A2cConfig::default() };
        let ag = a2c_gradients(&actor, &critic, &batch, &cfg).unwrap();
        let mut probe = actor.clone();
        note("a2c actor", finite_diff_check(actor.net.params(), &ag.actor, |x| {
            probe.net.params_mut().copy_from_slice(x);
            a2c_actor_loss_and_grad(&probe, &batch, &ag.advantages, cfg.entropy_coef).unwrap().0
        }, h, 60, &mut rng));
        let mut probe = critic.clone();
        note("a2c critic", finite_diff_check(critic.params(), &ag.critic, |x| {
            probe.params_mut().copy_from_slice(x);
            a2c_critic_loss_and_grad(&probe, &batch, cfg.value_coef).unwrap().0
        }, h, 60, &mut rng));

        // clipped surrogate; shifted old log-probs put samples on both branches
        let actor = policy(&mut rng, &s);
        let critic = value_net(&mut rng, &s, 1);
        let cfg = PpoConfig { entropy_coef: rng.random_range(0.0..0.05), ..PpoConfig::default() };
        let batch: Vec<PpoSample> = (0..s.batch)
            .map(|_| {
                let obs = random_obs(&mut rng, s.input);
                let action = random_action(&mut rng, &s);
                let lp = actor.log_prob(&obs, &action).unwrap();
                PpoSample { obs, action, reward: rng.random_range(-2.0..2.0), old_log_prob: lp + rng.random_range(-0.6..0.6) }
            })
            .collect();
        let refs: Vec<&PpoSample> = batch.iter().collect();
        let adv: Vec<f64> = (0..s.batch).map(|_| rng.random_range(-2.0..2.0)).collect();
        let pg = ppo_loss_and_grads(&actor, &critic, &refs, &adv, &cfg).unwrap();
        // skip coordinates where the ratio sits on a clip kink
        let near_kink = pg.ratios.iter().any(|r| ((r - 1.0).abs() - cfg.clip).abs() < 1e-6);
        if !near_kink {
            let mut probe = actor.clone();
            note("ppo actor", finite_diff_check(actor.net.params(), &pg.actor, |x| {
                probe.net.params_mut().copy_from_slice(x);
                ppo_loss_and_grads(&probe, &critic, &refs, &adv, &cfg).unwrap().loss
            }, h, 60, &mut rng));
        }
        let mut probe = critic.clone();
        note("ppo critic", finite_diff_check(critic.params(), &pg.critic, |x| {
            probe.params_mut().copy_from_slice(x);
            ppo_loss_and_grads(&actor, &probe, &refs, &adv, &cfg).unwrap().loss
        }, h, 60, &mut rng));

        // a batch held entirely on the flat side of the clip
        let flat: Vec<PpoSample> = batch
            .iter()
            .map(|b| PpoSample { old_log_prob: actor.log_prob(&b.obs, &b.action).unwrap() - 0.5, ..b.clone() })
            .collect();
        let refs: Vec<&PpoSample> = flat.iter().collect();
        let pos: Vec<f64> = adv.iter().map(|a| a.abs() + 0.1).collect();
        let cfg0 = PpoConfig { entropy_coef: 0.0, ..cfg.clone() };
        let fg = ppo_loss_and_grads(&actor, &critic, &refs, &pos, &cfg0).unwrap();
        let mut probe = actor.clone();
        let err = finite_diff_check(actor.net.params(), &fg.actor, |x| {
            probe.net.params_mut().copy_from_slice(x);
            ppo_loss_and_grads(&probe, &critic, &refs, &pos, &cfg0).unwrap().loss
        }, h, 60, &mut rng);
        note("ppo flat", if fg.actor.iter().all(|g| *g == 0.0) { err } else { f64::INFINITY });
        flat_regions += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst.values().all(|e| *e < FD_TOL) && secs < 60.0;
    let listing: Vec<String> = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect();
    (pass, format!("100 configs per loss ({flat_regions} flat-region batches); worst relative error: {}", listing.join(", ")))
}

// ---------------------------------------------------------------- C4

fn c4_truthfulness() -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let half = |l: i64| Ratio::new(l, 2);
    let (supply, bidders, levels) = (4, 6, 21i64);
    let mut violations = 0;
    let mut deviations = 0u64;
    for _ in 0..1_000 {
        let value = half(rng.random_range(0..levels));
        let others: Vec<Vec<Ratio<i64>>> = (1..bidders).map(|_| (0..2).map(|_| half(rng.random_range(0..levels))).collect()).collect();
        let mut priority: Vec<u32> = (0..(bidders * 2) as u32).collect();
        use rand::seq::SliceRandom;
        priority.shuffle(&mut rng);
        let tie = TieBreak::from_priorities(priority);
        let payoff = |b1: Ratio<i64>, b2: Ratio<i64>| {
            let mut rows = vec![vec![b1, b2]];
            rows.extend(others.iter().cloned());
            let out = clear_up(&BidMatrix::new(rows).unwrap(), supply, &tie);
            out.winners.iter().filter(|w| w.bidder == 0).fold(Ratio::from_integer(0), |acc, w| acc + value - w.payment)
        };
        // second unit at or below value, first unit anywhere above it
        for l2 in 0..levels {
            let b2 = half(l2);
            if b2 > value {
                break;
            }
            let truthful = payoff(value, b2);
            for l1 in l2..levels {
                deviations += 1;
                if payoff(half(l1), b2) > truthful {
                    violations += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (violations == 0 && secs < 30.0, format!("1000 profiles, {deviations} first-unit deviations checked exactly, {violations} strictly profitable"))
}

// ---------------------------------------------------------------- C5

const WINDOW: usize = 1_000;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Last-window payoff of seat 1 when all six seats bid at random.
fn random_baseline(scenario: &ScenarioConfig) -> f64 {
    let ctx = AgentContext::from_scenario(scenario).unwrap();
    let h = HyperParams::default();
    let members = (0..scenario.n_bidders)
        .map(|i| Member { id: i + 1, agent: build(Algo::Random, &ctx, &h, scenario.master_seed, i as u64).unwrap(), logged: i == 0 })
        .collect();
    let mut session = Session::new(scenario.clone(), members).unwrap();
    let mut sink = MemorySink::default();
    session.run(scenario.episodes, &mut sink).unwrap();
    let p: Vec<f64> = sink.episodes.iter().map(|r| r.payoff_total).collect();
    mean(&p[p.len() - WINDOW..])
}

fn c5_learning() -> (bool, String) {
    let seed = 1;
    let scenario = ScenarioConfig::standard(Rule::Dp, 4, 20_000, seed);
    let mut sink = MemorySink::default();
    pretrain(Algo::Ppo, &scenario, &HyperParams::default(), &mut sink).unwrap();
    let payoff: Vec<f64> = sink.episodes.iter().map(|r| r.payoff_total).collect();
    let (first, last) = (mean(&payoff[..WINDOW]), mean(&payoff[payoff.len() - WINDOW..]));
    // 1.5x is read as a 50% improvement over |first| when the first window loses money
    let payoff_ok = if first > 0.0 { last >= 1.5 * first } else { last - first >= 0.5 * first.abs() };
    let lr = |f: fn(&maulab::metrics::EpisodeRow) -> f64| {
        let s: Vec<f64> = sink.episodes.iter().map(f).collect();
        *rolling_mean(&s, WINDOW).unwrap().last().unwrap()
    };
    let (lr1, lr2) = (lr(|r| r.learning_ratio1), lr(|r| r.learning_ratio2));
    // the mean is sensitive to overbids at tiny values, so the median is shown too
    let median = |f: fn(&maulab::metrics::EpisodeRow) -> f64| {
        let mut s: Vec<f64> = sink.episodes[sink.episodes.len() - WINDOW..].iter().map(f).collect();
        s.sort_by(f64::total_cmp);
        s[WINDOW / 2]
    };
    let (md1, md2) = (median(|r| r.learning_ratio1), median(|r| r.learning_ratio2));
    let in_unit = |x: f64| x > 0.0 && x < 1.0;
    let ppo_ok = payoff_ok && in_unit(lr1) && in_unit(lr2);
    let mut detail = format!(
        "PPO 20k: payoff {first:.3} -> {last:.3} [{}], learning ratios {lr1:.3}, {lr2:.3} [{}] (window medians {md1:.3}, {md2:.3})",
        if payoff_ok { "ok" } else { "low" },
        if in_unit(lr1) && in_unit(lr2) { "ok" } else { "outside (0,1)" }
    );

    let smoke = ScenarioConfig::standard(Rule::Dp, 4, 2_000, seed);
    let baseline = random_baseline(&smoke);
    detail.push_str(&format!("; smoke 2k vs random-roster {baseline:.3}:"));
    let mut smoke_ok = true;
    for algo in [Algo::Ql, Algo::Vpg, Algo::A2c] {
        let mut sink = MemorySink::default();
        pretrain(algo, &smoke, &HyperParams::default(), &mut sink).unwrap();
        let p: Vec<f64> = sink.episodes.iter().map(|r| r.payoff_total).collect();
        let last = mean(&p[p.len() - WINDOW..]);
        let ok = last > baseline;
        smoke_ok &= ok;
        detail.push_str(&format!(" {} {last:.3} [{}]", algo.label(), if ok { "ok" } else { "below" }));
    }
    (ppo_ok && smoke_ok, detail)
}

// ---------------------------------------------------------------- C6

fn roster(scenario: &ScenarioConfig) -> Vec<Box<dyn Bidder>> {
    let ctx = AgentContext::from_scenario(scenario).unwrap();
    let h = HyperParams::default();
    Algo::TOURNAMENT
        .iter()
        .enumerate()
        .map(|(i, a)| build(*a, &ctx, &h, scenario.master_seed, i as u64).unwrap())
        .collect()
}

fn c6_accounting() -> (bool, String) {
    let mut broken = 0;
    let mut episodes = 0;
    let mut efficient = 0;
    for rule in Rule::ALL {
        for supply in [4, 6, 8] {
            let scenario = ScenarioConfig::standard(rule, supply, 1_500, 6);
            let mut env = AuctionEnv::new(scenario.clone()).unwrap();
            let mut agents = roster(&scenario);
            for _ in 0..scenario.episodes {
                let step = run_episode(&mut env, &mut agents, true, true).unwrap();
                episodes += 1;
                let paid: f64 = step.transitions.iter().map(|t| t.payment_total()).sum();
                let won: usize = step.transitions.iter().map(|t| t.units_won()).sum();
                let ratio = efficiency_ratio(&step.valuations, &step.outcome, supply);
                let mut won_values: Vec<f64> = step.outcome.winners.iter().map(|w| step.valuations[w.bidder].get(w.slot)).collect();
                let mut all: Vec<f64> = step.valuations.iter().flat_map(|v| v.values().to_vec()).collect();
                won_values.sort_by(|a, b| b.total_cmp(a));
                all.sort_by(|a, b| b.total_cmp(a));
                let top_k = won_values[..] == all[..supply];
                efficient += usize::from(top_k);
                if paid != step.outcome.revenue || won != supply || !(0.0..=1.0).contains(&ratio) || (top_k && ratio != 1.0) {
                    broken += 1;
                }
            }
        }
    }
    (broken == 0, format!("{episodes} episodes over 3 rules x K in {{4,6,8}}, {efficient} efficient allocations, {broken} violations"))
}

// ---------------------------------------------------------------- C7

fn c7_determinism() -> (bool, String) {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let scenario = ScenarioConfig::standard(Rule::Gsp, 6, 5_000, 77);
        let seats: Vec<Seat> = Algo::TOURNAMENT.iter().map(|a| Seat { algo: *a, source: Source::Fresh, mode: Mode::Train }).collect();
        let mut sink = CsvSink::create(dir.path()).unwrap();
        let agents = tournament(&scenario, &seats, &HyperParams::default(), &mut sink).unwrap();
        drop(sink);
        let mut bytes = Vec::new();
        for name in [maulab::harness::EPISODES_CSV, maulab::harness::AUCTIONS_CSV] {
            bytes.push(fs::read(dir.path().join(name)).unwrap());
        }
        for a in &agents {
            bytes.push(a.checkpoint().to_bytes());
        }
        bytes
    };
    let (a, b) = (run(), run());
    let same = a == b;
    let size: usize = a.iter().map(Vec::len).sum();
    (same, format!("six-learner tournament, 5000 episodes, twice: {} ({size} bytes of logs and checkpoints)", if same { "byte-identical" } else { "differs" }))
}

// ---------------------------------------------------------------- C8

struct Cell {
    efficiency: (f64, f64),
    revenue_total: f64,
    revenue: (f64, f64),
}

/// Mean and 95% half-width.
fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0);
    (m, 1.96 * (var / xs.len() as f64).sqrt())
}

fn c8_comparison() -> (bool, String) {
    let episodes: u64 = std::env::var("MAULAB_C8_EPISODES").ok().and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let mut cells: BTreeMap<(usize, Rule), Cell> = BTreeMap::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = Rule::ALL
            .into_iter()
            .flat_map(|rule| [4usize, 6, 8].map(|k| (rule, k)))
            .map(|(rule, supply)| {
                scope.spawn(move || {
                    let scenario = ScenarioConfig::standard(rule, supply, episodes, 8);
                    let seats: Vec<Seat> = Algo::TOURNAMENT.iter().map(|a| Seat { algo: *a, source: Source::Fresh, mode: Mode::Train }).collect();
                    let mut sink = MemorySink::default();
                    tournament(&scenario, &seats, &HyperParams::default(), &mut sink).unwrap();
                    let eff: Vec<f64> = sink.auctions.iter().map(|r| r.efficiency_ratio).collect();
                    let rev: Vec<f64> = sink.auctions.iter().map(|r| r.revenue).collect();
                    ((supply, rule), Cell { efficiency: mean_ci(&eff), revenue_total: rev.iter().sum(), revenue: mean_ci(&rev) })
                })
            })
            .collect();
        for h in handles {
            let (key, cell) = h.join().unwrap();
            cells.insert(key, cell);
        }
    });
    let mut lines = Vec::new();
    let mut up_dominates = true;
    for supply in [4, 6, 8] {
        let dp = &cells[&(supply, Rule::Dp)];
        let up = &cells[&(supply, Rule::Up)];
        up_dominates &= up.efficiency.0 >= dp.efficiency.0;
        let eff: Vec<String> = Rule::ALL
            .iter()
            .map(|r| {
                let c = &cells[&(supply, *r)];
                format!("{r} {:.4}±{:.4}", c.efficiency.0, c.efficiency.1)
            })
            .collect();
        lines.push(format!("K={supply} efficiency {}", eff.join(" ")));
    }
    let k8: Vec<(Rule, &Cell)> = Rule::ALL.iter().map(|r| (*r, &cells[&(8, *r)])).collect();
    let dp_top = k8.iter().all(|(r, c)| *r == Rule::Dp || c.revenue_total <= cells[&(8, Rule::Dp)].revenue_total);
    let rev: Vec<String> = k8.iter().map(|(r, c)| format!("{r} {:.0} (mean {:.3}±{:.3})", c.revenue_total, c.revenue.0, c.revenue.1)).collect();
    lines.push(format!("K=8 revenue total {}", rev.join(" ")));
    let detail = format!(
        "{episodes} episodes per cell, fresh six-learner roster; UP efficiency >= DP at every K: {}; DP revenue highest at K=8: {}; {}",
        if up_dominates { "yes" } else { "no" },
        if dp_top { "yes" } else { "no" },
        lines.join("; ")
    );
    (up_dominates && dp_top, detail)
}
