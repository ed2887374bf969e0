//! Independent oracles and random instance generators shared by the
//! integration suites.
#![allow(dead_code)]

use intermed::applications::{cara_transform, InsuranceEconomy, InsuranceType, Plan};
use intermed::{AgentType, Bundle, ConsumptionRule, Economy, Good, GoodId, SocialChoiceRule, TypeId};
use intermed::incentives::{check_cmon, construct_transfers, TransferMode};
use intermed::DEFAULT_TOL;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 20_241_016;

/// Seed for randomized suites; override with `INTERMED_SEED`.
pub fn seed() -> u64 {
    std::env::var("INTERMED_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed());
    r.set_stream(stream);
    r
}

pub fn random_masses(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut m: Vec<f64> = raw.iter().map(|r| r / total).collect();
    // Put the rounding residue on the last type so the sum is exactly 1.
    let head: f64 = m[..n - 1].iter().sum();
    m[n - 1] = 1.0 - head;
    m
}

pub fn economy_from_tables(utility: Vec<Vec<f64>>, cost: Vec<Vec<f64>>, masses: &[f64]) -> Economy {
    let types = masses
        .iter()
        .enumerate()
        .map(|(i, m)| AgentType { name: format!("t{i}"), mass: *m })
        .collect();
    let goods = (0..utility[0].len())
        .map(|k| Good { name: format!("g{k}"), vector: vec![k as f64] })
        .collect();
    Economy::new(types, goods, utility, cost).expect("generated economy is valid")
}

/// Up to `max_types` types and `max_goods` goods, drawn by [`sized_economy`].
pub fn random_economy(rng: &mut impl Rng, min_types: usize, max_types: usize, max_goods: usize) -> Economy {
    let types = rng.gen_range(min_types..=max_types);
    let goods = rng.gen_range(1..=max_goods);
    sized_economy(rng, types, goods)
}

/// Values uniform on [0, 10], costs uniform on [0, 5].
pub fn sized_economy(rng: &mut impl Rng, types: usize, goods: usize) -> Economy {
    let table = |rng: &mut dyn rand::RngCore, hi: f64| -> Vec<Vec<f64>> {
        (0..types).map(|_| (0..goods).map(|_| rng.gen_range(0.0..hi)).collect()).collect()
    };
    let utility = table(rng, 10.0);
    let cost = table(rng, 5.0);
    let masses = random_masses(rng, types);
    economy_from_tables(utility, cost, &masses)
}

/// Either an arbitrary assignment (some types left out) or the choices
/// agents would make facing random posted prices, which is implementable.
pub fn random_consumption(rng: &mut impl Rng, e: &Economy) -> ConsumptionRule {
    let m = e.good_count();
    if rng.gen_bool(0.5) {
        ConsumptionRule::new(
            e.type_ids()
                .map(|_| if rng.gen_bool(0.15) { None } else { Some(GoodId(rng.gen_range(0..m))) })
                .collect(),
        )
    } else {
        let prices: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..10.0)).collect();
        ConsumptionRule::new(
            e.type_ids()
                .map(|t| {
                    let (g, u) = (0..m)
                        .map(|k| (k, e.value(GoodId(k), t) - prices[k]))
                        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
                    (u >= 0.0).then_some(GoodId(g))
                })
                .collect(),
        )
    }
}

/// Weight of the IC constraint `y_a - y_b <= v(x_a, a) - v(x_b, a)`.
fn ic_weight(e: &Economy, x: &ConsumptionRule, a: usize, b: usize) -> f64 {
    let t = TypeId(a);
    e.value_of(x.good(t), t) - e.value_of(x.good(TypeId(b)), t)
}

/// Enumerates every simple cycle of types and reports whether one has a
/// total below `-tol`.
pub fn brute_force_negative_cycle(e: &Economy, x: &ConsumptionRule, tol: f64) -> bool {
    fn walk(e: &Economy, x: &ConsumptionRule, path: &mut Vec<usize>, total: f64, tol: f64) -> bool {
        let n = e.type_count();
        let last = *path.last().unwrap();
        if path.len() >= 2 && total + ic_weight(e, x, last, path[0]) < -tol {
            return true;
        }
        for next in 0..n {
            // Cycles are rooted at their smallest member.
            if next <= path[0] || path.contains(&next) {
                continue;
            }
            let w = ic_weight(e, x, last, next);
            path.push(next);
            if walk(e, x, path, total + w, tol) {
                return true;
            }
            path.pop();
        }
        false
    }
    (0..e.type_count()).any(|start| walk(e, x, &mut vec![start], 0.0, tol))
}

/// Decides feasibility of the IC system by Fourier–Motzkin elimination of
/// the price variables.
pub fn fourier_motzkin_feasible(e: &Economy, x: &ConsumptionRule, tol: f64) -> bool {
    let n = e.type_count();
    // bound[i][j]: tightest known `y_i - y_j <= w`.
    let mut bound = vec![vec![f64::INFINITY; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                bound[a][b] = ic_weight(e, x, a, b);
            }
        }
    }
    let mut alive: Vec<usize> = (0..n).collect();
    while let Some(k) = alive.pop() {
        for &i in &alive {
            for &j in &alive {
                let w = bound[i][k] + bound[k][j];
                if i == j {
                    if w < -tol {
                        return false;
                    }
                } else if w < bound[i][j] {
                    bound[i][j] = w;
                }
            }
        }
    }
    true
}

/// Uniform random insurance market; every type buys some plan.
pub fn random_insurance(rng: &mut impl Rng, premiums: &[f64]) -> InsuranceEconomy {
    let states = rng.gen_range(1..=3);
    let types = premiums.len();
    let plans = rng.gen_range(1..=4);
    let masses = random_masses(rng, types);
    let probabilities = |rng: &mut dyn rand::RngCore| -> Vec<f64> {
        let raw: Vec<f64> = (0..states).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut p: Vec<f64> = raw.iter().map(|r| r / total).collect();
        let head: f64 = p[..states - 1].iter().sum();
        p[states - 1] = 1.0 - head;
        p
    };
    InsuranceEconomy {
        endowments: (0..states).map(|_| rng.gen_range(0.0..3.0)).collect(),
        types: (0..types)
            .map(|i| InsuranceType { name: format!("t{i}"), mass: masses[i], probabilities: probabilities(rng) })
            .collect(),
        plans: (0..plans)
            .map(|k| Plan { name: format!("p{k}"), consumption: (0..states).map(|_| rng.gen_range(0.0..3.0)).collect() })
            .collect(),
        target: premiums.iter().map(|y| Some((rng.gen_range(0..plans), *y))).collect(),
        risk_aversion: *[0.5, 1.0, 2.0].choose(rng).unwrap(),
    }
}

/// Expected CARA utility `Σ_s θ_s (1 - exp(-λ (x_s - y)))`, evaluated
/// directly with no transformation.
pub fn expected_utility(ins: &InsuranceEconomy, t: usize, plan: usize, premium: f64) -> f64 {
    let lambda = ins.risk_aversion;
    ins.types[t]
        .probabilities
        .iter()
        .zip(&ins.plans[plan].consumption)
        .map(|(p, x)| p * (1.0 - (-lambda * (x - premium)).exp()))
        .sum()
}

/// IC by pairwise comparison of expected utilities. `tol` is in
/// certainty-equivalent units and is converted by the local slope of `v`.
pub fn expected_utility_ic(ins: &InsuranceEconomy, tol: f64) -> bool {
    let bundle = |t: usize| ins.target[t].expect("every type is insured");
    (0..ins.types.len()).all(|a| {
        let (k, y) = bundle(a);
        let own = expected_utility(ins, a, k, y);
        let slope = ins.risk_aversion * (1.0 - own);
        (0..ins.types.len()).all(|b| {
            let (kb, yb) = bundle(b);
            own >= expected_utility(ins, a, kb, yb) - tol * slope
        })
    })
}

/// Random target rule over `e` using the goods in `x`, priced at `prices`.
pub fn rule_with_prices(e: &Economy, x: &ConsumptionRule, prices: &[f64]) -> SocialChoiceRule {
    let bundles = e
        .type_ids()
        .map(|t| match x.good(t) {
            None => Bundle::Null,
            Some(g) => Bundle::offer(g, prices[t.0]),
        })
        .collect();
    SocialChoiceRule::new(e, bundles).expect("rule is valid")
}

pub fn sorted_draws(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `v(q, θ) = θ q + h(q)` with an injective, increasing assignment.
pub fn single_crossing(rng: &mut impl Rng) -> (Economy, ConsumptionRule) {
    let n = rng.gen_range(2..=5);
    let m = rng.gen_range(n..=5);
    let thetas = sorted_draws(rng, n, 1.0, 5.0);
    let qualities = sorted_draws(rng, m, 0.0, 4.0);
    let h: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let utility = thetas
        .iter()
        .map(|t| qualities.iter().zip(&h).map(|(q, h)| t * q + h).collect())
        .collect();
    let mut chosen: Vec<usize> = sample(rng, m, n).into_vec();
    chosen.sort();
    let e = economy_from_tables(utility, vec![vec![0.0; m]; n], &random_masses(rng, n));
    (e, ConsumptionRule::new(chosen.into_iter().map(|k| Some(GoodId(k))).collect()))
}

/// Implementable rules on economies whose values leave some cycle's total
/// unchanged.
pub fn du_violating(rng: &mut impl Rng) -> Option<(Economy, ConsumptionRule)> {
    let n = rng.gen_range(2..=5);
    let m = rng.gen_range(2..=5);
    let mut utility: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
    let x: Vec<Option<GoodId>> = (0..n).map(|_| Some(GoodId(rng.gen_range(0..m)))).collect();
    if rng.gen_bool(0.5) {
        // Type-independent values: every swap is utility-neutral.
        let row = utility[0].clone();
        utility.iter_mut().for_each(|r| *r = row.clone());
    } else {
        // Tune one entry so that a chosen pair swaps at zero gap.
        let (a, b) = (0, 1);
        let (ga, gb) = (x[a]?.0, x[b]?.0);
        if ga == gb {
            return None;
        }
        utility[a][gb] = utility[a][ga] + utility[b][gb] - utility[b][ga];
    }
    let e = economy_from_tables(utility, vec![vec![0.0; m]; n], &random_masses(rng, n));
    let x = ConsumptionRule::new(x);
    check_cmon(&e, &x, DEFAULT_TOL).holds.then_some((e, x))
}

/// Random insurance market for the CARA oracle. Two thirds are repriced to
/// be IC when their plan assignment allows it, half of those then nudged off
/// the boundary.
pub fn cara_instance(rng: &mut impl Rng, case: usize) -> InsuranceEconomy {
    let types = rng.gen_range(1..=4);
    let premiums: Vec<f64> = (0..types).map(|_| rng.gen_range(-1.0..2.0)).collect();
    let mut ins = random_insurance(rng, &premiums);
    let (e, scr) = cara_transform(&ins).unwrap();
    let repriced = construct_transfers(&e, &scr.consumption(), TransferMode::Maximal, 0.0, None, DEFAULT_TOL)
        .unwrap()
        .feasible();
    if let (true, Some(rule)) = (case % 3 != 0, repriced) {
        let prices = rule.prices;
        for (slot, y) in ins.target.iter_mut().zip(&prices) {
            slot.as_mut().unwrap().1 = *y;
        }
        if case % 3 == 2 {
            let t = rng.gen_range(0..types);
            ins.target[t].as_mut().unwrap().1 += rng.gen_range(-0.05..0.05);
        }
    }
    ins
}
