//! A single intermediary facing a distribution regulation priced at
//! maximal-transfer profits, plus rebates that restore target net prices.
//!
//! Continuum type spaces are approximated by a uniform grid of types; the
//! fidelity of the approximation is measured, not assumed.

use itertools::Itertools;

use crate::economy::{AgentType, Bundle, Economy, Good, GoodId, Offer, SocialChoiceRule, TypeId};
use crate::error::{Error, Result};
use crate::game::allocation::{GoodPreference, MenuProfile, TieBreakRule};
use crate::game::search::settle;
use crate::policies::{build_distribution_policy, maximal_price_rule, DistributionVariant};

/// A one-dimensional screening instance with `v(x, θ) = θ·q(x)` on
/// `[theta_lo, theta_hi]`.
///
/// The target assigns quality level `k` to types in `[thresholds[k-1],
/// thresholds[k])`, and target prices follow the continuum envelope formula
/// with `U(theta_lo) = base_utility`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleCrossingSpec {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub qualities: Vec<f64>,
    pub costs: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub base_utility: f64,
}

impl SingleCrossingSpec {
    fn level(&self, theta: f64) -> usize {
        self.thresholds.iter().filter(|&&c| c <= theta).count()
    }

    /// `U(θ) = U(θ_lo) + ∫ q(x̂(s)) ds`.
    fn envelope_utility(&self, theta: f64) -> f64 {
        let mut u = self.base_utility;
        let mut from = self.theta_lo;
        for (k, &c) in self.thresholds.iter().enumerate() {
            if c >= theta {
                break;
            }
            u += self.qualities[k] * (c - from);
            from = c;
        }
        u + self.qualities[self.level(theta)] * (theta - from)
    }

    /// Uniform grid of `n` equally likely types.
    pub fn discretize(&self, n: usize) -> Result<(Economy, SocialChoiceRule)> {
        if n < 2 {
            return Err(Error::validation("n", "need at least two types"));
        }
        if !(self.theta_lo < self.theta_hi) {
            return Err(Error::validation("theta", "lower bound must be below upper bound"));
        }
        if self.qualities.len() != self.thresholds.len() + 1 || self.costs.len() != self.qualities.len() {
            return Err(Error::validation(
                "qualities",
                "need one quality and one cost per level and one threshold between levels",
            ));
        }
        if !self.qualities.iter().tuple_windows().all(|(a, b)| a < b) {
            return Err(Error::validation("qualities", "must increase"));
        }
        if !self.thresholds.iter().tuple_windows().all(|(a, b)| a < b) {
            return Err(Error::validation(
                "thresholds",
                "target quality must not decrease in the type",
            ));
        }
        let step = (self.theta_hi - self.theta_lo) / (n - 1) as f64;
        let thetas: Vec<f64> = (0..n).map(|j| self.theta_lo + j as f64 * step).collect();
        let types = thetas
            .iter()
            .enumerate()
            .map(|(j, _)| AgentType {
                name: format!("t{j:03}"),
                mass: 1.0 / n as f64,
            })
            .collect();
        let goods = self
            .qualities
            .iter()
            .enumerate()
            .map(|(k, q)| Good {
                name: format!("q{k}"),
                vector: vec![*q],
            })
            .collect();
        let utility = thetas.iter().map(|th| self.qualities.iter().map(|q| th * q).collect()).collect();
        let cost = vec![self.costs.clone(); n];
        let e = Economy::new(types, goods, utility, cost)?;
        let bundles = thetas
            .iter()
            .map(|&th| {
                let k = self.level(th);
                Bundle::offer(GoodId(k), th * self.qualities[k] - self.envelope_utility(th))
            })
            .collect();
        let scr = SocialChoiceRule::new(&e, bundles)?;
        Ok((e, scr))
    }
}

/// Goods ordered so that utility differences increase along the type order,
/// or an error naming the first pair of goods that crosses twice.
fn single_crossing_order(e: &Economy) -> Result<Vec<GoodId>> {
    let first = TypeId(0);
    let last = TypeId(e.type_count() - 1);
    let mut order: Vec<GoodId> = e.good_ids().collect();
    order.sort_by(|a, b| {
        let da = e.value(*a, last) - e.value(*a, first);
        let db = e.value(*b, last) - e.value(*b, first);
        da.total_cmp(&db).then(a.cmp(b))
    });
    for (lo, hi) in order.iter().tuple_combinations() {
        let diffs: Vec<f64> = e.type_ids().map(|t| e.value(*hi, t) - e.value(*lo, t)).collect();
        if diffs.iter().tuple_windows().any(|(a, b)| b < a) {
            return Err(Error::Precondition(format!(
                "utility difference between {} and {} is not monotone in the type (single crossing fails)",
                e.good_name(*hi),
                e.good_name(*lo)
            )));
        }
    }
    Ok(order)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonopolyReport {
    /// `ȳ(θ)`, per type.
    pub maximal_prices: Vec<f64>,
    /// `ȳ(θ) − ŷ(θ)`, per type.
    pub rebates: Vec<f64>,
    /// `ȳ(θ_lo) − ŷ(θ_lo)` when a uniform rebate is meaningful.
    pub uniform_rebate: Option<f64>,
    /// `max_θ |(ȳ − ŷ)(θ) − (ȳ − ŷ)(θ_lo)|`.
    pub constancy_gap: Option<f64>,
    /// Sum of local IC interval widths at the points where the good changes.
    pub discretization_bound: f64,
    /// Largest distance between net prices after rebates and the target.
    pub net_price_error: f64,
    /// Whether no nearby compliant price menu beats `ȳ`.
    pub maximal_menu_is_best: bool,
    pub best_local_profit: f64,
    pub menus_checked: usize,
    pub personalized: bool,
}

impl MonopolyReport {
    pub fn supported(&self) -> bool {
        let within = self.constancy_gap.map_or(true, |g| g <= self.discretization_bound + 1e-9);
        self.maximal_menu_is_best && within
    }
}

/// Checks that the monopolist's best compliant menu charges the maximal
/// prices and measures how well rebates restore target prices.
///
/// With `personalized` set (or fewer than three types) rebates are per type;
/// otherwise one uniform rebate is applied and its error reported.
pub fn monopoly_verify(
    e: &Economy,
    scr: &SocialChoiceRule,
    step: f64,
    radius: usize,
    personalized: bool,
    tol: f64,
) -> Result<MonopolyReport> {
    let order = single_crossing_order(e)?;
    let rank = |g: GoodId| order.iter().position(|&h| h == g).expect("good is ordered");
    let x = scr.consumption();
    let mut last = 0;
    for t in e.type_ids() {
        let Some(g) = x.good(t) else {
            return Err(Error::Precondition("every type must be served".into()));
        };
        if rank(g) < last {
            return Err(Error::Precondition(format!(
                "target good decreases at type {}; not implementable under single crossing",
                e.type_name(t)
            )));
        }
        last = rank(g);
    }
    let bar = maximal_price_rule(e, scr)?;
    let maximal_prices: Vec<f64> = bar.bundles().iter().map(|b| b.price()).collect();
    let rebates: Vec<f64> = e
        .type_ids()
        .map(|t| maximal_prices[t.0] - scr.bundle(t).price())
        .collect();
    let personalized = personalized || e.type_count() < 3;

    let discretization_bound: f64 = e
        .type_ids()
        .tuple_windows()
        .filter(|(a, b)| x.good(*a) != x.good(*b))
        .map(|(a, b)| {
            let (ga, gb) = (x.good(a), x.good(b));
            let width = (e.value_of(gb, b) - e.value_of(ga, b)) - (e.value_of(gb, a) - e.value_of(ga, a));
            width.abs()
        })
        .sum();

    let (uniform_rebate, constancy_gap, net_price_error) = if personalized {
        let err = e
            .type_ids()
            .map(|t| (maximal_prices[t.0] - rebates[t.0] - scr.bundle(t).price()).abs())
            .fold(0.0, f64::max);
        (None, None, err)
    } else {
        let r = rebates[0];
        let gap = rebates.iter().map(|d| (d - r).abs()).fold(0.0, f64::max);
        let err = e
            .type_ids()
            .map(|t| (maximal_prices[t.0] - r - scr.bundle(t).price()).abs())
            .fold(0.0, f64::max);
        (Some(r), Some(gap), err)
    };

    // Local search over per-good prices ȳ(x) + kδ, |k| <= radius.
    let policy = build_distribution_policy(e, scr, DistributionVariant::Monopoly)?;
    let pref = GoodPreference::from_target(scr);
    let base = bar.target_menu(tol);
    let offsets: Vec<i64> = (-(radius as i64)..=radius as i64).collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_is_base = false;
    let mut base_profit = f64::NEG_INFINITY;
    let mut menus_checked = 0;
    for ks in std::iter::repeat(offsets.iter()).take(base.len()).multi_cartesian_product() {
        let menu: Vec<Offer> = base
            .iter()
            .zip(&ks)
            .map(|(o, &&k)| o.shifted(k as f64 * step))
            .collect();
        let profile = MenuProfile::new(vec![menu]);
        let (_, profits) = settle(e, &profile, &pref, &policy, TieBreakRule::FavorTarget, tol);
        menus_checked += 1;
        let Some(p) = profits[0].value() else { continue };
        let is_base = ks.iter().all(|&&k| k == 0);
        if is_base {
            base_profit = p;
        }
        if p > best + 1e-9 {
            best = p;
            best_is_base = is_base;
        } else if is_base && p >= best - 1e-9 {
            best_is_base = true;
        }
    }
    let maximal_menu_is_best = best_is_base || base_profit >= best - 1e-9;

    Ok(MonopolyReport {
        maximal_prices,
        rebates,
        uniform_rebate,
        constancy_gap,
        discretization_bound,
        net_price_error,
        maximal_menu_is_best,
        best_local_profit: best,
        menus_checked,
        personalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::DEFAULT_TOL;
    use crate::incentives::check_ic_ir;

    pub(crate) fn three_levels() -> SingleCrossingSpec {
        SingleCrossingSpec {
            theta_lo: 1.0,
            theta_hi: 2.0,
            qualities: vec![1.0, 2.0, 3.0],
            costs: vec![0.5, 1.0, 2.0],
            thresholds: vec![1.3, 1.7],
            base_utility: 0.5,
        }
    }

    #[test]
    fn discretized_target_is_ic_ir() {
        let (e, scr) = three_levels().discretize(50).unwrap();
        assert!(check_ic_ir(&e, &scr, DEFAULT_TOL).holds);
        assert_eq!(e.type_count(), 50);
    }

    #[test]
    fn envelope_prices_are_constant_within_a_level() {
        let spec = three_levels();
        // Level 1 on [1.3, 1.7): price θq − U = 1.3·2 − (0.5 + 0.3).
        let (e, scr) = spec.discretize(11).unwrap();
        let t = e.type_id("t004").unwrap(); // θ = 1.4
        assert!((scr.bundle(t).price() - 1.8).abs() < 1e-12);
    }

    #[test]
    fn gap_shrinks_with_the_grid() {
        let spec = three_levels();
        let gap = |n| {
            let (e, scr) = spec.discretize(n).unwrap();
            monopoly_verify(&e, &scr, 0.05, 1, false, DEFAULT_TOL).unwrap()
        };
        let (r50, r100) = (gap(50), gap(100));
        assert!(r50.supported() && r100.supported());
        assert!(r50.constancy_gap.unwrap() <= 0.1);
        assert!(r100.constancy_gap.unwrap() < r50.constancy_gap.unwrap());
    }

    #[test]
    fn binary_economy_gets_personalized_rebates() {
        let (e, scr) = three_levels().discretize(2).unwrap();
        let r = monopoly_verify(&e, &scr, 0.05, 1, false, DEFAULT_TOL).unwrap();
        assert!(r.personalized);
        assert!(r.net_price_error <= 1e-9);
        assert!(r.uniform_rebate.is_none());
    }

    #[test]
    fn decreasing_targets_are_rejected() {
        let (e, scr) = three_levels().discretize(5).unwrap();
        let flipped: Vec<Bundle> = scr.bundles().iter().rev().copied().collect();
        let scr = SocialChoiceRule::new(&e, flipped).unwrap();
        assert!(matches!(
            monopoly_verify(&e, &scr, 0.05, 1, false, DEFAULT_TOL),
            Err(Error::Precondition(_))
        ));
        let mut bad = three_levels();
        bad.thresholds = vec![1.7, 1.3];
        assert!(bad.discretize(5).is_err());
    }
}
