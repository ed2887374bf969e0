//! Equilibria in which indifferent agents trade goods along a cycle.
//!
//! When a cycle of types leaves total consumption utility unchanged, every
//! IC transfer rule makes each type on it indifferent to its successor's
//! bundle. Agents can then swap goods on the path without changing the
//! measure of goods sold, and a uniform price shift restores zero profit.

use crate::economy::{Economy, SocialChoiceRule};
use crate::error::{Error, Result};
use crate::game::allocation::{Allocation, GoodPreference, MenuProfile, TieBreakRule};
use crate::game::profit::{gross_profit, NetProfit};
use crate::game::search::{deviation_search, settle, DeviationWitness, SearchConfig};
use crate::incentives::{check_ic_ir, DuViolation};
use crate::policies::{assess_fee, FeeOutcome, Policy};

#[derive(Debug, Clone, PartialEq)]
pub struct BadEquilibriumWitness {
    pub cycle: DuViolation,
    /// Mass of each cycle type moved to its successor's good.
    pub swap_mass: f64,
    /// `d̂`: uniform shift applied to every target price.
    pub shift: f64,
    pub profile: MenuProfile,
    pub preference: GoodPreference,
    pub allocation: Allocation,
    pub utilities: Vec<f64>,
    pub target_utilities: Vec<f64>,
    pub profits: Vec<NetProfit>,
    /// A profitable deviation from the profile, if the grid search found one.
    pub deviation: Option<DeviationWitness>,
    pub candidates_evaluated: u64,
}

impl BadEquilibriumWitness {
    pub fn survives(&self) -> bool {
        self.deviation.is_none()
    }
}

/// Builds the swap profile for `cycle`, prices it to break even under
/// `policy`, and searches it for profitable deviations with agents leaning
/// toward the swapped goods.
pub fn construct_bad_equilibrium(
    e: &Economy,
    scr: &SocialChoiceRule,
    cycle: &DuViolation,
    policy: &Policy,
    cfg: &SearchConfig,
    intermediaries: usize,
) -> Result<BadEquilibriumWitness> {
    if !check_ic_ir(e, scr, cfg.tol).holds {
        return Err(Error::Precondition(
            "target rule is not incentive compatible and individually rational".into(),
        ));
    }
    if cycle.cycle.len() < 2 {
        return Err(Error::Precondition("a swap needs at least two types".into()));
    }
    let x = scr.consumption();
    let recomputed: f64 = cycle
        .cycle
        .iter()
        .map(|&t| {
            let next = cycle.successor(t).expect("on cycle");
            e.value_of(x.good(next), t) - e.value_of(x.good(t), t)
        })
        .sum();
    if recomputed.abs() > cfg.tol {
        return Err(Error::Precondition(format!(
            "the cycle changes total utility by {recomputed}; agents on it are not forced to be indifferent"
        )));
    }

    let swap_mass = cycle.cycle.iter().map(|&t| e.mass(t)).fold(f64::INFINITY, f64::min);
    let preference = GoodPreference::swapped(e, scr, cycle, swap_mass)?;
    let rule = TieBreakRule::FavorTarget;

    // Zero-profit shift: gross profit is affine in d with slope equal to the
    // mass served, and the fee does not depend on prices.
    let unshifted = MenuProfile::symmetric(scr, intermediaries, cfg.tol);
    let (alloc0, _) = settle(e, &unshifted, &preference, policy, rule, cfg.tol);
    let (mut gross, mut fee, mut served) = (0.0, 0.0, 0.0);
    for i in 0..intermediaries {
        let others: Vec<&[f64]> = (0..intermediaries)
            .filter(|j| *j != i)
            .map(|j| alloc0.measures[j].as_slice())
            .collect();
        match assess_fee(policy, &alloc0.measures[i], &others) {
            FeeOutcome::Fee(f) => fee += f,
            FeeOutcome::Violation(r) => {
                return Err(Error::Precondition(format!("the swapped allocation violates the policy: {r}")))
            }
        }
        gross += gross_profit(e, &alloc0, i);
        served += alloc0.measures[i].iter().sum::<f64>();
    }
    if served <= 0.0 {
        return Err(Error::NoActiveTypes);
    }
    let shift = (fee - gross) / served;

    let target_utilities: Vec<f64> = e.type_ids().map(|t| e.utility_unchecked(&scr.bundle(t), t)).collect();
    for t in e.type_ids().filter(|t| !scr.bundle(*t).is_null()) {
        if target_utilities[t.0] - shift < -cfg.tol {
            return Err(Error::Precondition(format!(
                "shifting prices by {shift} leaves type {} below its outside option; no swap equilibrium on this cycle",
                e.type_name(t)
            )));
        }
    }

    let menu: Vec<_> = scr.target_menu(cfg.tol).into_iter().map(|o| o.shifted(shift)).collect();
    let profile = MenuProfile::new(vec![menu; intermediaries]);
    let (allocation, profits) = settle(e, &profile, &preference, policy, rule, cfg.tol);
    for &t in &cycle.cycle {
        let next = cycle.successor(t).expect("on cycle");
        let moved: f64 = allocation
            .shares
            .iter()
            .filter(|s| s.agent == t && Some(s.offer.good) == x.good(next))
            .map(|s| s.mass)
            .sum();
        if (moved - swap_mass).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "type {} does not take its successor's good at the shifted prices",
                e.type_name(t)
            )));
        }
    }
    let search = deviation_search(e, &preference, policy, &profile, rule, cfg)?;
    Ok(BadEquilibriumWitness {
        cycle: cycle.clone(),
        swap_mass,
        shift,
        utilities: allocation.utilities.clone(),
        target_utilities,
        allocation,
        profile,
        preference,
        profits,
        deviation: search.witness,
        candidates_evaluated: search.candidates_evaluated,
    })
}
