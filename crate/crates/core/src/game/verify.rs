//! Verdicts on whether a policy implements the target rule through
//! competing intermediaries.

use crate::economy::{Bundle, Economy, SocialChoiceRule};
use crate::error::{Error, Result};
use crate::game::allocation::{allocations, AdversarialGoal, Allocation, GoodPreference, MenuProfile, TieBreakRule};
use crate::game::bad_equilibrium::{construct_bad_equilibrium, BadEquilibriumWitness};
use crate::game::profit::NetProfit;
use crate::game::search::{deviation_search, DeviationSearch, SearchConfig};
use crate::incentives::{check_du, check_ic_ir, find_indifferent_pairs, DuViolation, IndifferenceReport};
use crate::policies::{hat_fees, Policy, PolicyKind};

#[derive(Debug, Clone, PartialEq)]
pub struct PartialVerdict {
    pub supported: bool,
    pub profile: MenuProfile,
    pub search: DeviationSearch,
    /// Why the target profile falls short, if it does.
    pub issues: Vec<String>,
}

fn consumes_target(e: &Economy, scr: &SocialChoiceRule, a: &Allocation, tol: f64) -> Option<String> {
    for t in e.type_ids() {
        let target = scr.bundle(t);
        for (b, m) in a.consumed(t) {
            if m > 0.0 && !b.same_as(&target, tol) {
                let got = match b {
                    Bundle::Null => "the null bundle".to_string(),
                    Bundle::Offer(o) => format!("({}, {})", e.good_name(o.good), o.price),
                };
                return Some(format!("type {} consumes {got} instead of its target", e.type_name(t)));
            }
        }
    }
    None
}

/// Checks that the symmetric target profile is an equilibrium at grid
/// resolution: no profitable deviation, zero profit on the path, and agents
/// consuming their target bundles.
pub fn verify_partial_implementation(
    e: &Economy,
    scr: &SocialChoiceRule,
    policy: &Policy,
    rule: TieBreakRule,
    cfg: &SearchConfig,
    intermediaries: usize,
) -> Result<PartialVerdict> {
    if !check_ic_ir(e, scr, cfg.tol).holds {
        return Err(Error::Precondition(
            "target rule is not incentive compatible and individually rational".into(),
        ));
    }
    let pref = GoodPreference::from_target(scr);
    let profile = MenuProfile::symmetric(scr, intermediaries, cfg.tol);
    let search = deviation_search(e, &pref, policy, &profile, rule, cfg)?;

    let mut issues = Vec::new();
    if let Some(w) = &search.witness {
        issues.push(format!(
            "intermediary {} gains {} by posting a different menu",
            w.deviator, w.profit_gain
        ));
    }
    for (i, p) in search.baseline_profits.iter().enumerate() {
        match p {
            NetProfit::Profit(v) if v.abs() <= cfg.tol => {}
            NetProfit::Profit(v) => issues.push(format!("intermediary {i} earns {v} on the path")),
            NetProfit::Violation(r) => issues.push(format!("intermediary {i} violates the policy on the path: {r}")),
        }
    }
    if let Some(msg) = consumes_target(e, scr, &search.baseline, cfg.tol) {
        issues.push(msg);
    }
    if rule == TieBreakRule::Adversarial(AdversarialGoal::AntiImplementation) {
        for a in allocations(e, &profile, &pref, rule, cfg.tol, 100_000)? {
            if let Some(msg) = consumes_target(e, scr, &a, cfg.tol) {
                issues.push(format!("under an adverse tie-break, {msg}"));
                break;
            }
        }
    }
    Ok(PartialVerdict {
        supported: issues.is_empty(),
        profile,
        search,
        issues,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum FullVerdict {
    /// Every equilibrium implements the target rule.
    Supported,
    /// Some type is indifferent between its bundle and another target bundle
    /// (or the null bundle), so another equilibrium outcome exists.
    Indifferent(IndifferenceReport),
    /// A cycle of types can swap goods unnoticed by the regulator.
    DistinctUtilityFails {
        violation: DuViolation,
        bad_equilibrium: Option<Box<BadEquilibriumWitness>>,
        /// Why no witness could be built, when it could not.
        diagnostic: Option<String>,
    },
}

impl FullVerdict {
    pub fn is_supported(&self) -> bool {
        matches!(self, FullVerdict::Supported)
    }
}

/// Whether every equilibrium under `policy` implements the target rule.
///
/// Answers exist for the break-even per-unit schedule with private values
/// and for the target-distribution regulation.
pub fn verify_full_implementation(
    e: &Economy,
    scr: &SocialChoiceRule,
    policy: &Policy,
    cfg: &SearchConfig,
    intermediaries: usize,
    force: bool,
) -> Result<FullVerdict> {
    if !check_ic_ir(e, scr, cfg.tol).holds {
        return Err(Error::Precondition(
            "target rule is not incentive compatible and individually rational".into(),
        ));
    }
    let hat = hat_fees(e, scr)?;
    let is_hat = |fees: &[f64]| fees.iter().zip(&hat).all(|(a, b)| (a - b).abs() <= cfg.tol);
    match &policy.kind {
        PolicyKind::PerUnit { fees } if is_hat(fees) => {
            if !e.has_private_values(cfg.tol) {
                return Err(Error::Unsupported(
                    "full implementation under per-unit fees is only characterized with private values; \
                     with interdependent values the break-even schedule can fail even partially (try find-deviation)"
                        .into(),
                ));
            }
            let report = find_indifferent_pairs(e, scr, cfg.tol)?;
            Ok(if report.is_empty() {
                FullVerdict::Supported
            } else {
                FullVerdict::Indifferent(report)
            })
        }
        PolicyKind::TargetDistribution { fees, .. } if is_hat(fees) => {
            let du = check_du(e, &scr.consumption(), cfg.tol, force)?;
            let Some(violation) = du.violations.into_iter().next() else {
                return Ok(FullVerdict::Supported);
            };
            let (bad_equilibrium, diagnostic) =
                match construct_bad_equilibrium(e, scr, &violation, policy, cfg, intermediaries) {
                    Ok(w) => (Some(Box::new(w)), None),
                    Err(err) => (None, Some(err.to_string())),
                };
            Ok(FullVerdict::DistinctUtilityFails {
                violation,
                bad_equilibrium,
                diagnostic,
            })
        }
        _ => Err(Error::Unsupported(format!(
            "no full-implementation characterization for the {} policy with these fees",
            policy.name()
        ))),
    }
}
