//! Regulator policies: fee schedules on the measure of goods an intermediary
//! sells, with a hard penalty when a distributional requirement is missed.

use crate::economy::{
    target_good_distribution, target_measure, target_profit_of_good, Bundle, Economy, GoodDistribution, GoodId,
    SocialChoiceRule, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::incentives::{construct_transfers, TransferMode, TransferOutcome};

/// Default sup-norm tolerance when comparing normalized distributions.
pub const DEFAULT_DISTR_TOL: f64 = 1e-6;

/// Mass sold of each good, indexed by `GoodId`.
pub type GoodMeasure = [f64];

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    /// Fee `t(x)` per unit sold.
    PerUnit { fees: Vec<f64> },
    /// Per-unit fees, provided the normalized measure equals the target distribution.
    TargetDistribution { target: GoodDistribution, fees: Vec<f64> },
    /// Per-unit fees, provided the normalized measure equals every other active intermediary's.
    MatchEachOther { fees: Vec<f64> },
    /// Per-unit fees, provided every good is sold.
    FullLineForcing { fees: Vec<f64> },
    /// Fees at maximal-price profits, provided the measure equals the target
    /// distribution. With `required_mass` set, the total mass sold must match too.
    MonopolyRefinement {
        target: GoodDistribution,
        fees: Vec<f64>,
        required_mass: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionVariant {
    Target,
    Match,
    FullLine,
    Monopoly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub kind: PolicyKind,
    pub distr_tol: f64,
    /// Apply distributional requirements to intermediaries that sell nothing.
    pub punish_inactive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeeOutcome {
    Fee(f64),
    Violation(String),
}

impl FeeOutcome {
    pub fn fee(&self) -> Option<f64> {
        match self {
            FeeOutcome::Fee(f) => Some(*f),
            FeeOutcome::Violation(_) => None,
        }
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, FeeOutcome::Violation(_))
    }
}

impl Policy {
    pub fn new(kind: PolicyKind) -> Self {
        Policy {
            kind,
            distr_tol: DEFAULT_DISTR_TOL,
            punish_inactive: false,
        }
    }

    pub fn per_unit(fees: Vec<f64>) -> Self {
        Policy::new(PolicyKind::PerUnit { fees })
    }

    pub fn with_distr_tol(mut self, tol: f64) -> Self {
        self.distr_tol = tol;
        self
    }

    pub fn with_punish_inactive(mut self, punish: bool) -> Self {
        self.punish_inactive = punish;
        self
    }

    pub fn fees(&self) -> &[f64] {
        match &self.kind {
            PolicyKind::PerUnit { fees }
            | PolicyKind::TargetDistribution { fees, .. }
            | PolicyKind::MatchEachOther { fees }
            | PolicyKind::FullLineForcing { fees }
            | PolicyKind::MonopolyRefinement { fees, .. } => fees,
        }
    }

    /// Short identifier used in reports.
    pub fn name(&self) -> &'static str {
        match self.kind {
            PolicyKind::PerUnit { .. } => "per-unit",
            PolicyKind::TargetDistribution { .. } => "target-distribution",
            PolicyKind::MatchEachOther { .. } => "match-each-other",
            PolicyKind::FullLineForcing { .. } => "full-line-forcing",
            PolicyKind::MonopolyRefinement { .. } => "monopoly-refinement",
        }
    }

    pub fn is_distributional(&self) -> bool {
        !matches!(self.kind, PolicyKind::PerUnit { .. })
    }
}

/// Per-unit fees equal to `π̂(x)` on the image of the target rule; goods
/// nobody is targeted at carry no fee.
pub fn hat_fees(e: &Economy, scr: &SocialChoiceRule) -> Result<Vec<f64>> {
    let image: Vec<GoodId> = target_image(e, scr);
    e.good_ids()
        .map(|g| {
            if image.contains(&g) {
                target_profit_of_good(e, scr, g)
            } else {
                Ok(0.0)
            }
        })
        .collect()
}

fn target_image(e: &Economy, scr: &SocialChoiceRule) -> Vec<GoodId> {
    e.good_ids()
        .filter(|g| e.type_ids().any(|t| scr.bundle(t).good() == Some(*g)))
        .collect()
}

/// The break-even per-unit schedule `t = π̂`.
pub fn build_hat_per_unit(e: &Economy, scr: &SocialChoiceRule) -> Result<Policy> {
    Ok(Policy::per_unit(hat_fees(e, scr)?))
}

pub fn build_distribution_policy(e: &Economy, scr: &SocialChoiceRule, variant: DistributionVariant) -> Result<Policy> {
    let kind = match variant {
        DistributionVariant::Target => PolicyKind::TargetDistribution {
            target: target_good_distribution(e, scr)?,
            fees: hat_fees(e, scr)?,
        },
        DistributionVariant::Match => PolicyKind::MatchEachOther { fees: hat_fees(e, scr)? },
        DistributionVariant::FullLine => PolicyKind::FullLineForcing { fees: hat_fees(e, scr)? },
        DistributionVariant::Monopoly => {
            let bar = maximal_price_rule(e, scr)?;
            PolicyKind::MonopolyRefinement {
                target: target_good_distribution(e, scr)?,
                fees: hat_fees(e, &bar)?,
                required_mass: Some(scr.active_mass(e)),
            }
        }
    };
    Ok(Policy::new(kind))
}

/// `(x̂, ȳ)`: the target consumption rule at revenue-maximal IC-IR prices.
pub fn maximal_price_rule(e: &Economy, scr: &SocialChoiceRule) -> Result<SocialChoiceRule> {
    let x = scr.consumption();
    match construct_transfers(e, &x, TransferMode::Maximal, 0.0, None, DEFAULT_TOL)? {
        TransferOutcome::Infeasible(_) => Err(Error::Precondition(
            "target consumption rule is not implementable, so maximal prices do not exist".into(),
        )),
        TransferOutcome::Feasible(rule) => {
            let bundles = e
                .type_ids()
                .map(|t| match x.good(t) {
                    Some(g) => Bundle::offer(g, rule.price(t)),
                    None => Bundle::Null,
                })
                .collect();
            SocialChoiceRule::new(e, bundles)
        }
    }
}

fn normalized(nu: &GoodMeasure) -> Option<Vec<f64>> {
    let total: f64 = nu.iter().sum();
    (total > 0.0).then(|| nu.iter().map(|m| m / total).collect())
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn is_zero(nu: &GoodMeasure) -> bool {
    nu.iter().all(|m| m.abs() <= 0.0)
}

/// The fee charged to an intermediary selling `nu`, given what the others sell.
pub fn assess_fee(p: &Policy, nu: &GoodMeasure, others: &[&GoodMeasure]) -> FeeOutcome {
    let linear = FeeOutcome::Fee(p.fees().iter().zip(nu).map(|(t, m)| t * m).sum());
    if matches!(p.kind, PolicyKind::PerUnit { .. }) {
        return linear;
    }
    if is_zero(nu) {
        if !p.punish_inactive {
            return FeeOutcome::Fee(0.0);
        }
        return FeeOutcome::Violation("no goods sold".into());
    }
    let share = normalized(nu).expect("nonzero measure");
    let verdict = match &p.kind {
        PolicyKind::PerUnit { .. } => unreachable!(),
        PolicyKind::TargetDistribution { target, .. } => {
            (sup_distance(&share, target.weights()) <= p.distr_tol).then_some(()).ok_or("distribution mismatch".to_string())
        }
        PolicyKind::MatchEachOther { .. } => {
            // A rival that sells nothing has no distribution to match.
            let mismatch = others
                .iter()
                .any(|o| normalized(o).map_or(true, |o| sup_distance(&share, &o) > p.distr_tol));
            (!mismatch).then_some(()).ok_or("distribution differs from another intermediary".to_string())
        }
        PolicyKind::FullLineForcing { .. } => {
            let missing = nu.iter().any(|m| *m <= 0.0);
            (!missing).then_some(()).ok_or("not every good is sold".to_string())
        }
        PolicyKind::MonopolyRefinement { target, required_mass, .. } => {
            if sup_distance(&share, target.weights()) > p.distr_tol {
                Err("distribution mismatch".to_string())
            } else if let Some(m) = required_mass {
                let total: f64 = nu.iter().sum();
                if (total - m).abs() > p.distr_tol {
                    Err(format!("total mass sold {total} differs from the target {m}"))
                } else {
                    Ok(())
                }
            } else {
                Ok(())
            }
        }
    };
    match verdict {
        Ok(()) => linear,
        Err(reason) => FeeOutcome::Violation(reason),
    }
}

/// Per-unit schedules that break even on average at the target measure:
/// good `free` takes each value in `values`, good `solved` absorbs the
/// difference, and all other goods keep `π̂`.
pub fn cross_subsidy_schedules(
    e: &Economy,
    scr: &SocialChoiceRule,
    free: GoodId,
    solved: GoodId,
    values: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let hat = hat_fees(e, scr)?;
    let m = target_measure(e, scr);
    if m[solved.0] <= 0.0 {
        return Err(Error::NotInImage(e.good_name(solved).to_string()));
    }
    let budget: f64 = hat.iter().zip(&m).map(|(t, w)| t * w).sum();
    Ok(values
        .iter()
        .map(|&v| {
            let mut fees = hat.clone();
            fees[free.0] = v;
            let rest: f64 = fees
                .iter()
                .zip(&m)
                .enumerate()
                .filter(|(g, _)| *g != solved.0)
                .map(|(_, (t, w))| t * w)
                .sum();
            fees[solved.0] = (budget - rest) / m[solved.0];
            fees
        })
        .collect())
}
