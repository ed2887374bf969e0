//! Insurers selling coverage plans to patients with hidden risk types.
//!
//! With CARA utility `v(c) = 1 - exp(-λc)`, a patient's ranking of policies
//! `(x, y)` matches the quasi-linear ranking by `ṽ(x, θ) - y`, where `ṽ` is
//! the certainty equivalent of the consumption plan. `cara_transform`
//! builds that quasi-linear economy.

use crate::economy::{AgentType, Bundle, Economy, Good, GoodId, SocialChoiceRule, MASS_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct InsuranceType {
    pub name: String,
    pub mass: f64,
    /// Probability of each state.
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub name: String,
    /// Consumption in each state before the premium is paid.
    pub consumption: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsuranceEconomy {
    /// Endowment in each state.
    pub endowments: Vec<f64>,
    pub types: Vec<InsuranceType>,
    pub plans: Vec<Plan>,
    /// Plan index and premium for each type; `None` leaves the type uninsured.
    pub target: Vec<Option<(usize, f64)>>,
    pub risk_aversion: f64,
}

impl InsuranceEconomy {
    /// Two states (healthy, sick), a low-risk and a high-risk group of equal
    /// size, and a partial and a full coverage plan.
    pub fn example() -> Self {
        InsuranceEconomy {
            endowments: vec![10.0, 2.0],
            types: vec![
                InsuranceType { name: "low_risk".into(), mass: 0.5, probabilities: vec![0.9, 0.1] },
                InsuranceType { name: "high_risk".into(), mass: 0.5, probabilities: vec![0.6, 0.4] },
            ],
            plans: vec![
                Plan { name: "gold".into(), consumption: vec![10.0, 6.0] },
                Plan { name: "platinum".into(), consumption: vec![10.0, 10.0] },
            ],
            target: vec![Some((0, 2.0)), Some((1, 4.5))],
            risk_aversion: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.risk_aversion.is_finite() && self.risk_aversion > 0.0) {
            return Err(Error::validation(
                "risk_aversion",
                format!("{} is not positive", self.risk_aversion),
            ));
        }
        let states = self.endowments.len();
        if states == 0 {
            return Err(Error::validation("endowments", "at least one state is required"));
        }
        for t in &self.types {
            let field = format!("types.{}.probabilities", t.name);
            if t.probabilities.len() != states {
                return Err(Error::validation(
                    field,
                    format!("expected {states} entries, found {}", t.probabilities.len()),
                ));
            }
            if t.probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::validation(field, "probabilities must be nonnegative"));
            }
            let total: f64 = t.probabilities.iter().sum();
            if (total - 1.0).abs() > MASS_TOL {
                return Err(Error::validation(field, format!("probabilities sum to {total}")));
            }
        }
        for p in &self.plans {
            if p.consumption.len() != states {
                return Err(Error::validation(
                    format!("plans.{}.consumption", p.name),
                    format!("expected {states} entries, found {}", p.consumption.len()),
                ));
            }
        }
        if self.target.len() != self.types.len() {
            return Err(Error::validation(
                "target",
                format!("expected {} entries, found {}", self.types.len(), self.target.len()),
            ));
        }
        if let Some((k, _)) = self.target.iter().flatten().find(|(k, _)| *k >= self.plans.len()) {
            return Err(Error::UnknownGood(*k));
        }
        Ok(())
    }
}

/// Certainty equivalent `-λ⁻¹ log Σ_s θ_s exp(-λ x_s)` of a consumption plan.
pub fn cara_value(probabilities: &[f64], consumption: &[f64], lambda: f64) -> f64 {
    // Factor out the largest exponent so that large consumption levels do not
    // underflow to log(0).
    let exps: Vec<(f64, f64)> = probabilities
        .iter()
        .zip(consumption)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, x)| (*p, -lambda * x))
        .collect();
    let m = exps.iter().map(|(_, a)| *a).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = exps.iter().map(|(p, a)| p * (a - m).exp()).sum();
    -(m + s.ln()) / lambda
}

/// Quasi-linear economy with utility `ṽ(plan, θ)` and expected cost
/// `Σ_s θ_s (x_s - e_s)`. Premiums become prices.
pub fn cara_transform(ins: &InsuranceEconomy) -> Result<(Economy, SocialChoiceRule)> {
    ins.validate()?;
    let types = ins
        .types
        .iter()
        .map(|t| AgentType { name: t.name.clone(), mass: t.mass })
        .collect();
    let goods = ins
        .plans
        .iter()
        .map(|p| Good { name: p.name.clone(), vector: p.consumption.clone() })
        .collect();
    let utility = ins
        .types
        .iter()
        .map(|t| {
            ins.plans
                .iter()
                .map(|p| cara_value(&t.probabilities, &p.consumption, ins.risk_aversion))
                .collect()
        })
        .collect();
    let cost = ins
        .types
        .iter()
        .map(|t| {
            ins.plans
                .iter()
                .map(|p| {
                    t.probabilities
                        .iter()
                        .zip(&p.consumption)
                        .zip(&ins.endowments)
                        .map(|((q, x), e)| q * (x - e))
                        .sum()
                })
                .collect()
        })
        .collect();
    let e = Economy::new(types, goods, utility, cost)?;
    let bundles = ins
        .target
        .iter()
        .map(|t| match t {
            None => Bundle::Null,
            Some((k, premium)) => Bundle::offer(GoodId(*k), *premium),
        })
        .collect();
    let scr = SocialChoiceRule::new(&e, bundles)?;
    Ok((e, scr))
}
