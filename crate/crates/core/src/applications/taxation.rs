//! Employers writing contracts with workers of hidden ability under an
//! income tax.
//!
//! A contract pairs an after-tax income `x` with a required performance `y`.
//! Workers get `x - v(y, θ)` and firms earn `h(y, θ) - x`. Worker utility
//! is linear in income, not in performance, so the adapter treats the
//! performance level as the good and the negated income as its price; see
//! [`SIGN_CONVENTIONS`].

use crate::economy::{AgentType, Bundle, Economy, Good, GoodId, SocialChoiceRule};
use crate::error::{Error, Result};

/// How each field of the canonical economy reads in taxation terms.
pub const SIGN_CONVENTIONS: &[(&str, &str)] = &[
    ("good", "required performance level y"),
    ("price", "negated after-tax income, -x"),
    ("utility v(good, type)", "negated disutility of effort, -v(y, θ)"),
    ("cost c(good, type)", "negated firm output, -h(y, θ)"),
    ("agent utility v - price", "x - v(y, θ)"),
    ("intermediary profit price - cost", "h(y, θ) - x"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Technology {
    /// Contracts specify effective output: `h(y, θ) = y`.
    EffectiveOutput,
    /// Contracts specify hours worked: `h(y, θ) = θ y`.
    LaborHours,
}

impl Technology {
    pub fn output(self, y: f64, ability: f64) -> f64 {
        match self {
            Technology::EffectiveOutput => y,
            Technology::LaborHours => ability * y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Worker {
    pub name: String,
    pub mass: f64,
    pub ability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaxationEconomy {
    pub workers: Vec<Worker>,
    /// Performance levels a contract may require.
    pub performance: Vec<f64>,
    pub technology: Technology,
    /// Disutility `v(y, θ)`, indexed `[worker][performance level]`.
    pub disutility: Vec<Vec<f64>>,
    /// Performance level index and after-tax income for each worker;
    /// `None` means the worker stays unemployed.
    pub target: Vec<Option<(usize, f64)>>,
}

impl TaxationEconomy {
    /// Abilities 1 and 2 in equal shares, performance levels 1 and 2, and
    /// disutility `y² / 2θ`.
    pub fn example(technology: Technology) -> Self {
        let performance = vec![1.0, 2.0];
        let workers = vec![
            Worker { name: "low".into(), mass: 0.5, ability: 1.0 },
            Worker { name: "high".into(), mass: 0.5, ability: 2.0 },
        ];
        let disutility = workers
            .iter()
            .map(|w| performance.iter().map(|y| y * y / (2.0 * w.ability)).collect())
            .collect();
        TaxationEconomy {
            workers,
            performance,
            technology,
            disutility,
            target: vec![Some((0, 1.0)), Some((1, 2.0))],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaxationInstance {
    pub economy: Economy,
    pub scr: SocialChoiceRule,
    pub technology: Technology,
    pub conventions: &'static [(&'static str, &'static str)],
}

impl TaxationInstance {
    /// Canonical bundle for the contract (level, income).
    pub fn bundle(level: usize, income: f64) -> Bundle {
        Bundle::offer(GoodId(level), -income)
    }

    /// Inverse of [`TaxationInstance::bundle`]; `None` for unemployment.
    pub fn contract(b: &Bundle) -> Option<(usize, f64)> {
        match b {
            Bundle::Null => None,
            Bundle::Offer(o) => Some((o.good.0, -o.price)),
        }
    }
}

pub fn make_taxation(tax: &TaxationEconomy) -> Result<TaxationInstance> {
    if let Some(y) = tax.performance.iter().find(|y| !y.is_finite()) {
        return Err(Error::validation("performance", format!("level {y} is not finite")));
    }
    if !tax.performance.windows(2).all(|p| p[1] > p[0]) {
        return Err(Error::validation("performance", "levels must be strictly increasing"));
    }
    for w in &tax.workers {
        // Output must rise with performance for every worker.
        let rising = tax
            .performance
            .windows(2)
            .all(|p| tax.technology.output(p[1], w.ability) > tax.technology.output(p[0], w.ability));
        if !rising {
            return Err(Error::validation(
                format!("workers.{}.ability", w.name),
                format!("output does not increase with performance at ability {}", w.ability),
            ));
        }
    }
    if tax.target.len() != tax.workers.len() {
        return Err(Error::validation(
            "target",
            format!("expected {} entries, found {}", tax.workers.len(), tax.target.len()),
        ));
    }
    if let Some((k, _)) = tax.target.iter().flatten().find(|(k, _)| *k >= tax.performance.len()) {
        return Err(Error::UnknownGood(*k));
    }
    let types = tax
        .workers
        .iter()
        .map(|w| AgentType { name: w.name.clone(), mass: w.mass })
        .collect();
    let goods = tax
        .performance
        .iter()
        .enumerate()
        .map(|(k, y)| Good { name: format!("y{k}"), vector: vec![*y] })
        .collect();
    let utility = tax.disutility.iter().map(|row| row.iter().map(|v| -v).collect()).collect();
    let cost = tax
        .workers
        .iter()
        .map(|w| tax.performance.iter().map(|y| -tax.technology.output(*y, w.ability)).collect())
        .collect();
    let economy = Economy::new(types, goods, utility, cost)?;
    let bundles = tax
        .target
        .iter()
        .map(|c| match c {
            None => Bundle::Null,
            Some((k, income)) => TaxationInstance::bundle(*k, *income),
        })
        .collect();
    let scr = SocialChoiceRule::new(&economy, bundles)?;
    Ok(TaxationInstance {
        economy,
        scr,
        technology: tax.technology,
        conventions: SIGN_CONVENTIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{TypeId, DEFAULT_TOL};
    use crate::incentives::{check_du, check_ic_ir};

    #[test]
    fn technology_sets_value_kind() {
        let eff = make_taxation(&TaxationEconomy::example(Technology::EffectiveOutput)).unwrap();
        assert!(eff.economy.has_private_values(DEFAULT_TOL));
        let hours = make_taxation(&TaxationEconomy::example(Technology::LaborHours)).unwrap();
        assert!(!hours.economy.has_private_values(DEFAULT_TOL));
        assert!(check_ic_ir(&eff.economy, &eff.scr, DEFAULT_TOL).holds);
    }

    #[test]
    fn contract_round_trip() {
        let inst = make_taxation(&TaxationEconomy::example(Technology::LaborHours)).unwrap();
        let b = TaxationInstance::bundle(1, 2.5);
        assert_eq!(TaxationInstance::contract(&b), Some((1, 2.5)));
        let u = inst.economy.utility_of(&b, TypeId(1)).unwrap();
        assert!((u - (2.5 - 1.0)).abs() < 1e-12);
        let pi = inst.economy.profit_of(&b, TypeId(1)).unwrap();
        assert!((pi - (4.0 - 2.5)).abs() < 1e-12);
    }

    #[test]
    fn identical_disutility_violates_du() {
        let mut tax = TaxationEconomy::example(Technology::EffectiveOutput);
        tax.disutility = vec![vec![0.5, 2.0]; 2];
        tax.target = vec![Some((0, 1.0)), Some((1, 2.5))];
        let inst = make_taxation(&tax).unwrap();
        let du = check_du(&inst.economy, &inst.scr.consumption(), DEFAULT_TOL, false).unwrap();
        assert!(!du.holds);
    }

    #[test]
    fn rejects_nonincreasing_output() {
        let mut tax = TaxationEconomy::example(Technology::LaborHours);
        tax.workers[0].ability = 0.0;
        assert!(make_taxation(&tax).is_err());
        let mut tax = TaxationEconomy::example(Technology::EffectiveOutput);
        tax.performance = vec![2.0, 1.0];
        assert!(make_taxation(&tax).is_err());
    }
}
