//! Dealers selling car models to customers with hidden tastes.
//!
//! Target prices are the highest ones that keep every customer on their
//! assigned model: the lowest customer's participation constraint binds,
//! and each higher customer is just willing to pick their own model.

use crate::economy::{AgentType, Bundle, ConsumptionRule, Economy, Good, GoodId, SocialChoiceRule, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::incentives::{construct_transfers, TransferMode, TransferOutcome};

#[derive(Debug, Clone, PartialEq)]
pub enum CostTable {
    /// Production cost per model, the same for every customer.
    TypeIndependent(Vec<f64>),
    /// Cost indexed `[customer][model]`, e.g. when some customers are cheaper
    /// to service after the sale.
    TypeDependent(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarSalesParams {
    pub customers: Vec<AgentType>,
    pub models: Vec<String>,
    /// Willingness to pay, indexed `[customer][model]`.
    pub tastes: Vec<Vec<f64>>,
    pub costs: CostTable,
    /// Model each customer should buy; `None` leaves them out of the market.
    pub assignment: Vec<Option<usize>>,
}

impl CarSalesParams {
    /// Low and high tastes, 80/20, with costs that do not depend on the buyer.
    pub fn private() -> Self {
        CarSalesParams {
            customers: vec![
                AgentType { name: "theta1".into(), mass: 0.8 },
                AgentType { name: "theta2".into(), mass: 0.2 },
            ],
            models: vec!["L".into(), "H".into()],
            tastes: vec![vec![10.0, 14.0], vec![12.0, 20.0]],
            costs: CostTable::TypeIndependent(vec![5.0, 9.0]),
            assignment: vec![Some(0), Some(1)],
        }
    }

    /// Same market, but high-taste customers are cheaper to serve.
    pub fn interdependent() -> Self {
        CarSalesParams {
            costs: CostTable::TypeDependent(vec![vec![5.0, 9.0], vec![3.0, 7.0]]),
            ..Self::private()
        }
    }

    pub fn with_masses(mut self, masses: &[f64]) -> Result<Self> {
        if masses.len() != self.customers.len() {
            return Err(Error::validation(
                "customers",
                format!("expected {} masses, found {}", self.customers.len(), masses.len()),
            ));
        }
        for (c, m) in self.customers.iter_mut().zip(masses) {
            c.mass = *m;
        }
        Ok(self)
    }
}

pub fn make_car_sales(p: &CarSalesParams) -> Result<(Economy, SocialChoiceRule)> {
    let n = p.customers.len();
    let cost = match &p.costs {
        CostTable::TypeIndependent(row) => vec![row.clone(); n],
        CostTable::TypeDependent(tab) => tab.clone(),
    };
    let goods = p
        .models
        .iter()
        .enumerate()
        .map(|(k, name)| Good { name: name.clone(), vector: vec![(k + 1) as f64] })
        .collect();
    let e = Economy::new(p.customers.clone(), goods, p.tastes.clone(), cost)?;
    if p.assignment.len() != n {
        return Err(Error::validation(
            "assignment",
            format!("expected {n} entries, found {}", p.assignment.len()),
        ));
    }
    if let Some(k) = p.assignment.iter().flatten().find(|k| **k >= p.models.len()) {
        return Err(Error::UnknownGood(*k));
    }
    let x = ConsumptionRule::new(p.assignment.iter().map(|k| k.map(GoodId)).collect());
    let prices = match construct_transfers(&e, &x, TransferMode::Maximal, 0.0, None, DEFAULT_TOL)? {
        TransferOutcome::Feasible(rule) => rule.prices,
        TransferOutcome::Infeasible(c) => {
            return Err(Error::validation(
                "assignment",
                format!("no prices keep customers on their models (cycle total {})", c.total),
            ))
        }
    };
    let bundles = e
        .type_ids()
        .map(|t| match x.good(t) {
            None => Bundle::Null,
            Some(g) => Bundle::offer(g, prices[t.0]),
        })
        .collect();
    let scr = SocialChoiceRule::new(&e, bundles)?;
    Ok((e, scr))
}
