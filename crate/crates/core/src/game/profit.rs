use crate::economy::Economy;
use crate::game::allocation::Allocation;
use crate::policies::{assess_fee, FeeOutcome, Policy};

/// Net profit of an intermediary; a policy violation is not a number.
#[derive(Debug, Clone, PartialEq)]
pub enum NetProfit {
    Profit(f64),
    Violation(String),
}

impl NetProfit {
    pub fn value(&self) -> Option<f64> {
        match self {
            NetProfit::Profit(p) => Some(*p),
            NetProfit::Violation(_) => None,
        }
    }
}

/// Mass-weighted sales profit of intermediary `i`, before fees.
pub fn gross_profit(e: &Economy, alloc: &Allocation, i: usize) -> f64 {
    alloc
        .shares
        .iter()
        .filter(|s| s.intermediary == i)
        .map(|s| s.mass * (s.offer.price - e.cost(s.offer.good, s.agent)))
        .sum()
}

/// `∫ π dμ_i − ψ(ν_i)`.
pub fn intermediary_profit(e: &Economy, alloc: &Allocation, policy: &Policy, i: usize) -> NetProfit {
    let others: Vec<&[f64]> = alloc
        .measures
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, m)| m.as_slice())
        .collect();
    match assess_fee(policy, &alloc.measures[i], &others) {
        FeeOutcome::Fee(f) => NetProfit::Profit(gross_profit(e, alloc, i) - f),
        FeeOutcome::Violation(r) => NetProfit::Violation(r),
    }
}
