//! The menu-posting game between intermediaries and agents.

mod allocation;
mod bad_equilibrium;
mod monopoly;
mod profit;
mod search;
mod verify;

pub use allocation::{
    allocate, allocations, AdversarialGoal, Allocation, GoodPreference, MenuProfile, Share, TieBreakRule,
};
pub use bad_equilibrium::{construct_bad_equilibrium, BadEquilibriumWitness};
pub use monopoly::{monopoly_verify, MonopolyReport, SingleCrossingSpec};
pub use profit::{gross_profit, intermediary_profit, NetProfit};
pub use search::{
    deviation_search, enumerate_equilibria, settle, DeviationSearch, DeviationWitness, Equilibrium,
    EquilibriumEnumeration, PriceGrid, SearchConfig, DEFAULT_CANDIDATE_LIMIT, DEFAULT_DEV_TOL,
    EQUILIBRIUM_MENU_LIMIT,
};
pub use verify::{verify_full_implementation, verify_partial_implementation, FullVerdict, PartialVerdict};
