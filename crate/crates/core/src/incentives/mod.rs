//! Incentive diagnostics for target rules and consumption rules.

mod cmon;
mod du;
pub(crate) mod graph;
mod ic;

pub use cmon::{check_cmon, construct_transfers, CmonReport, NegativeCycle, TransferMode, TransferOutcome, TransferRule};
pub use du::{check_du, check_permuted_not_implementable, DuReport, DuViolation, DU_TYPE_LIMIT};
pub use ic::{check_ic_ir, find_indifferent_pairs, IcReport, IcViolation, IndifferencePair, IndifferenceReport, IrViolation};
