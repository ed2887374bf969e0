pub mod applications;
pub mod document;
pub mod economy;
pub mod error;
pub mod fixtures;
pub mod incentives;
pub mod game;
pub mod policies;

pub use document::{economy_to_json, load_economy, EconomyDocument};
pub use economy::*;
pub use error::{Error, Result};

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/economies.md")]
    mod economies {}
    #[doc = include_str!("../../../book/src/implementability.md")]
    mod implementability {}
    #[doc = include_str!("../../../book/src/distinct-utilities.md")]
    mod distinct_utilities {}
    #[doc = include_str!("../../../book/src/policies.md")]
    mod policies {}
    #[doc = include_str!("../../../book/src/competition.md")]
    mod competition {}
    #[doc = include_str!("../../../book/src/swap-equilibria.md")]
    mod swap_equilibria {}
    #[doc = include_str!("../../../book/src/applications.md")]
    mod applications {}
    #[doc = include_str!("../../../book/src/monopoly.md")]
    mod monopoly {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
