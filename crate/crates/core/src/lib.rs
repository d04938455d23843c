//! Pseudospectral defocusing NLS solver with Morawetz and interaction-Morawetz diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod evolve;
pub mod fields;
pub mod grid;
pub mod harness;
pub mod initial;
pub mod interaction;
pub mod laws;
pub mod oracle;
mod par;
pub mod quadrature;
pub mod report;
pub mod single;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectral-grid.md")]
    mod spectral_grid {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/local-laws.md")]
    mod local_laws {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/single.md")]
    mod single {}
    #[doc = include_str!("../../../book/src/interaction.md")]
    mod interaction {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
