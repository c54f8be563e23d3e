//! Rotating, mirror-symmetric steady states of the gravitational
//! Vlasov–Poisson system, obtained by deforming a spherical polytrope and
//! continuing in the angular velocity with a chord iteration.
//!
//! The guide in `book/` walks through the pipeline; its listings run as
//! doc-tests through the `guide` module below.

pub mod ansatz;
pub mod basestate;
pub mod config;
pub mod deformation;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harmonics;
pub mod linearized;
pub mod operator;
pub mod persist;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/closure.md")]
    mod closure {}
    #[doc = include_str!("../../../book/src/base-state.md")]
    mod base_state {}
    #[doc = include_str!("../../../book/src/harmonics.md")]
    mod harmonics {}
    #[doc = include_str!("../../../book/src/deformation.md")]
    mod deformation {}
    #[doc = include_str!("../../../book/src/operator.md")]
    mod operator {}
    #[doc = include_str!("../../../book/src/continuation.md")]
    mod continuation {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
}
