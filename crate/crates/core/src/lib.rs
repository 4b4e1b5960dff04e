//! Numerical laboratory for quantified Tauberian theorems.
//!
//! Rate functions `M`, `K` predict how fast a function whose Laplace
//! transform extends into `Ω_M` must decay. This crate computes those
//! envelopes, builds the mollifiers and extremal functions behind the
//! estimates, and checks each inequality on finite grids.

pub mod bridge;
pub mod decomposition;
pub mod error;
pub mod extremal;
pub mod mollifier;
pub mod numeric;
pub mod rate;
pub mod report;
pub mod semigroup;
pub mod signal;
pub mod suite;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use rate::{EnvelopeSpec, InverseOptions, RateExpr};
pub use report::VerificationReport;
pub use signal::SampledSignal;

// The guide's code blocks run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/mollifier.md")]
    mod mollifier {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/extremal.md")]
    mod extremal {}
    #[doc = include_str!("../../../book/src/bridge.md")]
    mod bridge {}
    #[doc = include_str!("../../../book/src/semigroup.md")]
    mod semigroup {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
