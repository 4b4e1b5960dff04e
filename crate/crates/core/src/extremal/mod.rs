//! The measure `μ` whose Cauchy and Laplace transforms are concentrated on
//! a band, and the sum of such measures that makes the envelope sharp.

mod function;
mod lemma;
mod measure;

pub use function::*;
pub use lemma::*;
pub use measure::*;
