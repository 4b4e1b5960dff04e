//! Rate functions `M, K : ℝ₊ → [2, ∞)`, their right inverses, and the
//! decay envelope `w_{M_K}(c₁t)^{-m}` they predict.

mod checks;
mod envelope;
mod expr;
mod inverse;

pub use checks::{check_hypotheses, check_k_aux, check_submultiplicative, observed_shift_ratio, SubmultGrid};
pub use envelope::{envelope, iterated_log_sequence, mk_rate, omega_contains, EnvelopeSpec, LpExponent, MkVariant};
pub use expr::{Evaluation, RateExpr};
pub use inverse::{right_inverse, w_of, Inverse, InverseOptions};
