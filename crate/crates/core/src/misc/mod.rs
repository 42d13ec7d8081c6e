//! Multi-index stochastic collocation.
//!
//! Tensor Lagrange interpolants `U_{α,β}` of fidelity `α` on the nested
//! Clenshaw-Curtis grid `T_β` are combined over a downward-closed set `Λ`:
//!
//! ```text
//! S_Λ = Σ_{[α,β] ∈ Λ} c_{α,β} U_{α,β},   c_k = Σ_{i ∈ {0,1}^D, k+i ∈ Λ} (-1)^{|i|}
//! ```
//!
//! [`adapt`] grows `Λ` by profit, with the error contribution measured
//! either on the quadrature of the mean or pointwise on a testing set.

mod adapt;
mod approx;
pub mod cc;
mod index;
mod surrogate;
mod tensor;

pub use adapt::{
    adapt, testing_set, AdaptOptions, AdaptOutcome, IterationView, ProfitKind, StopReason,
    StoppingCriteria,
};
pub use approx::{work_contribution, Contribution, MiscApproximation};
pub use cc::{cc_points, level_to_knots, CcRule, CcRules};
pub use index::{
    coefficient_increment, combination_coefficients, nonzero_coefficients, MultiIndex,
    MultiIndexSet,
};
pub use surrogate::{EvalScratch, MiscSurrogate, SurrogateTerm};
pub use tensor::{TensorGrid, TensorInterpolant};
