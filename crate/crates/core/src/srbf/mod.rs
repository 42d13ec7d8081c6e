//! Stochastic radial basis function surrogates.
//!
//! A surrogate averages power-kernel expansions over random exponents:
//!
//! ```text
//! f(y, τ) = Σ_j w_j(τ) ‖y − c_j‖^τ,   F(y) = (1/Θ) Σ_i f(y, τ_i),   τ_i ~ U[τ_min, τ_max]
//! ```
//!
//! and the spread of `{f(y, τ_i)}` (central 95% band) is its uncertainty.
//! Fidelities are stacked additively, `S_M = F₁ + Σ ε_i`, and
//! [`adaptive_run`] samples where the combined band is widest.
//!
//! All inputs live in the unit hypercube; the adaptive loop maps them to
//! the model's domain.

mod adaptive;
mod kmeans;
mod loocv;
mod mf;
mod pso;
mod surrogate;
mod training;

pub use adaptive::{
    adaptive_run, infill_point, initial_design, CenterMode, Infill, SrbfIterationView, SrbfOptions,
    SrbfOutcome, SrbfStop, SrbfStopReason, MIN_SEPARATION,
};
pub use kmeans::select_centers;
pub use loocv::{loocv_rmse, loocv_select_k, LoocvChoice};
pub use mf::{build_interpolating, build_mf_surrogate, select_fidelity, MfSrbfSurrogate};
pub use pso::{initial_lattice, pso_maximize, PsoConfig, PsoResult};
pub use surrogate::{
    band_width, fit_weights, kernel_value, normal_residual, residuals, FitMode, PredictScratch,
    Solver, SrbfConfig, SrbfSurrogate, TauSamples,
};
pub use training::TrainingSet;
