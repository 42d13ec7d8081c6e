//! Moments, error norms and distribution distances used to score surrogates.

mod distribution;
mod moments;

pub use distribution::{
    discrete_errors, error_points, kde_pdf, ks_statistic, silverman_bandwidth, Support,
};
pub use moments::{
    average_moments, moments_by_misc_quadrature, moments_by_tensor_quadrature,
    moments_from_samples, raw_moments_by_misc_quadrature, reference_moments,
    relative_moment_errors, MomentSet, MonteCarloProtocol, Reference,
};

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub iteration: usize,
    pub cost: f64,
    pub moments: MomentSet,
    pub err_moments: [Option<f64>; 4],
    pub err_l2: Option<f64>,
    pub err_linf: Option<f64>,
    pub ks: f64,
}
