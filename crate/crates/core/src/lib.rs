//! Multi-fidelity forward uncertainty quantification.
//!
//! Two surrogate families are built over a hierarchy of models `G_1, ..., G_M`
//! of increasing accuracy and cost:
//!
//! - [`misc`]: adaptive multi-index stochastic collocation. Nested
//!   Clenshaw-Curtis tensor interpolants on several fidelities are combined
//!   with integer coefficients over a downward-closed multi-index set that is
//!   grown greedily by profit (error contribution over work).
//! - [`srbf`]: multi-fidelity stochastic radial basis functions. A power
//!   kernel with random exponent gives a prediction and a 95% band; the
//!   lowest fidelity plus inter-level error layers are refined by sampling
//!   where the band is widest.
//!
//! [`model`] holds the parameter domain, the cost-accounting model cache and
//! the Taylor benchmark; [`metrics`] holds moments, error norms, the
//! two-sample KS statistic and kernel density estimates.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the `mfuq` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod math;
pub mod metrics;
pub mod misc;
pub mod model;
pub mod rng;
pub mod srbf;

pub use error::{Error, Result};
