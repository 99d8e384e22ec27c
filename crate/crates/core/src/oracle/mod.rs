//! Ground truth for Gaussian mixture models by exhaustive enumeration of
//! cluster assignments, and error traces of sampler estimates against it.

mod gmm;
mod mse;
mod recognize;

pub use gmm::{gmm_exact, gmm_source, ExactPosterior, GmmSpec, OracleError};
pub use mse::{aggregate_traces, log_grid, mse_trace, Functional, TraceBand, UnknownFunctional};
pub use recognize::{recognize_gmm, GmmLayout};

#[cfg(test)]
mod tests;
