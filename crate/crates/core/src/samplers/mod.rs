//! Inference engines over a compiled density: leapfrog HMC, discontinuous
//! HMC with mixed Gaussian/Laplace momentum, and single-site
//! Metropolis-within-Gibbs, plus a chain driver.
//!
//! Randomness: a chain with seed `s` and index `c` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `c`. [`run_chain`] uses
//! stream 0.

mod config;
mod integrator;
mod kernels;
mod output;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::density::{DensityError, PiecewiseDensity};
use crate::graph::PredId;

pub use config::{Engine, SamplerConfig, UnknownEngine};
pub use integrator::{hamiltonian, integrate, CoordEvent, Trajectory};
pub use kernels::{dhmc_step, dhmc_step_observed, hmc_step, mwg_step};
pub use output::{read_csv, read_jsonl, write_csv, write_jsonl, CsvTable};

pub const MAX_INIT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("no initial state with finite log density after {0} prior draws")]
    InitializationFailed(usize),
    #[error("log density at the current state is not finite")]
    NonFiniteStart,
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// Per-step record.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeta {
    pub accepted: bool,
    /// Log density of the state after the step.
    pub log_density: f64,
    /// Predicates on a different side at the end of the step than at its start.
    pub flips: Vec<PredId>,
    /// Crossing events seen by the boundary monitor during the step,
    /// including those of rejected proposals.
    pub crossings: usize,
    /// `H(end) - H(start)` of the proposal; zero for Metropolis-within-Gibbs.
    pub energy_error: f64,
    pub density_evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    pub engine: Engine,
    pub coords: Vec<String>,
    /// One row per kept step, columns in coordinate order.
    pub samples: Vec<Vec<f64>>,
    pub meta: Vec<StepMeta>,
    /// Evaluations spent on initialization, burn-in and kept steps.
    pub density_evals: u64,
}

impl ChainResult {
    pub fn column(&self, c: usize) -> Vec<f64> {
        self.samples.iter().map(|r| r[c]).collect()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.meta.iter().filter(|m| m.accepted).count() as f64 / self.meta.len().max(1) as f64
    }
}

pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// Draw from the priors until the log density is finite.
pub fn initial_state<R: rand::Rng + ?Sized>(
    pd: &PiecewiseDensity,
    rng: &mut R,
) -> Result<(Vec<f64>, u64), SamplerError> {
    for attempt in 1..=MAX_INIT_ATTEMPTS {
        if let Some(x) = pd.ancestral_sample(rng) {
            if pd.log_density(&x).map(f64::is_finite).unwrap_or(false) {
                return Ok((x, attempt as u64));
            }
        }
    }
    Err(SamplerError::InitializationFailed(MAX_INIT_ATTEMPTS))
}

pub fn run_chain(pd: &PiecewiseDensity, cfg: &SamplerConfig) -> Result<ChainResult, SamplerError> {
    run_chain_indexed(pd, cfg, 0)
}

pub fn run_chain_indexed(
    pd: &PiecewiseDensity,
    cfg: &SamplerConfig,
    chain: u64,
) -> Result<ChainResult, SamplerError> {
    cfg.validate(pd.dim())?;
    let mut rng = chain_rng(cfg.seed, chain);
    let mut result = ChainResult {
        engine: cfg.engine,
        coords: pd.coords().to_vec(),
        samples: Vec::with_capacity(cfg.num_samples),
        meta: Vec::with_capacity(cfg.num_samples),
        density_evals: 0,
    };
    if cfg.num_samples == 0 {
        return Ok(result);
    }
    let (mut x, evals) = initial_state(pd, &mut rng)?;
    result.density_evals += evals;
    for i in 0..cfg.burn_in + cfg.num_samples {
        let (next, meta) = match cfg.engine {
            Engine::Hmc => hmc_step(pd, &x, cfg, &mut rng)?,
            Engine::Dhmc => dhmc_step(pd, &x, cfg, &mut rng)?,
            Engine::Mwg => mwg_step(pd, &x, cfg, &mut rng)?,
        };
        result.density_evals += meta.density_evals;
        x = next;
        if i >= cfg.burn_in {
            result.samples.push(x.clone());
            result.meta.push(meta);
        }
    }
    Ok(result)
}

/// Independent chains `0..n` in parallel.
pub fn run_chains(
    pd: &PiecewiseDensity,
    cfg: &SamplerConfig,
    n: usize,
) -> Result<Vec<ChainResult>, SamplerError> {
    (0..n as u64)
        .into_par_iter()
        .map(|c| run_chain_indexed(pd, cfg, c))
        .collect()
}
