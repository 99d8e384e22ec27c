use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::integrator::{hamiltonian, integrate, CoordEvent};
use super::{SamplerConfig, SamplerError, StepMeta};
use crate::density::PiecewiseDensity;
use crate::monitor::{detect_crossing, snapshot};

fn check_state(pd: &PiecewiseDensity, x: &[f64]) -> Result<(), SamplerError> {
    if x.len() != pd.dim() {
        return Err(crate::density::DensityError::DimensionMismatch {
            expected: pd.dim(),
            got: x.len(),
        }
        .into());
    }
    Ok(())
}

fn momentum_step<R: Rng + ?Sized>(
    pd: &PiecewiseDensity,
    x: &[f64],
    cfg: &SamplerConfig,
    disc: &[usize],
    rng: &mut R,
    observer: &mut dyn FnMut(&CoordEvent),
) -> Result<(Vec<f64>, StepMeta), SamplerError> {
    check_state(pd, x)?;
    let mass = cfg.masses(pd.dim());
    let eps = if cfg.step_size_jitter > 0.0 {
        cfg.step_size * (1.0 - cfg.step_size_jitter * rng.random::<f64>())
    } else {
        cfg.step_size
    };
    let p0: Vec<f64> = (0..pd.dim())
        .map(|i| {
            if disc.contains(&i) {
                let e: f64 = Exp1.sample(rng);
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                s * mass[i] * e
            } else {
                let z: f64 = StandardNormal.sample(rng);
                z * mass[i].sqrt()
            }
        })
        .collect();

    let permute = cfg.permute_discontinuous;
    let mut order = |_: usize, d: &[usize]| {
        let mut v = d.to_vec();
        if permute {
            v.shuffle(rng);
        }
        v
    };
    let traj = integrate(
        pd,
        x,
        &p0,
        disc,
        &mass,
        eps,
        cfg.leapfrog_steps,
        &mut order,
        observer,
    );
    if !traj.start_log_density.is_finite() {
        return Err(SamplerError::NonFiniteStart);
    }
    let h0 = hamiltonian(traj.start_log_density, &p0, &mass, disc);
    let energy_error = if traj.diverged {
        f64::INFINITY
    } else {
        hamiltonian(traj.log_density, &traj.p, &mass, disc) - h0
    };
    let u: f64 = rng.random();
    let accepted = !traj.diverged && u.ln() < -energy_error;
    let meta = StepMeta {
        accepted,
        log_density: if accepted {
            traj.log_density
        } else {
            traj.start_log_density
        },
        flips: if accepted {
            traj.flips.clone()
        } else {
            Vec::new()
        },
        crossings: traj.crossings,
        energy_error,
        density_evals: traj.density_evals,
    };
    Ok((if accepted { traj.x } else { x.to_vec() }, meta))
}

/// One HMC transition: Gaussian momentum on every coordinate, `L` leapfrog
/// steps, Metropolis correction.
pub fn hmc_step<R: Rng + ?Sized>(
    pd: &PiecewiseDensity,
    x: &[f64],
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(Vec<f64>, StepMeta), SamplerError> {
    momentum_step(pd, x, cfg, &[], rng, &mut |_| {})
}

/// One discontinuous HMC transition using the density's coordinate classes.
pub fn dhmc_step<R: Rng + ?Sized>(
    pd: &PiecewiseDensity,
    x: &[f64],
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(Vec<f64>, StepMeta), SamplerError> {
    dhmc_step_observed(pd, x, cfg, rng, &mut |_| {})
}

/// [`dhmc_step`] reporting every discontinuous-coordinate update.
pub fn dhmc_step_observed<R: Rng + ?Sized>(
    pd: &PiecewiseDensity,
    x: &[f64],
    cfg: &SamplerConfig,
    rng: &mut R,
    observer: &mut dyn FnMut(&CoordEvent),
) -> Result<(Vec<f64>, StepMeta), SamplerError> {
    let disc = pd.discontinuous_coords();
    momentum_step(pd, x, cfg, &disc, rng, observer)
}

/// One Metropolis-within-Gibbs sweep in coordinate order. Coordinates with a
/// uniform prior get independent proposals from that prior; the rest get a
/// Gaussian random walk scaled by the configured mass.
pub fn mwg_step<R: Rng + ?Sized>(
    pd: &PiecewiseDensity,
    x: &[f64],
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(Vec<f64>, StepMeta), SamplerError> {
    check_state(pd, x)?;
    let scale = cfg.masses(pd.dim());
    let mut evals = 1;
    let mut lp = pd.log_density(x)?;
    if !lp.is_finite() {
        return Err(SamplerError::NonFiniteStart);
    }
    let start = snapshot(pd, x);
    let mut last = start.clone();
    let mut crossings = 0;
    let mut accepted = false;
    let mut x = x.to_vec();
    for i in 0..x.len() {
        let old = x[i];
        x[i] = match pd.uniform_prior_bounds(i, &x) {
            Some((a, b)) if a < b => {
                let v = a + (b - a) * rng.random::<f64>();
                if v < b {
                    v
                } else {
                    a
                }
            }
            _ => {
                let z: f64 = StandardNormal.sample(rng);
                old + scale[i] * z
            }
        };
        evals += 1;
        let lp_new = pd.log_density(&x).unwrap_or(f64::NEG_INFINITY);
        let u: f64 = rng.random();
        if u.ln() < lp_new - lp {
            lp = lp_new;
            accepted = true;
            let now = snapshot(pd, &x);
            crossings += detect_crossing(&last, &now).expect("same density").len();
            last = now;
        } else {
            x[i] = old;
        }
    }
    let meta = StepMeta {
        accepted,
        log_density: lp,
        flips: detect_crossing(&start, &last).expect("same density"),
        crossings,
        energy_error: 0.0,
        density_evals: evals,
    };
    Ok((x, meta))
}
