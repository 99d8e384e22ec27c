//! The mixed leapfrog / coordinate-wise integrator.
//!
//! Continuous coordinates carry Gaussian momentum (kinetic `p²/2m`) and move
//! by leapfrog. Discontinuous coordinates carry Laplace momentum (kinetic
//! `|p|/m`) and move one at a time by `ε·sign(p)/m`: a move is kept if the
//! kinetic energy can pay for the rise in potential, otherwise the momentum
//! is reflected. With no discontinuous coordinates a step is exactly one
//! leapfrog step.

use crate::density::PiecewiseDensity;
use crate::graph::PredId;
use crate::monitor::{detect_crossing, snapshot, xor_crossings, PredicateSnapshot};

/// One discontinuous-coordinate update, as reported to an observer.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordEvent {
    pub step: usize,
    pub coord: usize,
    pub x_before: f64,
    /// Position tried; equal to `x_after` when committed.
    pub x_proposed: f64,
    pub x_after: f64,
    pub p_before: f64,
    pub p_after: f64,
    /// `U(proposed) - U(before)`.
    pub delta_u: f64,
    pub committed: bool,
    /// Predicates the monitor saw flip across this update.
    pub flips: Vec<PredId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub start_log_density: f64,
    pub log_density: f64,
    /// The trajectory left the support; the proposal must be rejected.
    pub diverged: bool,
    pub crossings: usize,
    /// Crossings composed over the whole trajectory.
    pub flips: Vec<PredId>,
    pub density_evals: u64,
}

/// Total energy: potential plus Gaussian kinetic energy on continuous
/// coordinates and Laplace kinetic energy on `disc`.
pub fn hamiltonian(log_density: f64, p: &[f64], mass: &[f64], disc: &[usize]) -> f64 {
    let mut k = 0.0;
    for (i, (&pi, &mi)) in p.iter().zip(mass).enumerate() {
        if disc.contains(&i) {
            k += pi.abs() / mi;
        } else {
            k += pi * pi / (2.0 * mi);
        }
    }
    -log_density + k
}

struct Monitor<'a> {
    pd: &'a PiecewiseDensity,
    last: PredicateSnapshot,
    crossings: usize,
    flips: Vec<PredId>,
}

impl<'a> Monitor<'a> {
    fn new(pd: &'a PiecewiseDensity, x: &[f64]) -> Self {
        Monitor {
            pd,
            last: snapshot(pd, x),
            crossings: 0,
            flips: Vec::new(),
        }
    }

    fn check(&mut self, x: &[f64]) -> Vec<PredId> {
        if self.pd.num_predicates() == 0 {
            return Vec::new();
        }
        let now = snapshot(self.pd, x);
        let d = detect_crossing(&self.last, &now).expect("snapshots of one density");
        if !d.is_empty() {
            self.crossings += d.len();
            self.flips = xor_crossings(&self.flips, &d);
            self.last = now;
        }
        d
    }
}

struct Counter<'a> {
    pd: &'a PiecewiseDensity,
    evals: u64,
}

impl Counter<'_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        self.pd.log_density(x).unwrap_or(f64::NEG_INFINITY)
    }

    fn value_and_grad(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.evals += 1;
        match self.pd.value_and_grad(x, grad) {
            Ok(v) => v,
            Err(_) => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                f64::NEG_INFINITY
            }
        }
    }
}

/// Run `steps` integrator steps of size `eps` from `(x0, p0)`.
///
/// `order(step, disc)` gives the visiting order of the discontinuous
/// coordinates for each step; `observer` sees every discontinuous update.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    pd: &PiecewiseDensity,
    x0: &[f64],
    p0: &[f64],
    disc: &[usize],
    mass: &[f64],
    eps: f64,
    steps: usize,
    order: &mut dyn FnMut(usize, &[usize]) -> Vec<usize>,
    observer: &mut dyn FnMut(&CoordEvent),
) -> Trajectory {
    let dim = x0.len();
    let cont: Vec<usize> = (0..dim).filter(|i| !disc.contains(i)).collect();
    let mut f = Counter { pd, evals: 0 };
    let mut x = x0.to_vec();
    let mut p = p0.to_vec();
    let mut grad = vec![0.0; dim];
    let start = f.value_and_grad(&x, &mut grad);
    let mut lp = start;
    let mut mon = Monitor::new(pd, &x);
    let mut diverged = !start.is_finite();

    for step in 0..steps {
        if diverged {
            break;
        }
        if disc.is_empty() {
            for &c in &cont {
                p[c] += 0.5 * eps * grad[c];
            }
            for &c in &cont {
                x[c] += eps * p[c] / mass[c];
            }
            lp = f.value_and_grad(&x, &mut grad);
            if lp == f64::NEG_INFINITY {
                diverged = true;
                break;
            }
            for &c in &cont {
                p[c] += 0.5 * eps * grad[c];
            }
            mon.check(&x);
            continue;
        }

        if !cont.is_empty() {
            for &c in &cont {
                p[c] += 0.5 * eps * grad[c];
            }
            for &c in &cont {
                x[c] += 0.5 * eps * p[c] / mass[c];
            }
            lp = f.value(&x);
            if lp == f64::NEG_INFINITY {
                diverged = true;
                break;
            }
            mon.check(&x);
        }

        for j in order(step, disc) {
            let x_before = x[j];
            let p_before = p[j];
            let sign = if p_before < 0.0 { -1.0 } else { 1.0 };
            let x_proposed = x_before + eps * sign / mass[j];
            x[j] = x_proposed;
            let lp_new = f.value(&x);
            let delta_u = lp - lp_new;
            let committed = p_before.abs() / mass[j] > delta_u;
            if committed {
                lp = lp_new;
                p[j] = sign * (p_before.abs() - mass[j] * delta_u);
            } else {
                x[j] = x_before;
                p[j] = -p_before;
            }
            let flips = mon.check(&x);
            observer(&CoordEvent {
                step,
                coord: j,
                x_before,
                x_proposed,
                x_after: x[j],
                p_before,
                p_after: p[j],
                delta_u,
                committed,
                flips,
            });
        }

        if !cont.is_empty() {
            for &c in &cont {
                x[c] += 0.5 * eps * p[c] / mass[c];
            }
            lp = f.value_and_grad(&x, &mut grad);
            if lp == f64::NEG_INFINITY {
                diverged = true;
                break;
            }
            for &c in &cont {
                p[c] += 0.5 * eps * grad[c];
            }
            mon.check(&x);
        }
    }

    Trajectory {
        x,
        p,
        start_log_density: start,
        log_density: lp,
        diverged,
        crossings: mon.crossings,
        flips: mon.flips,
        density_evals: f.evals,
    }
}
