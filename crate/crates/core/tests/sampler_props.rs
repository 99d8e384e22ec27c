mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use sppl::graph::PredId;
use sppl::monitor::{detect_crossing, snapshot, xor_crossings};
use sppl::oracle::{gmm_exact, recognize_gmm, Functional, GmmSpec};
use sppl::samplers::*;
use sppl::stats;

/// Posterior mass of `x < 0.5` for the step density below, from the closed
/// form `N(0; 0, 1) / (N(0; 0, 1) + N(0; 1, 1))`.
const STEP_PI_A: f64 = 0.622459331202;

const STEP: &str =
    "(let [x (sample (uniform 0 1))] (if (< x 0.5) (observe (normal 0 1) 0) (observe (normal 1 1) 0)))";

#[test]
fn two_region_flows_balance() {
    let pd = density(STEP);
    let cfg = SamplerConfig {
        step_size: 0.1,
        leapfrog_steps: 5,
        ..SamplerConfig::new(Engine::Dhmc)
    };
    let mut rng = chain_rng(17, 0);
    let mut x = vec![0.25];
    for _ in 0..1000 {
        x = dhmc_step(&pd, &x, &cfg, &mut rng).unwrap().0;
    }
    let (mut n_a, mut n_b, mut ab, mut ba) = (0u64, 0u64, 0u64, 0u64);
    for _ in 0..1_000_000 {
        let from_a = x[0] < 0.5;
        x = dhmc_step(&pd, &x, &cfg, &mut rng).unwrap().0;
        let to_a = x[0] < 0.5;
        match (from_a, to_a) {
            (true, false) => ab += 1,
            (false, true) => ba += 1,
            _ => {}
        }
        if from_a {
            n_a += 1
        } else {
            n_b += 1
        }
    }
    let (t_ab, t_ba) = (ab as f64 / n_a as f64, ba as f64 / n_b as f64);
    let lhs = STEP_PI_A * t_ab;
    let rhs = (1.0 - STEP_PI_A) * t_ba;
    let sd = (STEP_PI_A.powi(2) * t_ab * (1.0 - t_ab) / n_a as f64
        + (1.0 - STEP_PI_A).powi(2) * t_ba * (1.0 - t_ba) / n_b as f64)
        .sqrt();
    assert!((lhs - rhs).abs() < 3.0 * sd, "{lhs} vs {rhs} (sd {sd})");
    let frac_a = n_a as f64 / (n_a + n_b) as f64;
    assert!((frac_a - STEP_PI_A).abs() < 0.01, "{frac_a}");
}

#[test]
fn energy_error_is_second_order() {
    let pd = density("(let [a (sample (normal 0 1))] (sample (normal (* 0.5 a) 0.8)))");
    let mass = [1.0, 1.0];
    let mut errs = Vec::new();
    for (eps, steps) in [(0.2, 10), (0.1, 20), (0.05, 40)] {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut total = 0.0;
        for _ in 0..200 {
            let x: Vec<f64> = (0..2).map(|_| StandardNormal.sample(&mut rng)).collect();
            let p: Vec<f64> = (0..2).map(|_| StandardNormal.sample(&mut rng)).collect();
            let t = integrate(
                &pd,
                &x,
                &p,
                &[],
                &mass,
                eps,
                steps,
                &mut |_, d| d.to_vec(),
                &mut |_| {},
            );
            let dh = hamiltonian(t.log_density, &t.p, &mass, &[])
                - hamiltonian(t.start_log_density, &p, &mass, &[]);
            total += dh.abs();
        }
        errs.push(total / 200.0);
    }
    let slope = stats::ols_slope(
        &[0.2f64.ln(), 0.1f64.ln(), 0.05f64.ln()],
        &errs.iter().map(|e| e.ln()).collect::<Vec<_>>(),
    );
    assert!((slope - 2.0).abs() < 0.3, "slope {slope}, errors {errs:?}");
}

fn laplace_momentum(rng: &mut ChaCha8Rng, disc: &[usize], dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|i| {
            if disc.contains(&i) {
                let e: f64 = Exp1.sample(rng);
                if rng.random_bool(0.5) {
                    e
                } else {
                    -e
                }
            } else {
                StandardNormal.sample(rng)
            }
        })
        .collect()
}

#[test]
fn replay_with_reversed_orders_returns_home() {
    let pd = density(&gmm_test_source());
    let disc = pd.discontinuous_coords();
    let mass = vec![1.0; pd.dim()];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let x0 = initial_state(&pd, &mut rng).unwrap().0;
        let p0 = laplace_momentum(&mut rng, &disc, pd.dim());
        let mut orders: Vec<Vec<usize>> = Vec::new();
        let fwd = integrate(
            &pd,
            &x0,
            &p0,
            &disc,
            &mass,
            0.1,
            20,
            &mut |_, d| {
                let mut v = d.to_vec();
                rand::seq::SliceRandom::shuffle(v.as_mut_slice(), &mut rng);
                orders.push(v.clone());
                v
            },
            &mut |_| {},
        );
        assert!(!fwd.diverged);
        let back_p: Vec<f64> = fwd.p.iter().map(|p| -p).collect();
        let back = integrate(
            &pd,
            &fwd.x,
            &back_p,
            &disc,
            &mass,
            0.1,
            20,
            &mut |s, _| orders[orders.len() - 1 - s].iter().rev().copied().collect(),
            &mut |_| {},
        );
        let err = x0
            .iter()
            .zip(&back.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}

#[test]
fn reported_flips_compose_to_endpoint_crossings() {
    let pd = density(&gmm_test_source());
    let cfg = SamplerConfig::new(Engine::Dhmc);
    let mut rng = chain_rng(2, 0);
    let mut x = initial_state(&pd, &mut rng).unwrap().0;
    let mut accepted = 0;
    let mut nonempty = 0;
    for _ in 0..300 {
        let start = snapshot(&pd, &x);
        let mut composed: Vec<PredId> = Vec::new();
        let mut events = Vec::new();
        let (next, meta) = dhmc_step_observed(&pd, &x, &cfg, &mut rng, &mut |e| {
            composed = xor_crossings(&composed, &e.flips);
            events.push(e.clone());
        })
        .unwrap();
        let end_flips = detect_crossing(&start, &snapshot(&pd, &next)).unwrap();
        assert_eq!(meta.flips, end_flips);
        if meta.accepted {
            accepted += 1;
            assert_eq!(composed, end_flips);
            nonempty += usize::from(!end_flips.is_empty());
        }
        for e in &events {
            if e.committed {
                assert!((e.p_before.abs() - e.p_after.abs() - e.delta_u).abs() < 1e-12);
            }
        }
        x = next;
    }
    assert!(accepted > 250 && nonempty > 5, "{accepted} {nonempty}");
}

#[test]
fn threshold_program_selector_probabilities() {
    // With y latent, x keeps its uniform marginal.
    let pd = density_with(THRESHOLD_PROGRAM_LATENT, &[("q", 0.3)]);
    let cfg = SamplerConfig {
        num_samples: 50_000,
        burn_in: 1000,
        seed: 12,
        ..SamplerConfig::new(Engine::Dhmc)
    };
    let r = run_chain(&pd, &cfg).unwrap();
    let ind: Vec<f64> = r.column(0).iter().map(|&x| f64::from(x > 0.3)).collect();
    let (m, se) = (stats::mean(&ind), stats::mcse_mean(&ind));
    assert!((m - 0.7).abs() < 3.0 * se, "{m} ± {se}");

    // With y = 0.2 observed the posterior of x > 0.3 comes from a 1-D
    // integral of the unnormalized density. Here x is the only coordinate,
    // so the step size must vary or x never leaves its starting lattice.
    let pd = density(THRESHOLD_PROGRAM);
    let cfg = SamplerConfig {
        step_size_jitter: 0.5,
        ..cfg
    };
    let r = run_chain(&pd, &cfg).unwrap();
    let ind: Vec<f64> = r.column(0).iter().map(|&x| f64::from(x > 0.3)).collect();
    let (m, se) = (stats::mean(&ind), stats::mcse_mean(&ind));
    assert!((m - 0.633508447039).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn mwg_agrees_with_enumeration() {
    let model = model(&gmm_test_source());
    let layout = recognize_gmm(&model).unwrap();
    let truth = gmm_exact(&GmmSpec::default()).unwrap();
    let pd = sppl::density::build_density(&model).unwrap();
    let cfg = SamplerConfig {
        num_samples: 100_000,
        burn_in: 2000,
        seed: 99,
        ..SamplerConfig::new(Engine::Mwg)
    };
    let r = run_chain(&pd, &cfg).unwrap();
    let idx: Vec<usize> = layout
        .mean_coords
        .iter()
        .map(|n| pd.coord_index(n).unwrap())
        .collect();
    for f in [
        Functional::MaxMean,
        Functional::MinMean,
        Functional::PredictiveMean,
    ] {
        let vals: Vec<f64> = r
            .samples
            .iter()
            .map(|row| {
                f.at(
                    &idx.iter().map(|&i| row[i]).collect::<Vec<_>>(),
                    &layout.spec.p0,
                )
            })
            .collect();
        let (m, se) = (stats::mean(&vals), stats::mcse_mean(&vals));
        let t = f.truth(&truth);
        assert!((m - t).abs() < 3.0 * se, "{f}: {m} ± {se} vs {t}");
    }
}
