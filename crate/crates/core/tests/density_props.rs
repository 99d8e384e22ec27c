mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sppl::density::DensityError;
use sppl::graph::CoordClass;

#[test]
fn one_region_per_state() {
    for m in test_models() {
        let masks = region_masks(&m.pd);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20_000 {
            let x = (m.draw)(&mut rng);
            let s = bits(&(m.signs)(&x));
            assert_eq!(matching_regions(&masks, s), 1, "{}: {x:?}", m.name);
            // The region the density picks is that one.
            let r = m.pd.active_region(&x).unwrap();
            assert!(r.contains(&m.pd.predicate_values(&x)), "{}", m.name);
        }
    }
}

#[test]
fn threshold_program_latent_normalizes() {
    let pd = density_with(THRESHOLD_PROGRAM_LATENT, &[("q", 0.3)]);
    // Midpoint rule on [0, 1] x [-8, 8].
    let (nx, ny) = (400, 1600);
    let (hx, hy) = (1.0 / nx as f64, 16.0 / ny as f64);
    let mut total = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            let x = [(i as f64 + 0.5) * hx, -8.0 + (j as f64 + 0.5) * hy];
            total += pd.log_density(&x).unwrap().exp() * hx * hy;
        }
    }
    assert!((total - 1.0).abs() < 1e-3, "{total}");
}

#[test]
fn continuous_coordinates_have_no_jumps() {
    for m in test_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cont: Vec<usize> = (0..m.pd.dim())
            .filter(|&i| m.pd.classes()[i] == CoordClass::Continuous)
            .collect();
        let mut checked = 0;
        while checked < 1000 && !cont.is_empty() {
            let x = (m.draw)(&mut rng);
            let f0 = m.pd.log_density(&x).unwrap();
            if !f0.is_finite() {
                continue;
            }
            let c = cont[rng.random_range(0..cont.len())];
            let g = m.pd.grad_log_density(&x, &[c]).unwrap()[0];
            let h = 1e-7;
            let mut y = x.clone();
            y[c] += h;
            let f1 = m.pd.log_density(&y).unwrap();
            assert!(
                (f1 - f0).abs() <= 10.0 * h * (1.0 + g.abs()),
                "{} coord {c}: {f0} -> {f1}",
                m.name
            );
            checked += 1;
        }
    }
}

fn boundary_distance(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min)
}

#[test]
fn gradients_match_differences_on_random_programs() {
    let mut tested = 0;
    for seed in 0..200u64 {
        let src = ProgramGen::new(seed).program();
        let pd = density(&src);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let Some(x) = pd.ancestral_sample(&mut rng) else {
                continue;
            };
            let f0 = pd.log_density(&x).unwrap();
            if !f0.is_finite() || boundary_distance(&pd.predicate_values(&x)) < 1e-3 {
                continue;
            }
            let all: Vec<usize> = (0..pd.dim()).collect();
            let g = pd.grad_log_density(&x, &all).unwrap();
            for c in 0..pd.dim() {
                let h = 1e-6 * (1.0 + x[c].abs());
                let (mut a, mut b) = (x.clone(), x.clone());
                a[c] += h;
                b[c] -= h;
                let (fa, fb) = (pd.log_density(&a).unwrap(), pd.log_density(&b).unwrap());
                // Skip points where the step leaves the support or a region.
                if !fa.is_finite() || !fb.is_finite() {
                    continue;
                }
                let ra = pd.active_region(&a).unwrap();
                let rb = pd.active_region(&b).unwrap();
                if ra.key() != rb.key() {
                    continue;
                }
                let fd = (fa - fb) / (2.0 * h);
                let scale = 1.0 + g[c].abs() + f0.abs() * 1e-3;
                assert!(
                    (g[c] - fd).abs() < 1e-4 * scale,
                    "{src}\nx={x:?} c={c}: {} vs {fd}",
                    g[c]
                );
                tested += 1;
            }
        }
    }
    assert!(tested > 500, "{tested}");
}

#[test]
fn region_dump_lists_visited_regions() {
    let pd = density(THRESHOLD_PROGRAM);
    pd.log_density(&[0.1]).unwrap();
    let dump = pd.region_table_json();
    assert_eq!(dump.as_array().unwrap().len(), 1);
    assert_eq!(dump[0]["neg_guards"][0], "φ1");
    assert_eq!(pd.materialized_regions(), 1);
}

proptest! {
    #[test]
    fn threshold_program_density_is_the_branch_density(x in 0.0f64..1.0) {
        let pd = density(THRESHOLD_PROGRAM);
        let mu = if x < 0.3 { 0.0 } else { 1.0 };
        let want = -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * (0.2 - mu) * (0.2 - mu);
        prop_assert!((pd.log_density(&[x]).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn outside_support_has_no_gradient(x in 1.0f64..10.0) {
        let pd = density(THRESHOLD_PROGRAM);
        prop_assert_eq!(pd.log_density(&[x]).unwrap(), f64::NEG_INFINITY);
        prop_assert_eq!(pd.grad_log_density(&[x], &[0]), Err(DensityError::OutsideSupport));
    }
}
