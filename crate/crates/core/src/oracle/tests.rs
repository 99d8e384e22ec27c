use super::*;
use crate::frontend::{parse_checked, Constants};
use crate::graph::compile;

#[test]
fn default_spec_enumeration() {
    let post = gmm_exact(&GmmSpec::default()).unwrap();
    assert_eq!(post.num_assignments(), 1024);
    assert!((post.weight_sum() - 1.0).abs() < 1e-12);
    assert_eq!(post.mean_of(0), post.mean_of(1));
    assert!(post.variances.iter().all(|v| *v > 0.0));
    // Independent grid quadrature of the two-dimensional marginal posterior.
    assert!((post.expected_max() - 2.039805346207).abs() < 1e-8);
    assert!((post.expected_min() + 1.944765860323).abs() < 1e-8);
    assert!((post.mean_of(0) - 0.047519742942).abs() < 1e-8);
}

#[test]
fn single_point_single_cluster() {
    let spec = GmmSpec {
        k: 1,
        sigma_obs: vec![1.0],
        p0: vec![1.0],
        data: vec![1.0],
        ..GmmSpec::default()
    };
    let post = gmm_exact(&spec).unwrap();
    assert_eq!(post.num_assignments(), 1);
    assert!((post.means[0] - 0.8).abs() < 1e-15);
    assert!((post.variances[0] - 0.8).abs() < 1e-15);
    assert_eq!(post.expected_max(), post.means[0]);
}

#[test]
fn label_swap_is_bit_identical() {
    let spec = GmmSpec {
        sigma_obs: vec![1.0, 1.5],
        p0: vec![0.3, 0.7],
        ..GmmSpec::default()
    };
    let swapped = GmmSpec {
        sigma_obs: vec![1.5, 1.0],
        p0: vec![0.7, 0.3],
        ..spec.clone()
    };
    let (a, b) = (gmm_exact(&spec).unwrap(), gmm_exact(&swapped).unwrap());
    assert_eq!(a.expected_max().to_bits(), b.expected_max().to_bits());
    assert_eq!(a.expected_min().to_bits(), b.expected_min().to_bits());
    assert_eq!(a.predictive_mean().to_bits(), b.predictive_mean().to_bits());
}

#[test]
fn three_cluster_quadrature() {
    let spec = GmmSpec {
        k: 3,
        sigma_obs: vec![1.0; 3],
        p0: vec![0.2, 0.3, 0.5],
        data: vec![-1.0, 0.5, 2.0, 2.5],
        ..GmmSpec::default()
    };
    let post = gmm_exact(&spec).unwrap();
    assert_eq!(post.num_assignments(), 81);
    assert!((post.weight_sum() - 1.0).abs() < 1e-12);
    let e = post.expected_max();
    assert!(e > post.expected_min());
    let one = GmmSpec {
        k: 3,
        sigma_obs: vec![1.0; 3],
        p0: vec![0.2, 0.3, 0.5],
        data: vec![],
        ..GmmSpec::default()
    };
    // With no data the means are i.i.d. N(0, 2²), and the expected maximum
    // of three standard normals is 0.846284375321634.
    let prior = gmm_exact(&one).unwrap();
    assert!((prior.expected_max() - 2.0 * 0.846284375321634).abs() < 1e-7);
}

#[test]
fn limits_and_validation() {
    let big = GmmSpec {
        data: vec![0.0; 24],
        ..GmmSpec::default()
    };
    assert!(matches!(gmm_exact(&big), Err(OracleError::TooLarge(_))));
    let bad = GmmSpec {
        p0: vec![0.5, 0.6],
        ..GmmSpec::default()
    };
    assert!(matches!(gmm_exact(&bad), Err(OracleError::InvalidSpec(_))));
}

#[test]
fn generated_source_is_recognized() {
    for spec in [
        GmmSpec::default(),
        GmmSpec {
            k: 3,
            sigma_obs: vec![1.0, 0.5, 2.0],
            p0: vec![0.25, 0.25, 0.5],
            data: vec![1.0, -1.0],
            ..GmmSpec::default()
        },
    ] {
        let src = gmm_source(&spec);
        let model = compile(&parse_checked(&src, &Constants::new()).unwrap()).unwrap();
        let layout = recognize_gmm(&model).unwrap();
        assert_eq!(layout.spec, spec);
        assert_eq!(layout.mean_coords.len(), spec.k);
    }
}

#[test]
fn other_models_are_not_recognized() {
    for src in [
        "(let [x (sample (uniform 0 1))] (if (< x 0.3) (observe (normal 0 1) 0.2) (observe (normal 1 1) 0.2)))",
        "(sample (normal 0 1))",
        "(let [m (sample (normal 0 1))] (let [u (sample (uniform 0 1))] (if (< u 0.5) (observe (normal m 1) 1) 0)))",
    ] {
        let model = compile(&parse_checked(src, &Constants::new()).unwrap()).unwrap();
        assert_eq!(recognize_gmm(&model), None, "{src}");
    }
}

#[test]
fn trace_of_constant_chain_is_zero() {
    let grid = log_grid(1000, 10, 20);
    assert_eq!(*grid.first().unwrap(), 10);
    assert_eq!(*grid.last().unwrap(), 1000);
    let t = mse_trace(&vec![1.25; 1000], 1.25, &grid);
    assert!(t.iter().all(|&(_, e)| e == 0.0));
    let bands = aggregate_traces(std::slice::from_ref(&t));
    assert!(bands
        .iter()
        .zip(&t)
        .all(|(b, p)| b.median == p.1 && b.q20 == p.1 && b.q80 == p.1));
}

#[test]
fn functional_names() {
    for f in [
        Functional::MinMean,
        Functional::MaxMean,
        Functional::PredictiveMean,
    ] {
        assert_eq!(f.as_str().parse::<Functional>().unwrap(), f);
    }
    assert!("mean".parse::<Functional>().is_err());
    assert_eq!(Functional::MaxMean.at(&[1.0, 3.0], &[0.5, 0.5]), 3.0);
    assert_eq!(Functional::PredictiveMean.at(&[1.0, 3.0], &[0.5, 0.5]), 2.0);
}
