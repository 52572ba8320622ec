use novelty_harness::distributions::{sample, sample_tier, DifficultyTier, DistributionSpec, TieredSpec};
use novelty_harness::rng::RngState;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    -1e6f64..1e6
}

fn valid_spec() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        finite().prop_map(DistributionSpec::constant),
        (finite(), 1e-3f64..1e3).prop_map(|(m, s)| DistributionSpec::normal(m, s)),
        (finite(), 0f64..1e3).prop_map(|(lo, w)| DistributionSpec::uniform(lo, lo + w)),
        prop::collection::vec(finite(), 1..8).prop_map(|values| DistributionSpec::DiscreteUniform { values }),
        (0f64..=1.0).prop_map(|p| DistributionSpec::Bernoulli { p }),
        (1e-3f64..200.0).prop_map(|lambda| DistributionSpec::Poisson { lambda }),
    ]
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

proptest! {
    #[test]
    fn samples_stay_in_support(spec in valid_spec(), seed: u64) {
        let mut rng = RngState::from_seed(seed);
        for _ in 0..32 {
            let x = sample(&spec, &mut rng).unwrap();
            prop_assert!(x.is_finite());
            match &spec {
                DistributionSpec::Constant { value } => prop_assert_eq!(x, *value),
                DistributionSpec::Uniform { lo, hi } if lo == hi => prop_assert_eq!(x, *lo),
                DistributionSpec::Uniform { lo, hi } => prop_assert!(*lo <= x && x < *hi),
                DistributionSpec::DiscreteUniform { values } => prop_assert!(values.contains(&x)),
                DistributionSpec::Bernoulli { .. } => prop_assert!(x == 0.0 || x == 1.0),
                DistributionSpec::Poisson { .. } => prop_assert!(x >= 0.0 && x.fract() == 0.0),
                DistributionSpec::Normal { .. } => {}
            }
        }
    }

    #[test]
    fn same_seed_same_stream(spec in valid_spec(), seed: u64) {
        let (mut a, mut b) = (RngState::from_seed(seed), RngState::from_seed(seed));
        for _ in 0..16 {
            prop_assert_eq!(sample(&spec, &mut a).unwrap().to_bits(), sample(&spec, &mut b).unwrap().to_bits());
        }
    }

    #[test]
    fn json_round_trip(spec in valid_spec()) {
        let text = serde_json::to_string(&spec).unwrap();
        prop_assert_eq!(serde_json::from_str::<DistributionSpec>(&text).unwrap(), spec);
    }

    #[test]
    fn invalid_spec_leaves_stream_untouched(std in -10f64..=0.0, lo in finite(), gap in 1e-6f64..10.0, seed: u64) {
        for bad in [
            DistributionSpec::normal(0.0, std),
            DistributionSpec::uniform(lo + gap, lo),
            DistributionSpec::Poisson { lambda: std },
            DistributionSpec::DiscreteUniform { values: vec![] },
        ] {
            let mut rng = RngState::from_seed(seed);
            prop_assert!(sample(&bad, &mut rng).is_err());
            prop_assert_eq!(rng.next_u64(), RngState::from_seed(seed).next_u64());
        }
    }

    #[test]
    fn derived_streams_are_reproducible(seed: u64, label in "[a-z0-9/-]{1,20}") {
        let parent = RngState::from_seed(seed);
        prop_assert_eq!(parent.derive(&label).seed(), parent.derive(&label).seed());
        prop_assert_ne!(parent.derive(&label).seed(), parent.derive(&format!("{label}x")).seed());
    }
}

#[test]
fn poisson_moments_both_branches() {
    let mut rng = RngState::from_seed(3);
    for lambda in [0.5, 4.0, 29.0, 45.0, 400.0] {
        let spec = DistributionSpec::Poisson { lambda };
        let xs: Vec<f64> = (0..40_000).map(|_| sample(&spec, &mut rng).unwrap()).collect();
        let (mean, var) = moments(&xs);
        let se = (lambda / xs.len() as f64).sqrt();
        assert!((mean - lambda).abs() < 5.0 * se, "lambda {lambda}: mean {mean}");
        assert!((var / lambda - 1.0).abs() < 0.05, "lambda {lambda}: var {var}");
    }
}

#[test]
fn uniform_and_bernoulli_moments() {
    let mut rng = RngState::from_seed(4);
    let xs: Vec<f64> = (0..50_000).map(|_| sample(&DistributionSpec::uniform(2.0, 8.0), &mut rng).unwrap()).collect();
    let (mean, var) = moments(&xs);
    assert!((mean - 5.0).abs() < 0.05);
    assert!((var - 3.0).abs() < 0.06);
    let hits: f64 = (0..50_000).map(|_| sample(&DistributionSpec::Bernoulli { p: 0.3 }, &mut rng).unwrap()).sum();
    assert!((hits / 50_000.0 - 0.3).abs() < 0.01);
}

#[test]
fn tiers_are_ordered_by_difficulty() {
    let tiered = TieredSpec::missile_range();
    let mut rng = RngState::from_seed(5);
    let means: Vec<f64> = DifficultyTier::ALL
        .iter()
        .map(|&t| (0..20_000).map(|_| sample_tier(&tiered, t, &mut rng).unwrap()).sum::<f64>() / 20_000.0)
        .collect();
    assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
}
