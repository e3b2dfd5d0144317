use kmetric_cli::formats::{
    chain_to_file, chains_to_file, cloud_to_file, complex_to_file, metric_to_file, parse_chain, parse_chain_matrix,
    parse_cloud, parse_complex, parse_metric, parse_metric_or_chains, to_json, MetricOrChains,
};
use kmetric_core::corpus::random_hypertree;
use kmetric_core::simplex::{binomial, Combinations};
use kmetric_core::{Chain, ChainMatrix, KMetric, PointCloud, SimplexKey, WeightedComplex};
use proptest::prelude::*;

/// Finite doubles across many binades, including awkward decimals.
fn float() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.1 + 0.2),
        Just(f64::MIN_POSITIVE),
        Just(-0.0),
    ]
}

fn metric() -> impl Strategy<Value = KMetric> {
    (2usize..=6, 2usize..=4).prop_filter("k ≤ n", |(n, k)| k <= n).prop_flat_map(|(n, k)| {
        proptest::collection::vec(float().prop_map(f64::abs), binomial(n, k) as usize)
            .prop_map(move |v| KMetric::new(n, k, v).unwrap())
    })
}

fn chain_matrix() -> impl Strategy<Value = ChainMatrix> {
    (2usize..=6, 2usize..=4, 0usize..=3).prop_filter("k ≤ n", |(n, k, _)| k <= n).prop_flat_map(|(n, k, m)| {
        proptest::collection::vec(float(), binomial(n, k - 1) as usize * m)
            .prop_map(move |v| ChainMatrix::from_row_major(n, k, m, &v).unwrap())
    })
}

fn cloud() -> impl Strategy<Value = PointCloud> {
    (1usize..=4, 1usize..=7).prop_flat_map(|(m, n)| {
        proptest::collection::vec(proptest::collection::vec(float(), m), n)
            .prop_map(move |p| PointCloud::new(m, p).unwrap())
    })
}

fn complex() -> impl Strategy<Value = WeightedComplex> {
    (3usize..=6, 2usize..=3, proptest::collection::vec((any::<bool>(), 1e-6f64..1e6), 20)).prop_map(|(n, k, picks)| {
        let facets = Combinations::new(n, k)
            .zip(picks.iter().cycle())
            .filter(|(_, (keep, _))| *keep)
            .map(|(s, (_, w))| (SimplexKey::new(s, n).unwrap(), *w))
            .collect();
        WeightedComplex::new(n, k, facets).unwrap()
    })
}

fn chain() -> impl Strategy<Value = Chain> {
    (1usize..=6, 0usize..=3).prop_filter("dim < n", |(n, d)| d < n).prop_flat_map(|(n, dim)| {
        proptest::collection::vec(float(), binomial(n, dim + 1) as usize).prop_map(move |c| Chain::new(n, dim, c).unwrap())
    })
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

proptest! {
    #[test]
    fn metrics_round_trip(d in metric()) {
        let back = parse_metric(&to_json(&metric_to_file(&d))).unwrap();
        prop_assert_eq!(back.n(), d.n());
        prop_assert_eq!(back.k(), d.k());
        prop_assert!(same_bits(back.values(), d.values()));
    }

    #[test]
    fn chain_matrices_round_trip(f in chain_matrix()) {
        let back = parse_chain_matrix(&to_json(&chains_to_file(&f))).unwrap();
        prop_assert_eq!((back.n(), back.k(), back.m()), (f.n(), f.k(), f.m()));
        prop_assert!(same_bits(back.data().as_slice(), f.data().as_slice()));
    }

    #[test]
    fn clouds_round_trip(c in cloud()) {
        let back = parse_cloud(&to_json(&cloud_to_file(&c))).unwrap();
        prop_assert_eq!(back.m(), c.m());
        for (p, q) in back.points().iter().zip(c.points()) {
            prop_assert!(same_bits(p, q));
        }
    }

    #[test]
    fn complexes_round_trip(c in complex()) {
        prop_assert_eq!(parse_complex(&to_json(&complex_to_file(&c))).unwrap(), c);
    }

    #[test]
    fn chains_round_trip(c in chain()) {
        let back = parse_chain(&to_json(&chain_to_file(&c))).unwrap();
        prop_assert_eq!(back.dim(), c.dim());
        prop_assert!(same_bits(back.coeffs(), c.coeffs()));
    }

    #[test]
    fn apex_inputs_are_told_apart(d in metric(), f in chain_matrix()) {
        prop_assert_eq!(parse_metric_or_chains(&to_json(&metric_to_file(&d))).unwrap(), MetricOrChains::Metric(d));
        prop_assert_eq!(parse_metric_or_chains(&to_json(&chains_to_file(&f))).unwrap(), MetricOrChains::Chains(f));
    }
}

#[test]
fn generated_hypertrees_round_trip() {
    for seed in 0..5 {
        let c = random_hypertree(5, 3, seed).unwrap();
        assert_eq!(parse_complex(&to_json(&complex_to_file(&c))).unwrap(), c);
    }
}
