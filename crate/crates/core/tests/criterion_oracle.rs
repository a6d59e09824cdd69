//! The cost against independent exact-arithmetic oracles.

mod common;

use num_bigint::BigUint;
use num_traits::One;

use tricluster::combinatorics::{log_binomial, log_factorial, log_sum_stirling};
use tricluster::criterion::{cost, null_cost};
use tricluster::synthgen::{generate, worked_example_model, GeneratorConfig};
use tricluster::Triclustering;

#[test]
fn bell_numbers_match_enumeration() {
    for n in 1..=12usize {
        let enumerated = common::count_set_partitions(n);
        let listed = common::set_partitions(n).len() as u64;
        assert_eq!(enumerated, listed);
        let expected = (enumerated as f64).ln();
        let got = log_sum_stirling(n as u64, n as u64).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected.max(1.0), "n = {n}: {got} vs {expected}");
    }
    // The published values of the first Bell numbers.
    let bell = [1u64, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597];
    for (n, &b) in bell.iter().enumerate() {
        assert_eq!(common::count_set_partitions(n + 1), b);
    }
}

#[test]
fn partial_stirling_sums_match_exact_values() {
    for n in 1..=40u64 {
        for k in 1..=n {
            let exact = common::big_ln(&common::stirling_sum(n, k));
            let got = log_sum_stirling(n, k).unwrap();
            assert!((got - exact).abs() <= 1e-11 * exact.max(1.0), "B({n}, {k})");
        }
    }
}

#[test]
fn log_factorials_and_binomials_match_big_integers() {
    for n in [0u64, 1, 2, 10, 170, 1000, 1023, 1024, 1025, 5000, 20000] {
        let exact = if n < 2 { 0.0 } else { common::big_ln(&common::factorial(n)) };
        assert!((log_factorial(n) - exact).abs() <= 1e-12 * exact.max(1.0), "ln {n}!");
    }
    for (n, k) in [(10u64, 3u64), (200, 100), (3000, 7), (40000, 20000)] {
        let exact = common::big_ln(&common::binomial(n, k));
        assert!((log_binomial(n, k).unwrap() - exact).abs() <= 1e-11 * exact.max(1.0));
    }
    assert_eq!(common::binomial(5, 5), BigUint::one());
}

#[test]
fn worked_example_cost_matches_oracle() {
    let model = worked_example_model();
    let c = cost(&model).unwrap();
    let exact = common::exact_cost(&model);
    assert!((c.total - exact).abs() <= 1e-9 * exact);
    let sum: f64 = c.terms().iter().map(|t| t.1).sum();
    assert!((sum - c.total).abs() < 1e-9);
}

#[test]
fn null_closed_form_matches_general_cost() {
    for seed in 0..5 {
        let data = generate(&GeneratorConfig { m: 500 + 300 * seed as usize, seed, ..Default::default() }).unwrap();
        let null = Triclustering::null_model(&data.edges);
        let general = cost(&null).unwrap().total;
        let closed = null_cost(&null).total;
        let exact = common::exact_cost(&null);
        assert!((general - closed).abs() <= 1e-9 * exact);
        assert!((general - exact).abs() <= 1e-9 * exact);
    }
}
