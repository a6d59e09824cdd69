//! Synthetic generators: reproducibility, noise and the planted signal.

use tricluster::analysis::mi_pair_time;
use tricluster::data::Delimiter;
use tricluster::synthgen::{generate, recovery_score, GeneratorConfig, GeneratorMode};
use tricluster::Triclustering;

fn bytes(config: &GeneratorConfig) -> Vec<u8> {
    let g = generate(config).unwrap();
    let mut out = Vec::new();
    g.edges.write(&mut out, Delimiter::Comma).unwrap();
    out
}

#[test]
fn same_seed_same_bytes() {
    for mode in [GeneratorMode::Temporal, GeneratorMode::Shuffled, GeneratorMode::ErdosRenyi] {
        for noise in [0.0, 0.3] {
            let config = GeneratorConfig { m: 2000, seed: 42, mode, noise_fraction: noise, ..Default::default() };
            assert_eq!(bytes(&config), bytes(&config));
            let other = GeneratorConfig { seed: 43, ..config.clone() };
            assert_ne!(bytes(&config), bytes(&other));
        }
    }
}

#[test]
fn shuffling_keeps_the_pairs_and_the_truth() {
    let base = GeneratorConfig { m: 3000, seed: 5, ..Default::default() };
    let temporal = generate(&base).unwrap();
    let shuffled = generate(&GeneratorConfig { mode: GeneratorMode::Shuffled, ..base }).unwrap();
    assert_eq!(temporal.truth, shuffled.truth);
    assert_eq!(temporal.edges.out_degrees(), shuffled.edges.out_degrees());
    assert_eq!(temporal.edges.in_degrees(), shuffled.edges.in_degrees());
    assert_ne!(temporal.edges.time_ranks(), shuffled.edges.time_ranks());
}

#[test]
fn planted_pattern_moves_to_the_diagonal_over_time() {
    // Count the data with the planted partitions and two time halves:
    // same-cluster pairs are over-represented late and under-represented
    // early.
    let g = generate(&GeneratorConfig { m: 1 << 14, seed: 8, ..Default::default() }).unwrap();
    let m = g.edges.m() as u32;
    let model = Triclustering::compute_counts(&g.edges, g.truth.source.clone(), g.truth.destination.clone(), vec![0, m / 4, 3 * m / 4, m]).unwrap();
    let c = mi_pair_time(&model);
    for i in 0..5 {
        assert!(c.get(i, i, 0) < 0.0, "early diagonal ({i},{i})");
        assert!(c.get(i, i, 2) > 0.0, "late diagonal ({i},{i})");
    }
}

#[test]
fn erdos_renyi_truth_is_a_single_cluster() {
    let g = generate(&GeneratorConfig { m: 500, mode: GeneratorMode::ErdosRenyi, ..Default::default() }).unwrap();
    assert!(g.truth.source.iter().chain(&g.truth.destination).all(|&c| c == 0));
}

#[test]
fn recovery_score_examples() {
    assert_eq!(recovery_score(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
    assert!(recovery_score(&[0, 1, 0, 1], &[0, 0, 1, 1]).unwrap() < 0.0 + 1e-12);
    assert!(recovery_score(&[0, 1], &[0]).is_err());
}
