//! Randomized properties of the cost, the merge operations and the
//! mutual-information analysis.

use proptest::prelude::*;

use tricluster::analysis::{js_divergence, mi_pair_time, mi_source_dest, ClusterDistributions};
use tricluster::criterion::{cost, merge_delta};
use tricluster::data::{rank_transform, TemporalEdgeList};
use tricluster::model::canonical_labels;
use tricluster::{Axis, Triclustering};

/// Edge list plus a model on it.
fn instance() -> impl Strategy<Value = (TemporalEdgeList, Triclustering)> {
    (1usize..=6, 1usize..=6, 1usize..=40)
        .prop_flat_map(|(n_s, n_d, m)| {
            (
                Just((n_s, n_d)),
                proptest::collection::vec((0..n_s, 0..n_d, 0.0f64..1.0), m),
                proptest::collection::vec(0u32..4, n_s),
                proptest::collection::vec(0u32..4, n_d),
                proptest::collection::vec(any::<bool>(), m.saturating_sub(1)),
            )
        })
        .prop_map(|((n_s, n_d), rows, src, dst, cuts)| {
            let records: Vec<(String, String, f64)> =
                rows.iter().map(|&(s, d, t)| (format!("s{s}"), format!("d{d}"), t)).collect();
            let edges = TemporalEdgeList::from_records_with_universe(
                records,
                (0..n_s).map(|v| format!("s{v}")).collect(),
                (0..n_d).map(|v| format!("d{v}")).collect(),
            )
            .unwrap();
            let mut bounds = vec![0u32];
            bounds.extend(cuts.iter().enumerate().filter(|c| *c.1).map(|(r, _)| r as u32 + 1));
            bounds.push(edges.m() as u32);
            let model =
                Triclustering::compute_counts(&edges, canonical_labels(&src), canonical_labels(&dst), bounds).unwrap();
            (edges, model)
        })
}

fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, len).prop_map(|v| {
        let total: f64 = v.iter().sum();
        if total == 0.0 {
            let mut u = vec![0.0; v.len()];
            u[0] = 1.0;
            u
        } else {
            v.iter().map(|x| x / total).collect()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn model_is_compatible_with_its_data((edges, model) in instance()) {
        model.validate().unwrap();
        model.check_compatible(&edges).unwrap();
        prop_assert_eq!(model.cube().values().sum::<u64>(), edges.m());
    }

    #[test]
    fn merge_delta_equals_recomputation((_, model) in instance()) {
        let base = cost(&model).unwrap().total;
        for axis in Axis::ALL {
            let k = model.k(axis);
            for a in 0..k {
                for b in a + 1..k {
                    if axis == Axis::Time && b != a + 1 {
                        prop_assert!(merge_delta(&model, axis, a, b).is_err());
                        continue;
                    }
                    let merged = model.merged(axis, a, b).unwrap();
                    merged.validate().unwrap();
                    let direct = cost(&merged).unwrap().total - base;
                    prop_assert!((merge_delta(&model, axis, a, b).unwrap() - direct).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn mutual_information_is_non_negative((_, model) in instance()) {
        let pairs = mi_source_dest(&model);
        let sum: f64 = pairs.values.iter().flatten().sum();
        prop_assert!(pairs.total >= -1e-12);
        prop_assert!((sum - pairs.total).abs() < 1e-12);
        let pt = mi_pair_time(&model);
        prop_assert!(pt.total >= -1e-12);
        if model.k_t() == 1 {
            prop_assert!(pt.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn distributions_sum_to_one((_, model) in instance()) {
        let d = ClusterDistributions::new(&model);
        for axis in Axis::ALL {
            prop_assert!((d.marginal(axis).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let mut mixture = vec![0.0; d.profile(axis, 0).len()];
            for c in 0..model.k(axis) {
                for (acc, p) in mixture.iter_mut().zip(d.profile(axis, c)) {
                    *acc += d.weight(axis, c) * p;
                }
            }
            prop_assert!((mixture.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn js_divergence_bounds((p, q) in (2usize..8).prop_flat_map(|n| (distribution(n), distribution(n))), alpha in 0.01f64..0.99) {
        let beta = 1.0 - alpha;
        let js = js_divergence(&p, &q, alpha, beta).unwrap();
        let upper = alpha * (1.0 / alpha).ln() + beta * (1.0 / beta).ln();
        prop_assert!(js >= 0.0);
        prop_assert!(js <= upper + 1e-12);
        let swapped = js_divergence(&q, &p, beta, alpha).unwrap();
        prop_assert!((js - swapped).abs() < 1e-12);
        prop_assert!(js_divergence(&p, &p, alpha, beta).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rank_transform_is_a_stable_permutation(times in proptest::collection::vec(0u8..5, 1..50)) {
        let raw: Vec<f64> = times.iter().map(|&t| t as f64).collect();
        let ranks = rank_transform(&raw).unwrap();
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (1..=raw.len() as u32).collect::<Vec<_>>());
        for a in 0..raw.len() {
            for b in a + 1..raw.len() {
                // Earlier stamps rank first; ties keep input order.
                prop_assert_eq!(ranks[a] < ranks[b], raw[a] <= raw[b]);
            }
        }
    }
}

#[test]
fn independent_cubes_have_zero_information() {
    // μ_ijl = a_i b_j c_l: every contribution vanishes.
    let a = [1u64, 2, 3];
    let b = [2u64, 1];
    let c = [1u64, 3];
    let mut records = Vec::new();
    let mut t = 0.0;
    for (l, &cl) in c.iter().enumerate() {
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                for _ in 0..ai * bj * cl {
                    records.push((format!("s{i}"), format!("d{j}"), t + l as f64 * 1000.0));
                    t += 1.0;
                }
            }
        }
    }
    let edges = TemporalEdgeList::from_records(records).unwrap();
    let src: Vec<u32> = edges.source_ids().iter().map(|s| s[1..].parse().unwrap()).collect();
    let dst: Vec<u32> = edges.destination_ids().iter().map(|s| s[1..].parse().unwrap()).collect();
    let model = Triclustering::compute_counts(&edges, src, dst, vec![0, 18, 72]).unwrap();
    assert!(mi_source_dest(&model).values.iter().flatten().all(|v| v.abs() < 1e-15));
    assert!(mi_pair_time(&model).values.iter().all(|v| v.abs() < 1e-15));
}
