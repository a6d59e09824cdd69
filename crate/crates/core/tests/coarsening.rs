//! Merge hierarchies of fitted models.

use tricluster::coarsen::{agglomerate, posterior_ratio, StopRule};
use tricluster::criterion::cost;
use tricluster::optimizer::{min_merge_delta, vns_fit, SearchConfig};
use tricluster::synthgen::{generate, sample_from_model, GeneratorConfig};
use tricluster::{Axis, Triclustering};

fn fitted(m: usize, seed: u64) -> Triclustering {
    let data = generate(&GeneratorConfig { m, seed, ..Default::default() }).unwrap();
    vns_fit(&data.edges, &SearchConfig { seed, ..Default::default() }).unwrap().model
}

#[test]
fn full_hierarchy_has_one_merge_per_extra_cluster() {
    let mstar = fitted(1 << 13, 1);
    let (k_s, k_d, k_t) = mstar.shape();
    let h = agglomerate(&mstar, StopRule::MinInformativity(0.0)).unwrap();
    assert_eq!(h.len(), (k_s - 1) + (k_d - 1) + (k_t - 1));
    assert!(h.replay(&mstar, h.len()).unwrap().is_null());
    assert!(h.verify(&mstar).unwrap() < 1e-6);
    // Informativity decreases from 1 to 0 along the way.
    assert_eq!(h.records.last().unwrap().informativity_after, 0.0);
    // Informativity never exceeds 1; an intermediate model may cost more
    // than the null model, which shows as a negative value.
    assert!(h.records.iter().all(|r| r.informativity_after <= 1.0));
}

#[test]
fn first_merge_of_a_merge_optimal_model_costs_something() {
    let mstar = fitted(1 << 13, 2);
    let h = agglomerate(&mstar, StopRule::MinInformativity(0.0)).unwrap();
    let first = &h.records[0];
    assert!(first.delta >= -1e-9);
    assert!((first.delta - min_merge_delta(&mstar).unwrap().unwrap()).abs() < 1e-6);
    assert!(h.notices.is_empty());
    assert!(posterior_ratio(first.delta).unwrap().value >= 1.0 - 1e-9);
}

#[test]
fn replay_matches_recorded_costs_at_every_step() {
    let mstar = fitted(1 << 12, 3);
    let h = agglomerate(&mstar, StopRule::MinInformativity(0.0)).unwrap();
    for step in 0..=h.len() {
        let model = h.replay(&mstar, step).unwrap();
        let recorded = if step == 0 { h.start_cost } else { h.records[step - 1].cost_after };
        assert!((cost(&model).unwrap().total - recorded).abs() < 1e-6);
    }
}

#[test]
fn within_group_merges_come_first() {
    // Four source clusters that are two planted groups split in half: the
    // halves of a group share their profile, so they merge before any
    // cross-group pair does.
    let mut cube = std::collections::BTreeMap::new();
    let profiles = [[400u64, 100, 50, 450], [100, 400, 450, 50]];
    for i in 0..4u32 {
        let p = profiles[(i / 2) as usize];
        for (cell, &c) in p.iter().enumerate() {
            cube.insert((i, (cell % 2) as u32, (cell / 2) as u32), c);
        }
    }
    let src: Vec<u32> = (0..4).flat_map(|c| std::iter::repeat_n(c, 5)).collect();
    let dst: Vec<u32> = (0..2).flat_map(|c| std::iter::repeat_n(c, 5)).collect();
    let out = vec![200u64; 20];
    let inn: Vec<u64> = {
        let mut d = [0u64; 2];
        for (&(_, j, _), &c) in &cube {
            d[j as usize] += c;
        }
        d.iter().flat_map(|&t| std::iter::repeat_n(t / 5, 5)).collect()
    };
    let model = Triclustering::from_parameters(src, dst, cube, out, inn).unwrap();
    let edges = sample_from_model(&model, 9);
    model.check_compatible(&edges).unwrap();
    let h = agglomerate(&model, StopRule::TargetCounts { source: 2, destination: 0, time: 0 }).unwrap();
    let source_merges: Vec<_> = h.records.iter().filter(|r| r.axis == Axis::Source).collect();
    assert_eq!(source_merges.len(), 2);
    let final_model = h.replay(&model, h.len()).unwrap();
    let members = final_model.members(Axis::Source);
    let groups: Vec<Vec<u32>> = vec![(0..10).collect(), (10..20).collect()];
    assert_eq!(members, groups);
}

#[test]
fn target_counts_stop_the_constrained_axes() {
    let mstar = fitted(1 << 13, 4);
    let h = agglomerate(&mstar, StopRule::TargetCounts { source: 3, destination: 2, time: 0 }).unwrap();
    let (k_s, k_d, _) = h.records.last().unwrap().shape_after;
    assert_eq!((k_s, k_d), (3, 2));
    // A threshold keeps informativity above it.
    let h = agglomerate(&mstar, StopRule::MinInformativity(0.6)).unwrap();
    assert!(h.records.iter().all(|r| r.informativity_after >= 0.6));
    let next = agglomerate(&mstar, StopRule::MinInformativity(0.0)).unwrap();
    if next.len() > h.len() {
        assert!(next.records[h.len()].informativity_after < 0.6);
    }
}

#[test]
fn non_optimal_start_resets_the_baseline() {
    // Singleton clusters on a small data set: merging lowers the cost, so
    // the baseline moves and informativity never exceeds 1.
    let data = generate(&GeneratorConfig { m: 2000, seed: 5, ..Default::default() }).unwrap();
    let fine = tricluster::optimizer::initial_solution(&data.edges, tricluster::optimizer::Granularity::Intervals(4)).unwrap();
    let h = agglomerate(&fine, StopRule::MinInformativity(0.0)).unwrap();
    assert!(!h.notices.is_empty());
    assert!(h.baseline_cost < h.start_cost);
    assert!(h.records.iter().all(|r| r.informativity_after <= 1.0));
    assert!(h.records.iter().any(|r| r.informativity_after == 1.0));
}
