//! The search procedure: determinism, the greedy pass-through and the
//! local refinements.

use std::time::Duration;

use tricluster::criterion::cost;
use tricluster::optimizer::{
    greedy_merge, initial_solution, refine_boundaries, refine_reassign, vns_fit, Granularity, SearchConfig,
};
use tricluster::synthgen::{generate, GeneratorConfig, GeneratorMode};

fn data(m: usize, seed: u64) -> tricluster::data::TemporalEdgeList {
    generate(&GeneratorConfig { m, seed, ..Default::default() }).unwrap().edges
}

#[test]
fn single_round_is_the_plain_greedy() {
    let edges = data(3000, 1);
    for granularity in [Granularity::Auto, Granularity::Intervals(16)] {
        let config = SearchConfig { restarts: 1, initial_time_granularity: granularity, ..Default::default() };
        let fit = vns_fit(&edges, &config).unwrap();
        let greedy = greedy_merge(&initial_solution(&edges, granularity).unwrap()).unwrap();
        assert_eq!(fit.model, greedy);
        assert_eq!(fit.report.rounds.len(), 1);
    }
}

#[test]
fn results_do_not_depend_on_threading() {
    let edges = data(1 << 12, 2);
    let base = SearchConfig { seed: 11, ..Default::default() };
    let parallel = vns_fit(&edges, &base).unwrap();
    let serial = vns_fit(&edges, &SearchConfig { parallel_restarts: false, ..base.clone() }).unwrap();
    let again = vns_fit(&edges, &base).unwrap();
    assert_eq!(parallel.model, serial.model);
    assert_eq!(parallel.cost.total, serial.cost.total);
    assert_eq!(parallel.model, again.model);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let one_thread = pool.install(|| vns_fit(&edges, &base).unwrap());
    assert_eq!(parallel.model, one_thread.model);
}

#[test]
fn search_never_ends_above_the_greedy_or_the_null_model() {
    for seed in 0..3 {
        let edges = data(1 << 11, seed);
        let fit = vns_fit(&edges, &SearchConfig { seed, ..Default::default() }).unwrap();
        let greedy = greedy_merge(&initial_solution(&edges, Granularity::Auto).unwrap()).unwrap();
        let null = tricluster::Triclustering::null_model(&edges);
        assert!(fit.cost.total <= cost(&greedy).unwrap().total + 1e-9);
        assert!(fit.cost.total <= cost(&null).unwrap().total + 1e-9);
        fit.model.check_compatible(&edges).unwrap();
        let report = &fit.report;
        assert!(report.rounds.windows(2).all(|w| w[1].best_cost <= w[0].best_cost));
        assert_eq!(report.rounds.last().unwrap().best_cost, fit.cost.total);
    }
}

#[test]
fn refinements_never_increase_the_cost() {
    let edges = data(1 << 12, 4);
    let start = greedy_merge(&initial_solution(&edges, Granularity::Auto).unwrap()).unwrap();
    let c0 = cost(&start).unwrap().total;
    let reassigned = refine_reassign(&edges, &start).unwrap();
    let c1 = cost(&reassigned).unwrap().total;
    let shifted = refine_boundaries(&edges, &reassigned).unwrap();
    let c2 = cost(&shifted).unwrap().total;
    assert!(c1 <= c0 + 1e-9 && c2 <= c1 + 1e-9);
    shifted.check_compatible(&edges).unwrap();
}

#[test]
fn time_budget_is_honoured() {
    let edges = generate(&GeneratorConfig { m: 1 << 14, mode: GeneratorMode::Temporal, ..Default::default() }).unwrap().edges;
    let config = SearchConfig { restarts: 1000, time_budget: Some(Duration::from_millis(1)), ..Default::default() };
    let fit = vns_fit(&edges, &config).unwrap();
    assert!(fit.report.budget_exhausted);
    fit.model.check_compatible(&edges).unwrap();
}

#[test]
fn invalid_configurations_are_rejected() {
    let edges = data(100, 0);
    assert!(vns_fit(&edges, &SearchConfig { restarts: 0, ..Default::default() }).is_err());
    assert!(vns_fit(&edges, &SearchConfig { max_neighborhood_level: 0, ..Default::default() }).is_err());
}
