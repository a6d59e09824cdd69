//! Scores models with the MODL cost: the term breakdown, exact merge costs,
//! and the informativity of a model between the null model (0) and the best
//! model (1).
//!
//! Usage: `cargo run --release --example evaluate_model`

use tricluster::criterion::{cost, informativity, merge_delta};
use tricluster::optimizer::{vns_fit, SearchConfig};
use tricluster::synthgen::{generate, GeneratorConfig};
use tricluster::{Axis, Triclustering};

fn main() -> tricluster::Result<()> {
    let data = generate(&GeneratorConfig { m: 1 << 14, seed: 7, ..Default::default() })?;
    let edges = &data.edges;
    let fit = vns_fit(edges, &SearchConfig { seed: 7, ..Default::default() })?;
    let null = Triclustering::null_model(edges);
    let c_best = fit.cost.total;
    let c_null = cost(&null)?.total;

    println!("fitted model {:?}", fit.model.shape());
    for (name, value) in fit.cost.terms() {
        println!("  {name:<32} {value:>14.4}");
    }
    println!("  {:<32} {:>14.4}", "total", c_best);
    println!("null model cost {c_null:.4}");

    // Merging two source clusters: the incremental cost equals the
    // difference of two full evaluations.
    if fit.model.k_s() > 1 {
        let delta = merge_delta(&fit.model, Axis::Source, 0, 1)?;
        let merged = fit.model.merged(Axis::Source, 0, 1)?;
        let direct = cost(&merged)?.total - c_best;
        println!("merging source clusters 0 and 1: delta {delta:.6}, recomputed {direct:.6}");
        let tau = informativity(cost(&merged)?.total, c_best, c_null);
        println!("informativity of the merged model: {:.4}", tau.value);
    }
    println!("informativity of the fitted model: {}", informativity(c_best, c_best, c_null).value);
    println!("informativity of the null model:   {}", informativity(c_null, c_best, c_null).value);
    Ok(())
}
