//! The small illustrative model: six sources, eight destinations, 50 edges.
//! Builds it from its free parameters, shows the induced time partition,
//! draws a data set from it and checks that the data reproduce the counts.
//!
//! Usage: `cargo run --example worked_example [seed]`

use tricluster::criterion::cost;
use tricluster::synthgen::{sample_from_model, worked_example_model};
use tricluster::{Axis, Triclustering};

fn main() -> tricluster::Result<()> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse().expect("seed must be an integer")).unwrap_or(0);
    let model = worked_example_model();
    let (k_s, k_d, k_t) = model.shape();
    println!("{k_s} source clusters, {k_d} destination clusters, {k_t} time segments, m = {}", model.m());
    for l in 0..k_t {
        println!("segment {l}:");
        for i in 0..k_s {
            let row: Vec<String> = (0..k_d).map(|j| format!("{:>3}", model.count(i, j, l))).collect();
            println!("  source cluster {i}: {}", row.join(""));
        }
    }
    println!("source marginals      {:?}", model.source_marginals());
    println!("destination marginals {:?}", model.destination_marginals());
    println!("time marginals        {:?}", model.time_marginals());
    let segments: Vec<String> = model.time_boundaries().windows(2).map(|w| format!("{{{}..{}}}", w[0] + 1, w[1])).collect();
    println!("induced time partition: {}", segments.join(", "));
    println!("members: sources {:?}, destinations {:?}", model.members(Axis::Source), model.members(Axis::Destination));

    let edges = sample_from_model(&model, seed);
    println!("sampled data set, first edges (source, destination, rank):");
    for (s, d, r) in edges.edges().take(5) {
        println!("  ({s}, {d}, {r})");
    }
    let recount = Triclustering::compute_counts(
        &edges,
        model.source_assignment().to_vec(),
        model.destination_assignment().to_vec(),
        model.time_boundaries().to_vec(),
    )?;
    println!("recounted cube equals the parameters: {}", recount == model);

    let c = cost(&model)?;
    for (name, value) in c.terms() {
        println!("  {name:<32} {value:>10.4}");
    }
    println!("  {:<32} {:>10.4}", "total", c.total);
    Ok(())
}
