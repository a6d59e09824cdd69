//! Fits a triclustering to a generated data set, compares it with the
//! planted clusters and saves it as a JSON model document.
//!
//! Usage: `cargo run --release --example fit_model [m] [seed] [restarts]`

use std::fs::File;
use std::io::BufWriter;

use tricluster::io::ModelDocument;
use tricluster::optimizer::{greedy_merge_outcome, initial_solution, vns_fit, Granularity, SearchConfig};
use tricluster::synthgen::{generate, recovery_score, GeneratorConfig};
use tricluster::Triclustering;

fn main() -> tricluster::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().map(|s| s.parse().expect("m must be an integer")).unwrap_or(1 << 15);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed must be an integer")).unwrap_or(0);
    let restarts: usize = args.next().map(|s| s.parse().expect("restarts must be an integer")).unwrap_or(8);

    let data = generate(&GeneratorConfig { m, seed, ..Default::default() })?;
    let edges = &data.edges;

    // The plain greedy descent from the finest model.
    let start = initial_solution(edges, Granularity::Auto)?;
    let greedy = greedy_merge_outcome(&start)?;
    println!("initial model {:?}, greedy result {:?} after {} merges, cost {:.3}", start.shape(), greedy.model.shape(), greedy.merges, greedy.cost);

    // The full search.
    let config = SearchConfig { restarts, seed, ..Default::default() };
    let fit = vns_fit(edges, &config)?;
    let null = tricluster::criterion::cost(&Triclustering::null_model(edges))?.total;
    println!("search result {:?}, cost {:.3} (null model {:.3})", fit.model.shape(), fit.cost.total, null);
    for r in &fit.report.rounds {
        println!(
            "  round {:>2} level {} cost {:>14.3} best {:>14.3} shape ({}, {}, {}) {:.2}s",
            r.round, r.level, r.cost, r.best_cost, r.k_s, r.k_d, r.k_t, r.wall_seconds
        );
    }
    let ari_s = recovery_score(fit.model.source_assignment(), &data.truth.source)?;
    let ari_d = recovery_score(fit.model.destination_assignment(), &data.truth.destination)?;
    println!("adjusted Rand index: sources {ari_s:.4}, destinations {ari_d:.4}");

    let path = std::env::temp_dir().join("tricluster_fit_model.json");
    ModelDocument::new(&fit.model, edges, Some(fit.cost.total))?.write(BufWriter::new(File::create(&path)?))?;
    println!("model written to {}", path.display());
    Ok(())
}
