//! Generates the time-varying block benchmark, its time-shuffled variant and
//! an Erdős–Rényi control, and writes each as an edge list with ground truth.
//!
//! Usage: `cargo run --example generate_benchmark [output_dir] [m] [seed]`

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use tricluster::data::Delimiter;
use tricluster::synthgen::{generate, theta, GeneratorConfig, GeneratorMode};
use tricluster::Axis;

fn main() -> tricluster::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("tricluster_benchmark"));
    let m: usize = args.next().map(|s| s.parse().expect("m must be an integer")).unwrap_or(1 << 13);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed must be an integer")).unwrap_or(0);
    std::fs::create_dir_all(&dir)?;

    println!("cluster-pair probabilities for k = 5:");
    for t in [0.0, 0.5, 1.0] {
        let th = theta(t, 5)?;
        println!("  t = {t:.1}: diagonal {:.4}, off-diagonal {:.4}", th[0][0], th[0][1]);
    }

    for (mode, name) in [
        (GeneratorMode::Temporal, "temporal"),
        (GeneratorMode::Shuffled, "shuffled"),
        (GeneratorMode::ErdosRenyi, "erdos_renyi"),
    ] {
        let config = GeneratorConfig { m, seed, mode, ..Default::default() };
        let g = generate(&config)?;
        g.edges.write(BufWriter::new(File::create(dir.join(format!("{name}_edges.csv")))?), Delimiter::Comma)?;
        g.truth.write(BufWriter::new(File::create(dir.join(format!("{name}_truth_source.csv")))?), &g.edges, Axis::Source)?;
        g.truth.write(
            BufWriter::new(File::create(dir.join(format!("{name}_truth_destination.csv")))?),
            &g.edges,
            Axis::Destination,
        )?;
        println!(
            "{name:>11}: {} edges, {} sources, {} destinations",
            g.edges.m(),
            g.edges.n_sources(),
            g.edges.n_destinations()
        );
    }

    let noisy = generate(&GeneratorConfig { m, seed, noise_fraction: 0.5, ..Default::default() })?;
    println!("  50% noise: {} edges (half of them reallocated uniformly)", noisy.edges.m());
    println!("files written to {}", dir.display());
    Ok(())
}
