//! Recovery sweep over data sizes and noise levels on the block benchmark.
//! Writes the experiment table (one row per size, seed and noise level)
//! consumed by the plotting scripts.
//!
//! Usage: `cargo run --release --example recovery_sweep [table.csv] [seeds] [max_log2_m]`
//!
//! Sizes run from 2^8 to 2^max_log2_m (default 2^15) in steps of one power
//! of two; noise levels are 0 and 0.5.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use tricluster::optimizer::{vns_fit, SearchConfig};
use tricluster::synthgen::{generate, recovery_score, GeneratorConfig};

fn main() -> tricluster::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("tricluster_experiments.csv"));
    let seeds: u64 = args.next().map(|s| s.parse().expect("seeds must be an integer")).unwrap_or(3);
    let max_log2: u32 = args.next().map(|s| s.parse().expect("max_log2_m must be an integer")).unwrap_or(15);

    let mut out = BufWriter::new(File::create(&path)?);
    writeln!(out, "m,seed,noise,k_S_found,k_D_found,k_T_found,cost,runtime,ari_source,ari_destination")?;
    for log2 in 8..=max_log2 {
        let m = 1usize << log2;
        for noise in [0.0, 0.5] {
            for seed in 0..seeds {
                let data = generate(&GeneratorConfig { m, seed, noise_fraction: noise, ..Default::default() })?;
                let started = Instant::now();
                let fit = vns_fit(&data.edges, &SearchConfig { seed, ..Default::default() })?;
                let runtime = started.elapsed().as_secs_f64();
                let (k_s, k_d, k_t) = fit.model.shape();
                let ari_s = recovery_score(fit.model.source_assignment(), &data.truth.source)?;
                let ari_d = recovery_score(fit.model.destination_assignment(), &data.truth.destination)?;
                writeln!(out, "{m},{seed},{noise},{k_s},{k_d},{k_t},{:.6},{runtime:.4},{ari_s:.6},{ari_d:.6}", fit.cost.total)?;
                println!("m = 2^{log2:<2} noise {noise:.1} seed {seed}: shape ({k_s}, {k_d}, {k_t}), ARI {ari_s:.3}/{ari_d:.3}, {runtime:.2}s");
            }
        }
    }
    out.flush()?;
    println!("table written to {}", path.display());
    Ok(())
}
