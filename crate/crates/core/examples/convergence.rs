//! Large-sample behaviour of the merge dissimilarity: on a fixed planted
//! model, the cost of merging two source clusters per edge approaches
//! `(π_i + π_k) · JS(profile_i, profile_k)` as the number of edges grows.
//!
//! Usage: `cargo run --release --example convergence`

use tricluster::analysis::asymptotic_dissimilarity_check;
use tricluster::synthgen::two_profile_model;

fn main() -> tricluster::Result<()> {
    println!("{:>10} {:>14} {:>14} {:>14}", "m", "delta / m", "limit", "relative gap");
    for m in [1_000u64, 10_000, 100_000, 1_000_000, 10_000_000] {
        let model = two_profile_model(m)?;
        let check = asymptotic_dissimilarity_check(&model, 0, 1)?;
        println!("{m:>10} {:>14.8} {:>14.8} {:>14.3e}", check.empirical, check.limit, check.relative_gap());
    }
    Ok(())
}
