//! Builds the merge hierarchy of a fitted model: each step merges the two
//! clusters whose fusion costs least, tracking the informativity of the
//! coarser model and the posterior ratio of each merge.
//!
//! Usage: `cargo run --release --example coarsen_hierarchy [m] [seed]`

use tricluster::coarsen::{agglomerate, posterior_ratio, StopRule};
use tricluster::optimizer::{vns_fit, SearchConfig};
use tricluster::synthgen::{generate, GeneratorConfig};

fn main() -> tricluster::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().map(|s| s.parse().expect("m must be an integer")).unwrap_or(1 << 15);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed must be an integer")).unwrap_or(0);

    let data = generate(&GeneratorConfig { m, seed, ..Default::default() })?;
    let fit = vns_fit(&data.edges, &SearchConfig { seed, ..Default::default() })?;
    println!("fitted model {:?}, cost {:.3}", fit.model.shape(), fit.cost.total);

    let hierarchy = agglomerate(&fit.model, StopRule::MinInformativity(0.0))?;
    println!("{:>4} {:>12} {:>10} {:>14} {:>12} {:>8}", "step", "axis", "delta", "cost", "tau", "shape");
    for r in &hierarchy.records {
        println!(
            "{:>4} {:>12} {:>10.3} {:>14.3} {:>12.6} {:?}",
            r.step, r.axis.to_string(), r.delta, r.cost_after, r.informativity_after, r.shape_after
        );
    }
    if let Some(first) = hierarchy.records.first() {
        let ratio = posterior_ratio(first.delta)?;
        println!("first merge makes the model {:.3e} times less probable (log ratio {:.3})", ratio.value, ratio.log_value);
    }
    println!("replay check: largest cost discrepancy {:.2e}", hierarchy.verify(&fit.model)?);
    println!("dendrogram (leaves are the fitted clusters):\n{}", hierarchy.dendrogram());

    // Stopping rules.
    let at_half = agglomerate(&fit.model, StopRule::MinInformativity(0.5))?;
    let last = at_half.records.last().map(|r| r.shape_after).unwrap_or(at_half.start_shape);
    println!("keeping 50% informativity: {} merges, shape {last:?}", at_half.len());
    let targeted = agglomerate(&fit.model, StopRule::TargetCounts { source: 2, destination: 2, time: 0 })?;
    let last = targeted.records.last().map(|r| r.shape_after).unwrap_or(targeted.start_shape);
    println!("down to 2 + 2 vertex clusters: {} merges, shape {last:?}", targeted.len());
    Ok(())
}
