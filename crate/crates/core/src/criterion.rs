//! The MODL cost of a triclustering and its incremental merge deltas.
//!
//! The cost is the negative log posterior `-ln P(M) - ln P(E | M)` in nats.
//! The prior part counts the model choices (universe sizes, partitions, cell
//! assignment, degree lists); the likelihood part counts the data sets
//! compatible with the model (edge-to-cell mapping, time ordering inside each
//! interval, edge-to-vertex mapping inside each cluster).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    ln_compositions, log_factorial, pool_gain, CombinatoricsCache,
};
use crate::error::{Error, Result};
use crate::model::{Axis, Triclustering};

/// Prior terms of the cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PriorTerms {
    /// `ln|S| + ln|D| + ln m`.
    pub constants: f64,
    /// `ln B(|S|, k_S)`.
    pub source_partition: f64,
    /// `ln B(|D|, k_D)`.
    pub destination_partition: f64,
    /// `ln C(m + K - 1, K - 1)` with `K = k_S k_D k_T`.
    pub cell_assignment: f64,
    /// `Σ_i ln C(σ_i + |c_i| - 1, |c_i| - 1)`.
    pub source_degrees: f64,
    pub destination_degrees: f64,
}

/// Likelihood terms of the cost (all non-negative).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodTerms {
    /// `ln m! - Σ ln μ_ijl!`.
    pub edge_to_cell: f64,
    /// `Σ_l ln τ_l!`.
    pub time_order: f64,
    /// `Σ_i ln σ_i! - Σ_s ln δ_s!`.
    pub source_mapping: f64,
    pub destination_mapping: f64,
}

/// A cost value with its breakdown.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cost {
    pub total: f64,
    pub prior: PriorTerms,
    pub likelihood: LikelihoodTerms,
}

impl Cost {
    fn from_terms(prior: PriorTerms, likelihood: LikelihoodTerms) -> Self {
        let mut cost = Cost { total: 0.0, prior, likelihood };
        cost.total = cost.terms().iter().map(|(_, v)| v).sum();
        cost
    }

    pub fn prior_total(&self) -> f64 {
        let p = &self.prior;
        p.constants
            + p.source_partition
            + p.destination_partition
            + p.cell_assignment
            + p.source_degrees
            + p.destination_degrees
    }

    pub fn likelihood_total(&self) -> f64 {
        let l = &self.likelihood;
        l.edge_to_cell + l.time_order + l.source_mapping + l.destination_mapping
    }

    /// Named terms in a fixed order.
    pub fn terms(&self) -> [(&'static str, f64); 10] {
        let (p, l) = (&self.prior, &self.likelihood);
        [
            ("prior.constants", p.constants),
            ("prior.source_partition", p.source_partition),
            ("prior.destination_partition", p.destination_partition),
            ("prior.cell_assignment", p.cell_assignment),
            ("prior.source_degrees", p.source_degrees),
            ("prior.destination_degrees", p.destination_degrees),
            ("likelihood.edge_to_cell", l.edge_to_cell),
            ("likelihood.time_order", l.time_order),
            ("likelihood.source_mapping", l.source_mapping),
            ("likelihood.destination_mapping", l.destination_mapping),
        ]
    }

    /// `term,value` rows followed by `total`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "term,value")?;
        for (name, value) in self.terms() {
            writeln!(out, "{name},{value:.12}")?;
        }
        writeln!(out, "total,{:.12}", self.total)?;
        Ok(())
    }
}

fn log_partitions(n: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    CombinatoricsCache::shared().log_sum_stirling(n as u64, k as u64)
}

fn ln_usize(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        (n as f64).ln()
    }
}

/// Evaluates every term of the cost of `model`.
pub fn cost(model: &Triclustering) -> Result<Cost> {
    let m = model.m();
    let (k_s, k_d, k_t) = model.shape();
    if model.source_marginals().iter().sum::<u64>() != m
        || model.destination_marginals().iter().sum::<u64>() != m
        || model.time_marginals().iter().sum::<u64>() != m
    {
        return Err(Error::Invariant("marginals do not sum to m".into()));
    }
    let cells = (k_s * k_d * k_t) as u64;

    let prior = PriorTerms {
        constants: ln_usize(model.n_sources()) + ln_usize(model.n_destinations()) + ln_usize(m as usize),
        source_partition: log_partitions(model.n_sources(), k_s)?,
        destination_partition: log_partitions(model.n_destinations(), k_d)?,
        cell_assignment: ln_compositions(m, cells),
        source_degrees: model
            .source_marginals()
            .iter()
            .zip(model.source_sizes())
            .map(|(&sigma, &n)| ln_compositions(sigma, n))
            .sum(),
        destination_degrees: model
            .destination_marginals()
            .iter()
            .zip(model.destination_sizes())
            .map(|(&delta, &n)| ln_compositions(delta, n))
            .sum(),
    };

    let sum_lf = |xs: &[u64]| xs.iter().map(|&x| log_factorial(x)).sum::<f64>();
    let likelihood = LikelihoodTerms {
        edge_to_cell: log_factorial(m) - model.cube().values().map(|&c| log_factorial(c)).sum::<f64>(),
        time_order: sum_lf(model.time_marginals()),
        source_mapping: sum_lf(model.source_marginals()) - sum_lf(model.out_degrees()),
        destination_mapping: sum_lf(model.destination_marginals()) - sum_lf(model.in_degrees()),
    };
    Ok(Cost::from_terms(prior, likelihood))
}

/// Cost of the 1×1×1 model with the same universes and degrees as `model`,
/// evaluated in closed form.
pub fn null_cost(model: &Triclustering) -> Cost {
    null_cost_from_degrees(model.out_degrees(), model.in_degrees())
}

/// Null cost from the degree sequences alone (`m` is their common sum).
pub fn null_cost_from_degrees(out_degrees: &[u64], in_degrees: &[u64]) -> Cost {
    let m: u64 = out_degrees.iter().sum();
    let (n_s, n_d) = (out_degrees.len(), in_degrees.len());
    let lfm = log_factorial(m);
    let sum_lf = |xs: &[u64]| xs.iter().map(|&x| log_factorial(x)).sum::<f64>();
    let prior = PriorTerms {
        constants: ln_usize(n_s) + ln_usize(n_d) + ln_usize(m as usize),
        source_partition: 0.0,
        destination_partition: 0.0,
        cell_assignment: 0.0,
        source_degrees: ln_compositions(m, n_s as u64),
        destination_degrees: ln_compositions(m, n_d as u64),
    };
    let likelihood = LikelihoodTerms {
        edge_to_cell: 0.0,
        time_order: lfm,
        source_mapping: lfm - sum_lf(out_degrees),
        destination_mapping: lfm - sum_lf(in_degrees),
    };
    Cost::from_terms(prior, likelihood)
}

/// `c(M with a and b merged) - c(M)`, computed from the terms that involve
/// clusters `a` and `b` and the global cluster counts only.
pub fn merge_delta(model: &Triclustering, axis: Axis, a: usize, b: usize) -> Result<f64> {
    let k = model.k(axis);
    if a == b || a >= k || b >= k {
        return Err(Error::Value(format!("invalid {axis} merge ({a}, {b}) with k = {k}")));
    }
    if axis == Axis::Time && a.abs_diff(b) != 1 {
        return Err(Error::NonAdjacentTime(a, b));
    }
    let (k_s, k_d, k_t) = model.shape();
    let mut delta = global_merge_delta(model.m(), model.n_sources(), model.n_destinations(), (k_s, k_d, k_t), axis)?;

    let marg = model.marginals(axis);
    let (ma, mb) = (marg[a], marg[b]);
    delta += pool_gain(ma, mb);
    match axis {
        Axis::Source | Axis::Destination => {
            let sizes = match axis {
                Axis::Source => model.source_sizes(),
                _ => model.destination_sizes(),
            };
            let (na, nb) = (sizes[a], sizes[b]);
            delta += ln_compositions(ma + mb, na + nb)
                - ln_compositions(ma, na)
                - ln_compositions(mb, nb);
        }
        Axis::Time => {}
    }

    // Cells of a and b keyed by their coordinates on the two other axes.
    let mut pooled: std::collections::HashMap<(u32, u32), (u64, u64)> = std::collections::HashMap::new();
    let (a, b) = (a as u32, b as u32);
    for (&(i, j, l), &c) in model.cube() {
        let (own, key) = match axis {
            Axis::Source => (i, (j, l)),
            Axis::Destination => (j, (i, l)),
            Axis::Time => (l, (i, j)),
        };
        if own == a {
            pooled.entry(key).or_default().0 += c;
        } else if own == b {
            pooled.entry(key).or_default().1 += c;
        }
    }
    delta -= pooled.values().map(|&(x, y)| pool_gain(x, y)).sum::<f64>();
    Ok(delta)
}

/// Change of the count-dependent prior terms when one cluster of `axis`
/// disappears: the partition term and the cell-assignment term.
pub(crate) fn global_merge_delta(
    m: u64,
    n_sources: usize,
    n_destinations: usize,
    (k_s, k_d, k_t): (usize, usize, usize),
    axis: Axis,
) -> Result<f64> {
    let cells = (k_s * k_d * k_t) as u64;
    let (after, partition) = match axis {
        Axis::Source => (
            ((k_s - 1) * k_d * k_t) as u64,
            log_partitions(n_sources, k_s - 1)? - log_partitions(n_sources, k_s)?,
        ),
        Axis::Destination => (
            (k_s * (k_d - 1) * k_t) as u64,
            log_partitions(n_destinations, k_d - 1)? - log_partitions(n_destinations, k_d)?,
        ),
        Axis::Time => ((k_s * k_d * (k_t - 1)) as u64, 0.0),
    };
    Ok(partition + ln_compositions(m, after) - ln_compositions(m, cells))
}

/// Informativity of a model between the null model (0) and the best model (1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Informativity {
    pub value: f64,
    /// Set when the best cost equals the null cost: the data show no
    /// structure and the value is reported as 0.
    pub undefined: bool,
}

/// `τ = (c_M - c_null) / (c_star - c_null)`.
pub fn informativity(cost_model: f64, cost_star: f64, cost_null: f64) -> Informativity {
    let span = cost_star - cost_null;
    if span == 0.0 {
        return Informativity { value: 0.0, undefined: true };
    }
    if cost_model == cost_null {
        return Informativity { value: 0.0, undefined: false };
    }
    if cost_model == cost_star {
        return Informativity { value: 1.0, undefined: false };
    }
    Informativity { value: (cost_model - cost_null) / span, undefined: false }
}
