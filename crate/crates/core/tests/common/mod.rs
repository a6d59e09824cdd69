//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's combinatorics or cost code.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use tricluster::data::TemporalEdgeList;
use tricluster::model::Triclustering;

/// Natural log of an arbitrary-size positive integer.
pub fn big_ln(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "log of zero");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    assert!(k <= n);
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `Σ_{j ≤ kmax} S(n, j)` with exact Stirling numbers of the second kind.
pub fn stirling_sum(n: u64, kmax: u64) -> BigUint {
    let n = n as usize;
    let mut row = vec![BigUint::zero(); n + 1];
    row[0] = BigUint::one();
    for i in 1..=n {
        let mut next = vec![BigUint::zero(); n + 1];
        for k in 1..=i {
            next[k] = &row[k] * (k as u64) + &row[k - 1];
        }
        row = next;
    }
    row.iter().skip(1).take(kmax as usize).fold(BigUint::zero(), |acc, x| acc + x)
}

/// Exact cost: every factorial, binomial and Stirling sum is an exact
/// integer; only the final logarithms are floating point.
pub fn exact_cost(model: &Triclustering) -> f64 {
    let m = model.m();
    let (k_s, k_d, k_t) = model.shape();
    let n_s = model.n_sources() as u64;
    let n_d = model.n_destinations() as u64;
    let cells = (k_s * k_d * k_t) as u64;
    let mut total = (n_s as f64).ln() + (n_d as f64).ln() + (m as f64).ln();
    total += big_ln(&stirling_sum(n_s, k_s as u64));
    total += big_ln(&stirling_sum(n_d, k_d as u64));
    total += big_ln(&binomial(m + cells - 1, cells - 1));
    for (&sigma, &size) in model.source_marginals().iter().zip(model.source_sizes()) {
        total += big_ln(&binomial(sigma + size - 1, size - 1));
    }
    for (&delta, &size) in model.destination_marginals().iter().zip(model.destination_sizes()) {
        total += big_ln(&binomial(delta + size - 1, size - 1));
    }
    let mut numerator = factorial(m);
    let mut denominator = BigUint::one();
    for &c in model.cube().values() {
        denominator *= factorial(c);
    }
    for &t in model.time_marginals() {
        numerator *= factorial(t);
    }
    for &s in model.source_marginals().iter().chain(model.destination_marginals()) {
        numerator *= factorial(s);
    }
    for &d in model.out_degrees().iter().chain(model.in_degrees()) {
        denominator *= factorial(d);
    }
    total + big_ln(&numerator) - big_ln(&denominator)
}

/// All set partitions of `n` elements as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, max: u32, n: usize, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for label in 0..=limit {
            prefix.push(label);
            rec(prefix, max.max(label), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
    } else {
        rec(&mut Vec::with_capacity(n), 0, n, &mut out);
    }
    out
}

/// Counts set partitions of `n` elements by recursive enumeration.
pub fn count_set_partitions(n: usize) -> u64 {
    fn rec(position: usize, blocks: u64, n: usize) -> u64 {
        if position == n {
            return 1;
        }
        // Join one of the existing blocks or open a new one.
        blocks * rec(position + 1, blocks, n) + rec(position + 1, blocks + 1, n)
    }
    if n == 0 {
        1
    } else {
        rec(1, 1, n)
    }
}

fn ln_fact(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_binom(n: u64, k: u64) -> f64 {
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

fn ln_stirling_sum(n: u64, kmax: u64) -> f64 {
    big_ln(&stirling_sum(n, kmax))
}

#[allow(clippy::needless_range_loop)]
/// Global minimum of the cost over every triclustering of `edges`, by
/// enumerating both vertex partitions and optimizing the time segmentation
/// exactly with dynamic programming for every number of segments. Returns
/// the optimal cost and one optimal model.
pub fn brute_force_optimum(edges: &TemporalEdgeList) -> (f64, Triclustering) {
    let m = edges.m();
    let n_s = edges.n_sources();
    let n_d = edges.n_destinations();
    let mut by_rank = vec![(0u32, 0u32); m as usize];
    for (s, d, r) in edges.edges() {
        by_rank[r as usize - 1] = (s, d);
    }
    let out: Vec<u64> = edges.out_degrees();
    let inn: Vec<u64> = edges.in_degrees();
    let fixed = (n_s as f64).ln() + (n_d as f64).ln() + (m as f64).ln() + ln_fact(m)
        - out.iter().map(|&d| ln_fact(d)).sum::<f64>()
        - inn.iter().map(|&d| ln_fact(d)).sum::<f64>();
    let source_partitions = set_partitions(n_s);
    let destination_partitions = set_partitions(n_d);
    let mut best = (f64::INFINITY, Vec::new(), Vec::new(), Vec::new());
    for cs in &source_partitions {
        let k_s = *cs.iter().max().unwrap() as usize + 1;
        for cd in &destination_partitions {
            let k_d = *cd.iter().max().unwrap() as usize + 1;
            let mut vertex_part = fixed + ln_stirling_sum(n_s as u64, k_s as u64)
                + ln_stirling_sum(n_d as u64, k_d as u64);
            for (labels, degrees, k) in [(cs, &out, k_s), (cd, &inn, k_d)] {
                let mut marg = vec![0u64; k];
                let mut size = vec![0u64; k];
                for (v, &c) in labels.iter().enumerate() {
                    marg[c as usize] += degrees[v];
                    size[c as usize] += 1;
                }
                for c in 0..k {
                    vertex_part += ln_binom(marg[c] + size[c] - 1, size[c] - 1) + ln_fact(marg[c]);
                }
            }
            // Cost of one interval [a, b): ln τ! - Σ ln μ!.
            let mm = m as usize;
            let mut interval = vec![vec![0.0f64; mm + 1]; mm + 1];
            for a in 0..mm {
                let mut counts = vec![0u64; k_s * k_d];
                let mut acc = 0.0;
                for b in a + 1..=mm {
                    let (s, d) = by_rank[b - 1];
                    let cell = cs[s as usize] as usize * k_d + cd[d as usize] as usize;
                    counts[cell] += 1;
                    acc -= (counts[cell] as f64).ln();
                    interval[a][b] = acc + ln_fact((b - a) as u64);
                }
            }
            // dp[t][b]: best cost of covering ranks [0, b) with t segments.
            let mut dp = vec![vec![f64::INFINITY; mm + 1]; mm + 1];
            let mut arg = vec![vec![0usize; mm + 1]; mm + 1];
            dp[0][0] = 0.0;
            for t in 1..=mm {
                for b in t..=mm {
                    for a in t - 1..b {
                        let v = dp[t - 1][a] + interval[a][b];
                        if v < dp[t][b] {
                            dp[t][b] = v;
                            arg[t][b] = a;
                        }
                    }
                }
                let cells = (k_s * k_d * t) as u64;
                let total = vertex_part + ln_binom(m + cells - 1, cells - 1) + dp[t][mm];
                if total < best.0 - 1e-12 {
                    let mut bounds = vec![mm as u32];
                    let (mut tt, mut b) = (t, mm);
                    while tt > 0 {
                        b = arg[tt][b];
                        bounds.push(b as u32);
                        tt -= 1;
                    }
                    bounds.reverse();
                    best = (total, cs.clone(), cd.clone(), bounds);
                }
            }
        }
    }
    let (cost, cs, cd, bounds) = best;
    let model = Triclustering::compute_counts(edges, cs, cd, bounds).unwrap();
    (cost, model)
}

/// A tiny structured instance: 4 sources and 4 destinations split at
/// random into two planted blocks each, 20 edges. Blocks pair up straight in
/// the first half of the time line and crosswise in the second half; about
/// one edge in ten ignores the pattern.
pub fn tiny_instance(seed: u64) -> TemporalEdgeList {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut sources: Vec<u32> = (0..4).collect();
    let mut destinations: Vec<u32> = (0..4).collect();
    sources.shuffle(&mut rng);
    destinations.shuffle(&mut rng);
    let mut records = Vec::new();
    for n in 0..20u32 {
        // Every vertex occurs at least once.
        let (s, d) = if n < 4 {
            (sources[n as usize], destinations[n as usize])
        } else {
            let block = rng.random_range(0..2usize);
            let crossed = n >= 10;
            let mut target = if crossed { 1 - block } else { block };
            if rng.random::<f64>() < 0.1 {
                target = 1 - target;
            }
            (
                sources[2 * block + rng.random_range(0..2usize)],
                destinations[2 * target + rng.random_range(0..2usize)],
            )
        };
        records.push((format!("s{s}"), format!("d{d}"), n as f64 + rng.random::<f64>() * 0.5));
    }
    TemporalEdgeList::from_records(records).unwrap()
}
