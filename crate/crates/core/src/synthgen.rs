//! Synthetic temporal graphs, noise operators, sampling from a model, and
//! partition agreement scoring.
//!
//! The benchmark process draws each edge independently: a time `t` uniform
//! on `[0, 1]`, a pair of clusters from the `k × k` matrix [`theta`]`(t)`,
//! then endpoints uniformly inside the two clusters. The pattern moves from
//! mostly off-diagonal blocks at `t = 0` to mostly diagonal blocks at `t = 1`.
//!
//! All generators are deterministic given their seed. Derived streams (noise,
//! shuffling) use [`derive_seed`] on the configured seed.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::TemporalEdgeList;
use crate::error::{Error, Result};
use crate::model::{Axis, Triclustering};

/// Seed for sub-stream `stream` of `seed` (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const NOISE_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorMode {
    /// The time-varying block pattern.
    #[default]
    Temporal,
    /// The block pattern with its timestamps shuffled.
    Shuffled,
    /// Uniform sources, destinations and timestamps.
    ErdosRenyi,
}

impl std::str::FromStr for GeneratorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temporal" => Ok(Self::Temporal),
            "shuffled" => Ok(Self::Shuffled),
            "erdos_renyi" => Ok(Self::ErdosRenyi),
            other => Err(Error::Value(format!("unknown generator mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Clusters per side.
    pub k: usize,
    pub n_sources: usize,
    pub n_destinations: usize,
    pub m: usize,
    pub seed: u64,
    /// Fraction of edges whose three fields are resampled uniformly.
    pub noise_fraction: f64,
    pub mode: GeneratorMode,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            k: 5,
            n_sources: 50,
            n_destinations: 50,
            m: 1 << 12,
            seed: 0,
            noise_fraction: 0.0,
            mode: GeneratorMode::Temporal,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Value("k must be at least 1".into()));
        }
        if self.n_sources < self.k || self.n_destinations < self.k {
            return Err(Error::Value("each side needs at least k vertices".into()));
        }
        if self.m < 1 {
            return Err(Error::Value("m must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_fraction) {
            return Err(Error::Value("noise fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Planted cluster labels of the vertices of a generated edge list, indexed
/// like the edge list's vertex universes.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub source: Vec<u32>,
    pub destination: Vec<u32>,
}

impl GroundTruth {
    /// Two-column `vertex,cluster` rows for one axis.
    pub fn write<W: Write>(&self, mut out: W, edges: &TemporalEdgeList, axis: Axis) -> Result<()> {
        let (ids, labels) = match axis {
            Axis::Source => (edges.source_ids(), &self.source),
            Axis::Destination => (edges.destination_ids(), &self.destination),
            Axis::Time => return Err(Error::Value("ground truth covers vertex axes only".into())),
        };
        writeln!(out, "vertex,cluster")?;
        for (id, label) in ids.iter().zip(labels) {
            writeln!(out, "{id},{label}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub edges: TemporalEdgeList,
    pub truth: GroundTruth,
}

/// Balanced labels for `n` vertices in `k` contiguous clusters; the first
/// `n mod k` clusters get one extra vertex.
pub fn balanced_labels(n: usize, k: usize) -> Vec<u32> {
    let (base, extra) = (n / k, n % k);
    let mut labels = Vec::with_capacity(n);
    for c in 0..k {
        let size = base + usize::from(c < extra);
        labels.extend(std::iter::repeat_n(c as u32, size));
    }
    labels
}

fn cluster_ranges(n: usize, k: usize) -> Vec<std::ops::Range<usize>> {
    let (base, extra) = (n / k, n % k);
    let mut start = 0;
    (0..k)
        .map(|c| {
            let size = base + usize::from(c < extra);
            let range = start..start + size;
            start += size;
            range
        })
        .collect()
}

/// Diagonal and off-diagonal entries of `Θ(t)`.
fn theta_entries(t: f64, k: usize) -> (f64, f64) {
    let k_f = k as f64;
    let diagonal = (0.9 * t + 0.1 * (1.0 - t)) / k_f;
    if k == 1 {
        return (1.0, 0.0);
    }
    let off = (0.1 * t + 0.9 * (1.0 - t)) / (k_f * (k_f - 1.0));
    (diagonal, off)
}

/// The `k × k` cluster-pair distribution at time `t ∈ [0, 1]`.
pub fn theta(t: f64, k: usize) -> Result<Vec<Vec<f64>>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Value(format!("t = {t} outside [0, 1]")));
    }
    if k == 0 {
        return Err(Error::Value("k must be at least 1".into()));
    }
    let (diagonal, off) = theta_entries(t, k);
    Ok((0..k).map(|i| (0..k).map(|j| if i == j { diagonal } else { off }).collect()).collect())
}

fn source_id(v: usize) -> String {
    format!("s{v}")
}

fn destination_id(v: usize) -> String {
    format!("d{v}")
}

/// Generates a benchmark data set with its planted partitions.
pub fn generate(config: &GeneratorConfig) -> Result<Generated> {
    config.validate()?;
    let source_labels = balanced_labels(config.n_sources, config.k);
    let destination_labels = balanced_labels(config.n_destinations, config.k);
    let mut edges = match config.mode {
        GeneratorMode::ErdosRenyi => {
            erdos_renyi_temporal(config.n_sources, config.n_destinations, config.m, config.seed)?
        }
        GeneratorMode::Temporal | GeneratorMode::Shuffled => block_pattern(config)?,
    };
    if config.noise_fraction > 0.0 {
        edges = reallocate(&edges, config.noise_fraction, derive_seed(config.seed, NOISE_STREAM))?;
    }
    if config.mode == GeneratorMode::Shuffled {
        edges = shuffle_time(&edges, derive_seed(config.seed, SHUFFLE_STREAM));
    }
    let truth_of = |ids: &[String], labels: &[u32]| -> Vec<u32> {
        ids.iter()
            .map(|id| {
                let v: usize = id[1..].parse().expect("generated ids carry their vertex number");
                if config.mode == GeneratorMode::ErdosRenyi {
                    0
                } else {
                    labels[v]
                }
            })
            .collect()
    };
    let truth = GroundTruth {
        source: truth_of(edges.source_ids(), &source_labels),
        destination: truth_of(edges.destination_ids(), &destination_labels),
    };
    Ok(Generated { edges, truth })
}

fn block_pattern(config: &GeneratorConfig) -> Result<TemporalEdgeList> {
    let k = config.k;
    let source_ranges = cluster_ranges(config.n_sources, k);
    let destination_ranges = cluster_ranges(config.n_destinations, k);
    let mut rng = rng_for(config.seed);
    let mut records = Vec::with_capacity(config.m);
    for _ in 0..config.m {
        let t: f64 = rng.random();
        let (diagonal, _) = theta_entries(t, k);
        let diagonal_mass = diagonal * k as f64;
        let (u, v) = if k == 1 || rng.random::<f64>() < diagonal_mass {
            let c = rng.random_range(0..k);
            (c, c)
        } else {
            // Uniform over the k(k-1) off-diagonal pairs.
            let u = rng.random_range(0..k);
            let mut v = rng.random_range(0..k - 1);
            if v >= u {
                v += 1;
            }
            (u, v)
        };
        let s = rng.random_range(source_ranges[u].clone());
        let d = rng.random_range(destination_ranges[v].clone());
        records.push((source_id(s), destination_id(d), t));
    }
    TemporalEdgeList::from_records(records)
}

/// Uniform temporal random graph: every field of every edge is independent
/// and uniform.
pub fn erdos_renyi_temporal(
    n_sources: usize,
    n_destinations: usize,
    m: usize,
    seed: u64,
) -> Result<TemporalEdgeList> {
    if n_sources == 0 || n_destinations == 0 || m == 0 {
        return Err(Error::Value("sizes must be at least 1".into()));
    }
    let mut rng = rng_for(seed);
    let records: Vec<_> = (0..m)
        .map(|_| {
            let s = rng.random_range(0..n_sources);
            let d = rng.random_range(0..n_destinations);
            let t: f64 = rng.random();
            (source_id(s), destination_id(d), t)
        })
        .collect();
    TemporalEdgeList::from_records(records)
}

/// Resamples the three fields of `⌊fraction · m⌋` uniformly chosen edges:
/// source and destination uniformly over the universes, timestamp uniformly
/// over the observed raw-time range (the rank range when there are no raw
/// times). The universes are kept even if a vertex loses all its edges.
pub fn reallocate(edges: &TemporalEdgeList, fraction: f64, seed: u64) -> Result<TemporalEdgeList> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Value("fraction must lie in [0, 1]".into()));
    }
    let m = edges.len();
    let count = (fraction * m as f64).floor() as usize;
    if count == 0 {
        return Ok(edges.clone());
    }
    let mut rng = rng_for(seed);
    let mut sources = edges.sources().to_vec();
    let mut destinations = edges.destinations().to_vec();
    let mut raw: Vec<f64> = match edges.raw_times() {
        Some(raw) => raw.to_vec(),
        None => edges.time_ranks().iter().map(|&r| r as f64).collect(),
    };
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let chosen = rand::seq::index::sample(&mut rng, m, count);
    for n in chosen.iter() {
        sources[n] = rng.random_range(0..edges.n_sources()) as u32;
        destinations[n] = rng.random_range(0..edges.n_destinations()) as u32;
        raw[n] = lo + (hi - lo) * rng.random::<f64>();
    }
    let ranks = crate::data::rank_transform(&raw)?;
    Ok(edges.replace_edges(sources, destinations, ranks, Some(raw)))
}

/// Permutes the timestamps uniformly across edges.
pub fn shuffle_time(edges: &TemporalEdgeList, seed: u64) -> TemporalEdgeList {
    let mut rng = rng_for(seed);
    let mut perm: Vec<usize> = (0..edges.len()).collect();
    perm.shuffle(&mut rng);
    let ranks = perm.iter().map(|&p| edges.time_ranks()[p]).collect();
    let raw = edges.raw_times().map(|raw| perm.iter().map(|&p| raw[p]).collect());
    edges.replace_edges(edges.sources().to_vec(), edges.destinations().to_vec(), ranks, raw)
}

/// Draws a data set from the model's generative mechanism: a uniform
/// edge-to-cell mapping honouring `μ`, uniform edge-to-vertex mappings
/// honouring the degrees inside each cluster, and a uniform order of the
/// edges inside each time interval. The result is compatible with `model`.
pub fn sample_from_model(model: &Triclustering, seed: u64) -> TemporalEdgeList {
    let mut rng = rng_for(seed);
    let mut cells: Vec<(u32, u32, u32)> = Vec::with_capacity(model.m() as usize);
    for (&key, &c) in model.cube() {
        cells.extend(std::iter::repeat_n(key, c as usize));
    }
    cells.shuffle(&mut rng);

    let vertex_pools = |members: Vec<Vec<u32>>, degrees: &[u64], rng: &mut ChaCha8Rng| {
        members
            .into_iter()
            .map(|vs| {
                let mut pool: Vec<u32> = vs
                    .iter()
                    .flat_map(|&v| std::iter::repeat_n(v, degrees[v as usize] as usize))
                    .collect();
                pool.shuffle(rng);
                pool
            })
            .collect::<Vec<_>>()
    };
    let mut source_pools = vertex_pools(model.members(Axis::Source), model.out_degrees(), &mut rng);
    let mut destination_pools =
        vertex_pools(model.members(Axis::Destination), model.in_degrees(), &mut rng);
    let mut rank_pools: Vec<Vec<u32>> = model
        .time_boundaries()
        .windows(2)
        .map(|w| {
            let mut ranks: Vec<u32> = (w[0] + 1..=w[1]).collect();
            ranks.shuffle(&mut rng);
            ranks
        })
        .collect();

    let mut sources = Vec::with_capacity(cells.len());
    let mut destinations = Vec::with_capacity(cells.len());
    let mut ranks = Vec::with_capacity(cells.len());
    for &(i, j, l) in &cells {
        sources.push(source_pools[i as usize].pop().expect("degrees match marginals"));
        destinations.push(destination_pools[j as usize].pop().expect("degrees match marginals"));
        ranks.push(rank_pools[l as usize].pop().expect("interval sizes match marginals"));
    }
    TemporalEdgeList::from_indexed(model.n_sources(), model.n_destinations(), sources, destinations, ranks)
        .expect("sampled edges are well formed")
}

/// Splits `total` as evenly as possible over `n` parts, remainder first.
fn even_split(total: u64, n: usize) -> Vec<u64> {
    let n64 = n as u64;
    (0..n64).map(|p| total / n64 + u64::from(p < total % n64)).collect()
}

/// Builds a model from a cube of proportions scaled to `m` edges, with
/// `vertices` vertices per cluster and evenly spread degrees. Counts are
/// rounded down and the remainder goes to the largest cell.
fn scaled_model(proportions: &[((u32, u32, u32), f64)], m: u64, vertices: usize) -> Result<Triclustering> {
    let mut cube: BTreeMap<(u32, u32, u32), u64> =
        proportions.iter().map(|&(key, p)| (key, (p * m as f64).floor() as u64)).collect();
    let assigned: u64 = cube.values().sum();
    let largest = proportions
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(key, _)| key)
        .ok_or_else(|| Error::Value("empty proportion table".into()))?;
    *cube.get_mut(&largest).expect("present") += m - assigned;
    cube.retain(|_, c| *c > 0);
    let k_s = proportions.iter().map(|p| p.0 .0 as usize + 1).max().unwrap_or(1);
    let k_d = proportions.iter().map(|p| p.0 .1 as usize + 1).max().unwrap_or(1);
    let mut sigma = vec![0u64; k_s];
    let mut delta = vec![0u64; k_d];
    for (&(i, j, _), &c) in &cube {
        sigma[i as usize] += c;
        delta[j as usize] += c;
    }
    let labels = |k: usize| (0..k as u32).flat_map(|c| std::iter::repeat_n(c, vertices)).collect::<Vec<_>>();
    let degrees = |marg: &[u64]| marg.iter().flat_map(|&t| even_split(t, vertices)).collect::<Vec<_>>();
    Triclustering::from_parameters(labels(k_s), labels(k_d), cube, degrees(&sigma), degrees(&delta))
}

/// A fixed planted model with two source clusters of distinct profiles
/// over two destination clusters and two time segments, scaled to `m`
/// edges (10 vertices per cluster). Source cluster 0 carries 60% of the
/// edges. Used to watch the per-edge merge dissimilarity approach its
/// Jensen–Shannon limit as `m` grows.
pub fn two_profile_model(m: u64) -> Result<Triclustering> {
    if m < 100 {
        return Err(Error::Value("the planted profile model needs at least 100 edges".into()));
    }
    let first = [0.35, 0.15, 0.10, 0.40];
    let second = [0.10, 0.40, 0.35, 0.15];
    let mut table = Vec::new();
    for (i, (profile, weight)) in [(first, 0.6), (second, 0.4)].into_iter().enumerate() {
        for (cell, p) in profile.into_iter().enumerate() {
            let (j, l) = ((cell % 2) as u32, (cell / 2) as u32);
            table.push(((i as u32, j, l), weight * p));
        }
    }
    scaled_model(&table, m, 10)
}

/// The small illustrative model used throughout the documentation: six
/// sources in clusters `{1,2,3}, {4,5}, {6}`, eight destinations `a..h` in
/// clusters `{a..e}, {f,g,h}`, 50 edges and three time segments. Vertex
/// indices follow that order (source `1` is index 0, destination `a` is
/// index 0).
pub fn worked_example_model() -> Triclustering {
    let tables: [[[u64; 2]; 3]; 3] = [
        [[5, 1], [2, 0], [4, 0]],
        [[2, 2], [2, 5], [5, 5]],
        [[0, 0], [1, 0], [1, 15]],
    ];
    let mut cube = BTreeMap::new();
    for (l, table) in tables.iter().enumerate() {
        for (i, row) in table.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    cube.insert((i as u32, j as u32, l as u32), c);
                }
            }
        }
    }
    Triclustering::from_parameters(
        vec![0, 0, 0, 1, 1, 2],
        vec![0, 0, 0, 0, 0, 1, 1, 1],
        cube,
        vec![3, 6, 1, 2, 8, 30],
        vec![3, 6, 2, 6, 5, 13, 8, 7],
    )
    .expect("the worked example is consistent")
}

fn pairs(n: u64) -> f64 {
    (n as f64) * (n.saturating_sub(1) as f64) / 2.0
}

/// Adjusted Rand index between two labelings of the same elements.
pub fn recovery_score(found: &[u32], truth: &[u32]) -> Result<f64> {
    if found.len() != truth.len() {
        return Err(Error::Dimension(found.len(), truth.len()));
    }
    let mut joint: HashMap<(u32, u32), u64> = HashMap::new();
    let mut left: HashMap<u32, u64> = HashMap::new();
    let mut right: HashMap<u32, u64> = HashMap::new();
    for (&a, &b) in found.iter().zip(truth) {
        *joint.entry((a, b)).or_default() += 1;
        *left.entry(a).or_default() += 1;
        *right.entry(b).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&n| pairs(n)).sum();
    let sum_left: f64 = left.values().map(|&n| pairs(n)).sum();
    let sum_right: f64 = right.values().map(|&n| pairs(n)).sum();
    let total = pairs(found.len() as u64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_left * sum_right / total;
    let max = 0.5 * (sum_left + sum_right);
    if max == expected {
        return Ok(if index == max { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}
