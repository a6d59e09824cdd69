//! Search for the minimum-cost triclustering.
//!
//! The search starts from the finest model (one cluster per vertex and
//! `⌈√m⌉` equal-frequency time intervals by default) and merges greedily:
//! at every step the single legal merge (two source clusters, two destination
//! clusters or two adjacent time intervals) with the most negative cost
//! change is applied, until no merge lowers the cost.
//!
//! On sparse data that greedy stops almost immediately: while the count
//! cube has far more cells than edges, every single merge raises the cost.
//! [`vns_fit`] therefore wraps it in a variable neighborhood search over
//! random initial solutions. Round 0 is the plain greedy from the initial
//! solution. Every later round at neighborhood level `ℓ` draws a random
//! model: each vertex axis is labelled at random with `max(2, ⌈n / 2^ℓ⌉)`
//! labels and time is cut into `2^u` equal-frequency segments, `u` uniform
//! in `0..ℓ`. The round then descends: vertex reassignment
//! ([`refine_reassign`]), boundary shifting ([`refine_boundaries`]) and
//! greedy merging in turn, until a full cycle brings no improvement. It then
//! splits time back into the initial intervals and descends again, keeping
//! the cheaper of the two results.
//!
//! Rounds run in batches of [`BATCH_WIDTH`]; the rounds of a batch use the
//! consecutive levels `ℓ, ℓ+1, …` (wrapping after `max_neighborhood_level`).
//! `ℓ` resets to 1 after a batch that improves the incumbent and advances by
//! one otherwise. When `restarts > 1`, the null model is evaluated once and
//! competes with every round. Each round has its own derived seed and
//! batches have a fixed width, so results depend only on the seed, never on
//! the thread count.

use std::collections::HashMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{ln_compositions, log_factorial, CombinatoricsCache};
use crate::criterion::{self, Cost};
use crate::data::TemporalEdgeList;
use crate::error::{Error, Result};
use crate::model::{canonical_labels, equal_frequency_boundaries, Axis, Triclustering};
use crate::search::MergeState;
use crate::synthgen::{derive_seed, rng_for};

/// Perturbations evaluated per VNS batch.
pub const BATCH_WIDTH: usize = 4;

/// Merges are accepted only below this (negative) threshold, which keeps the
/// search from cycling on rounding noise.
pub const IMPROVEMENT_EPS: f64 = 1e-9;

/// Number of initial equal-frequency time intervals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// `⌈√m⌉` intervals.
    #[default]
    Auto,
    /// One interval per rank.
    Full,
    /// A fixed number of intervals (capped at `m`).
    Intervals(u64),
}

impl Granularity {
    pub fn intervals(self, m: u64) -> u64 {
        let g = match self {
            Granularity::Auto => (m as f64).sqrt().ceil() as u64,
            Granularity::Full => m,
            Granularity::Intervals(g) => g,
        };
        g.clamp(1, m.max(1))
    }
}

impl std::str::FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "full" => Ok(Self::Full),
            other => match other.parse::<u64>() {
                Ok(g) if g >= 1 => Ok(Self::Intervals(g)),
                _ => Err(Error::Value(format!("granularity must be 'auto', 'full' or a positive integer, got '{other}'"))),
            },
        }
    }
}

impl std::fmt::Display for Granularity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Granularity::Auto => f.write_str("auto"),
            Granularity::Full => f.write_str("full"),
            Granularity::Intervals(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Total number of search rounds, the plain greedy included.
    pub restarts: usize,
    pub max_neighborhood_level: u32,
    pub seed: u64,
    pub initial_time_granularity: Granularity,
    pub time_budget: Option<Duration>,
    /// Evaluate the perturbations of a batch on several threads. Results do
    /// not depend on this flag.
    pub parallel_restarts: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_neighborhood_level: 4,
            seed: 0,
            initial_time_granularity: Granularity::Auto,
            time_budget: None,
            parallel_restarts: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::Value("restarts must be at least 1".into()));
        }
        if self.max_neighborhood_level < 1 {
            return Err(Error::Value("the neighborhood level must be at least 1".into()));
        }
        Ok(())
    }
}

/// The finest model: singleton vertex clusters and equal-frequency time
/// intervals.
pub fn initial_solution(edges: &TemporalEdgeList, granularity: Granularity) -> Result<Triclustering> {
    if edges.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let parts = granularity.intervals(edges.m());
    Triclustering::compute_counts(
        edges,
        (0..edges.n_sources() as u32).collect(),
        (0..edges.n_destinations() as u32).collect(),
        equal_frequency_boundaries(edges.m(), parts),
    )
}

/// Result of a greedy merge run.
#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub model: Triclustering,
    pub cost: f64,
    pub merges: usize,
}

/// Greedy bottom-up merging until no single merge lowers the cost.
pub fn greedy_merge(model: &Triclustering) -> Result<Triclustering> {
    Ok(greedy_merge_outcome(model)?.model)
}

/// [`greedy_merge`] with the final cost and the number of merges applied.
pub fn greedy_merge_outcome(model: &Triclustering) -> Result<GreedyOutcome> {
    let start = criterion::cost(model)?.total;
    let mut state = MergeState::new(model, start)?;
    while let Some(choice) = state.best_merge([true; 3]) {
        if choice.delta >= -IMPROVEMENT_EPS {
            break;
        }
        state.apply(choice);
    }
    let merges = state.merges();
    let model = if merges == 0 { model.clone() } else { state.to_model() };
    Ok(GreedyOutcome { cost: state.cost(), model, merges })
}

/// Smallest cost change over every legal single merge, or `None` for the
/// null model. A value `≥ -1e-9` certifies merge-local optimality.
pub fn min_merge_delta(model: &Triclustering) -> Result<Option<f64>> {
    let state = MergeState::new(model, 0.0)?;
    Ok(state.all_deltas().into_iter().map(|c| c.delta).min_by(f64::total_cmp))
}

/// Single-vertex reassignment: each source and destination vertex is moved
/// to the existing cluster that lowers the cost most (emptying its old
/// cluster if it was alone), until no move lowers the cost.
pub fn refine_reassign(edges: &TemporalEdgeList, model: &Triclustering) -> Result<Triclustering> {
    model.check_compatible(edges)?;
    if model.k_s() < 2 && model.k_d() < 2 {
        return Ok(model.clone());
    }
    let mut source = model.source_assignment().to_vec();
    let mut destination = model.destination_assignment().to_vec();
    let time = model.time_assignment();
    let ranks_to_interval: Vec<u32> = edges.time_ranks().iter().map(|&r| time[r as usize - 1]).collect();
    let (k_s, k_d, k_t) = model.shape();
    let mut counts = [k_s, k_d];
    let mut moved_any = false;
    for _ in 0..32 {
        let mut moved = false;
        for axis in [Axis::Source, Axis::Destination] {
            let (own, other, other_k) = match axis {
                Axis::Source => (&mut source, &destination, counts[1]),
                _ => (&mut destination, &source, counts[0]),
            };
            let mut refiner = VertexRefiner::new(edges, axis, own, other, &ranks_to_interval, other_k * k_t)?;
            if refiner.run() {
                moved = true;
                *own = refiner.into_labels();
                counts[axis.index()] = own.iter().max().map_or(0, |&x| x as usize + 1);
            }
        }
        if !moved {
            break;
        }
        moved_any = true;
    }
    if !moved_any {
        return Ok(model.clone());
    }
    Triclustering::compute_counts(edges, source, destination, model.time_boundaries().to_vec())
}

/// Reassignment state for one vertex axis, the other two axes fixed.
struct VertexRefiner {
    m: u64,
    n: usize,
    /// Number of cells per cluster on this axis (product of the other two
    /// cluster counts).
    cells_per_cluster: u64,
    log_partitions: std::sync::Arc<Vec<f64>>,
    labels: Vec<u32>,
    k: usize,
    size: Vec<u64>,
    marginal: Vec<u64>,
    slices: Vec<HashMap<(u32, u32), u64>>,
    rows: Vec<Vec<((u32, u32), u64)>>,
    degrees: Vec<u64>,
}

impl VertexRefiner {
    fn new(
        edges: &TemporalEdgeList,
        axis: Axis,
        labels: &[u32],
        other: &[u32],
        intervals: &[u32],
        cells_per_cluster: usize,
    ) -> Result<Self> {
        let n = labels.len();
        let k = labels.iter().max().map_or(0, |&x| x as usize + 1);
        let (own_ids, other_ids) = match axis {
            Axis::Source => (edges.sources(), edges.destinations()),
            _ => (edges.destinations(), edges.sources()),
        };
        let mut row_maps: Vec<HashMap<(u32, u32), u64>> = vec![HashMap::new(); n];
        for e in 0..edges.len() {
            let key = (other[other_ids[e] as usize], intervals[e]);
            *row_maps[own_ids[e] as usize].entry(key).or_insert(0) += 1;
        }
        let mut rows: Vec<Vec<((u32, u32), u64)>> = row_maps
            .into_iter()
            .map(|r| {
                let mut v: Vec<_> = r.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        rows.shrink_to_fit();
        let degrees: Vec<u64> = rows.iter().map(|r| r.iter().map(|&(_, c)| c).sum()).collect();
        let mut size = vec![0u64; k];
        let mut marginal = vec![0u64; k];
        let mut slices: Vec<HashMap<(u32, u32), u64>> = vec![HashMap::new(); k];
        for v in 0..n {
            let c = labels[v] as usize;
            size[c] += 1;
            marginal[c] += degrees[v];
            for &(key, x) in &rows[v] {
                *slices[c].entry(key).or_insert(0) += x;
            }
        }
        Ok(Self {
            m: edges.m(),
            n,
            cells_per_cluster: cells_per_cluster as u64,
            log_partitions: CombinatoricsCache::shared().log_bell_row(n as u64)?,
            labels: labels.to_vec(),
            k,
            size,
            marginal,
            slices,
            rows,
            degrees,
        })
    }

    fn cluster_term(marginal: u64, size: u64) -> f64 {
        ln_compositions(marginal, size) + log_factorial(marginal)
    }

    /// Cost change of moving `v` from its cluster to `b`.
    fn move_delta(&self, v: usize, b: usize) -> f64 {
        let a = self.labels[v] as usize;
        let d = self.degrees[v];
        let mut delta = Self::cluster_term(self.marginal[a] - d, self.size[a] - 1)
            - Self::cluster_term(self.marginal[a], self.size[a])
            + Self::cluster_term(self.marginal[b] + d, self.size[b] + 1)
            - Self::cluster_term(self.marginal[b], self.size[b]);
        for &(key, x) in &self.rows[v] {
            let old_a = self.slices[a][&key];
            let old_b = self.slices[b].get(&key).copied().unwrap_or(0);
            delta += log_factorial(old_a) - log_factorial(old_a - x) + log_factorial(old_b)
                - log_factorial(old_b + x);
        }
        if self.size[a] == 1 {
            let k = self.k as u64;
            delta += self.log_partitions[self.k - 1] - self.log_partitions[self.k]
                + ln_compositions(self.m, (k - 1) * self.cells_per_cluster)
                - ln_compositions(self.m, k * self.cells_per_cluster);
        }
        delta
    }

    fn apply(&mut self, v: usize, b: usize) {
        let a = self.labels[v] as usize;
        let d = self.degrees[v];
        for &(key, x) in &self.rows[v] {
            let slot = self.slices[a].get_mut(&key).expect("vertex cells are in its cluster");
            *slot -= x;
            if *slot == 0 {
                self.slices[a].remove(&key);
            }
            *self.slices[b].entry(key).or_insert(0) += x;
        }
        self.marginal[a] -= d;
        self.marginal[b] += d;
        self.size[a] -= 1;
        self.size[b] += 1;
        if self.size[a] == 0 {
            self.k -= 1;
        }
        self.labels[v] = b as u32;
    }

    /// Runs passes over the vertices until one pass moves nothing. Returns
    /// whether any vertex moved.
    fn run(&mut self) -> bool {
        let mut moved_any = false;
        for _ in 0..64 {
            let mut moved = false;
            for v in 0..self.n {
                if self.degrees[v] == 0 {
                    continue;
                }
                let a = self.labels[v] as usize;
                let mut best: Option<(f64, usize)> = None;
                for b in 0..self.size.len() {
                    if b == a || self.size[b] == 0 {
                        continue;
                    }
                    let delta = self.move_delta(v, b);
                    if delta < -IMPROVEMENT_EPS && best.is_none_or(|(bd, _)| delta < bd) {
                        best = Some((delta, b));
                    }
                }
                if let Some((_, b)) = best {
                    self.apply(v, b);
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        moved_any
    }

    fn into_labels(self) -> Vec<u32> {
        canonical_labels(&self.labels)
    }
}

/// Time-boundary refinement: each boundary between two segments is moved
/// one rank at a time while that lowers the cost, keeping every segment
/// non-empty. Vertex partitions are left unchanged.
pub fn refine_boundaries(edges: &TemporalEdgeList, model: &Triclustering) -> Result<Triclustering> {
    model.check_compatible(edges)?;
    let k_t = model.k_t();
    if k_t < 2 {
        return Ok(model.clone());
    }
    let k_d = model.k_d() as u64;
    // Cell of the edge at each rank (0-based).
    let mut cell_at = vec![0u64; edges.len()];
    for (s, d, r) in edges.edges() {
        let i = model.source_assignment()[s as usize] as u64;
        let j = model.destination_assignment()[d as usize] as u64;
        cell_at[r as usize - 1] = i * k_d + j;
    }
    let mut bounds = model.time_boundaries().to_vec();
    let mut counts: Vec<HashMap<u64, u64>> = vec![HashMap::new(); k_t];
    for l in 0..k_t {
        for r in bounds[l]..bounds[l + 1] {
            *counts[l].entry(cell_at[r as usize]).or_insert(0) += 1;
        }
    }
    let ln = |x: u64| (x as f64).ln();
    let mut moved_any = false;
    for _ in 0..edges.len() {
        let mut moved = false;
        for l in 1..k_t {
            loop {
                let (left, right) = ((bounds[l] - bounds[l - 1]) as u64, (bounds[l + 1] - bounds[l]) as u64);
                let mut best: Option<(f64, bool)> = None;
                if left > 1 {
                    // The last edge of the left segment joins the right one.
                    let c = cell_at[bounds[l] as usize - 1];
                    let delta = -ln(left) + ln(right + 1) + ln(counts[l - 1][&c])
                        - ln(counts[l].get(&c).copied().unwrap_or(0) + 1);
                    if delta < -IMPROVEMENT_EPS {
                        best = Some((delta, true));
                    }
                }
                if right > 1 {
                    let c = cell_at[bounds[l] as usize];
                    let delta = -ln(right) + ln(left + 1) + ln(counts[l][&c])
                        - ln(counts[l - 1].get(&c).copied().unwrap_or(0) + 1);
                    if delta < -IMPROVEMENT_EPS && best.is_none_or(|(bd, _)| delta < bd) {
                        best = Some((delta, false));
                    }
                }
                let Some((_, leftward)) = best else { break };
                let (from, to, rank) = if leftward {
                    bounds[l] -= 1;
                    (l - 1, l, bounds[l])
                } else {
                    bounds[l] += 1;
                    (l, l - 1, bounds[l] - 1)
                };
                let c = cell_at[rank as usize];
                let slot = counts[from].get_mut(&c).expect("moved edge is counted");
                *slot -= 1;
                if *slot == 0 {
                    counts[from].remove(&c);
                }
                *counts[to].entry(c).or_insert(0) += 1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
        moved_any = true;
    }
    if !moved_any {
        return Ok(model.clone());
    }
    Triclustering::compute_counts(
        edges,
        model.source_assignment().to_vec(),
        model.destination_assignment().to_vec(),
        bounds,
    )
}

/// One row of the search report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Neighborhood level (0 for the initial greedy round).
    pub level: u32,
    /// Cost reached by this round.
    pub cost: f64,
    /// Best cost after this round.
    pub best_cost: f64,
    pub merges: usize,
    pub wall_seconds: f64,
    pub k_s: usize,
    pub k_d: usize,
    pub k_t: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub m: u64,
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
    /// The time budget ran out before all rounds completed.
    pub budget_exhausted: bool,
}

impl SearchReport {
    /// Comma-separated rows, one per round.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "round,level,cost,best_cost,merges,wall_seconds,k_s,k_d,k_t,m,seed")?;
        for r in &self.rounds {
            writeln!(
                out,
                "{},{},{:.9},{:.9},{},{:.6},{},{},{},{},{}",
                r.round, r.level, r.cost, r.best_cost, r.merges, r.wall_seconds, r.k_s, r.k_d, r.k_t, self.m, self.seed
            )?;
        }
        Ok(())
    }

    /// Total wall time over the rounds.
    pub fn wall_seconds(&self) -> f64 {
        self.rounds.iter().map(|r| r.wall_seconds).sum()
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub model: Triclustering,
    pub cost: Cost,
    pub report: SearchReport,
}

struct Candidate {
    model: Triclustering,
    cost: f64,
    merges: usize,
    wall: f64,
}

/// Reassignment, boundary refinement and greedy merging in turn until a full
/// cycle brings no improvement.
fn descend(edges: &TemporalEdgeList, start: &Triclustering) -> Result<(Triclustering, f64, usize)> {
    let mut current = start.clone();
    let mut current_cost = criterion::cost(start)?.total;
    let mut merges = 0;
    for _ in 0..32 {
        let refined = refine_boundaries(edges, &refine_reassign(edges, &current)?)?;
        let outcome = greedy_merge_outcome(&refined)?;
        if outcome.cost >= current_cost - IMPROVEMENT_EPS {
            break;
        }
        merges += outcome.merges;
        current = outcome.model;
        current_cost = outcome.cost;
    }
    Ok((current, current_cost, merges))
}

/// A random solution of level `level`: each vertex axis is labelled
/// uniformly at random with `max(2, ⌈n / 2^level⌉)` labels (capped at `n`)
/// and the time axis is cut into `2^u` equal-frequency segments, `u` uniform
/// in `0..level`.
fn random_start(edges: &TemporalEdgeList, level: u32, seed: u64) -> Result<Triclustering> {
    let mut rng = rng_for(seed);
    let level = level.clamp(1, 30);
    let mut labels = |n: usize| -> Vec<u32> {
        let groups = n.div_ceil(1usize << level).max(2).min(n) as u32;
        canonical_labels(&(0..n).map(|_| rng.random_range(0..groups)).collect::<Vec<_>>())
    };
    let source = labels(edges.n_sources());
    let destination = labels(edges.n_destinations());
    let segments = 1u64 << rng.random_range(0..level);
    Triclustering::compute_counts(edges, source, destination, equal_frequency_boundaries(edges.m(), segments))
}

/// Splits every time segment of `model` back into the intervals of `grid`.
fn resplit_time(edges: &TemporalEdgeList, model: &Triclustering, grid: &[u32]) -> Result<Triclustering> {
    Triclustering::compute_counts(
        edges,
        model.source_assignment().to_vec(),
        model.destination_assignment().to_vec(),
        grid.to_vec(),
    )
}

/// One search round: descent from a random start with a single time
/// segment, then a second descent after splitting time back to the grid.
fn search_round(edges: &TemporalEdgeList, grid: &[u32], level: u32, seed: u64) -> Result<Candidate> {
    let t = Instant::now();
    let start = random_start(edges, level, seed)?;
    let (coarse, coarse_cost, coarse_merges) = descend(edges, &start)?;
    let (fine, fine_cost, fine_merges) = descend(edges, &resplit_time(edges, &coarse, grid)?)?;
    let merges = coarse_merges + fine_merges;
    let (model, cost) = if fine_cost < coarse_cost { (fine, fine_cost) } else { (coarse, coarse_cost) };
    Ok(Candidate { model, cost, merges, wall: t.elapsed().as_secs_f64() })
}

/// Fits a triclustering with the variable neighborhood search described in
/// the module documentation.
pub fn vns_fit(edges: &TemporalEdgeList, config: &SearchConfig) -> Result<FitResult> {
    config.validate()?;
    if edges.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let started = Instant::now();
    let mut report = SearchReport { m: edges.m(), seed: config.seed, ..Default::default() };
    if edges.m() == 1 {
        let model = Triclustering::null_model(edges);
        let cost = criterion::cost(&model)?;
        report.rounds.push(record(0, 0, &model, cost.total, cost.total, 0, started.elapsed()));
        return Ok(FitResult { model, cost, report });
    }

    let initial = initial_solution(edges, config.initial_time_granularity)?;
    let grid = initial.time_boundaries().to_vec();
    let round_start = Instant::now();
    let first = greedy_merge_outcome(&initial)?;
    let mut best = first.model;
    let mut best_cost = first.cost;
    report.rounds.push(record(0, 0, &best, best_cost, best_cost, first.merges, round_start.elapsed()));
    if config.restarts > 1 {
        // The null model competes with every round, so the search never
        // returns a model worse than "no structure".
        let null = Triclustering::null_model(edges);
        let null_cost = criterion::cost(&null)?.total;
        if null_cost < best_cost - IMPROVEMENT_EPS {
            best = null;
            best_cost = null_cost;
        }
    }

    let out_of_time = |report: &mut SearchReport| -> bool {
        match config.time_budget {
            Some(budget) if started.elapsed() >= budget => {
                report.budget_exhausted = true;
                true
            }
            _ => false,
        }
    };

    let mut level = 1u32;
    let mut round = 1usize;
    let mut batch = 0u64;
    while round < config.restarts && !out_of_time(&mut report) {
        let width = BATCH_WIDTH.min(config.restarts - round);
        let levels = config.max_neighborhood_level;
        let jobs: Vec<(usize, u32, u64)> = (0..width)
            .map(|w| {
                let job_level = (level - 1 + w as u32) % levels + 1;
                (round + w, job_level, derive_seed(config.seed, (batch << 8) | w as u64))
            })
            .collect();
        let run = |&(_, job_level, seed): &(usize, u32, u64)| search_round(edges, &grid, job_level, seed);
        let results: Vec<Result<Candidate>> = if config.parallel_restarts {
            jobs.par_iter().map(run).collect()
        } else {
            jobs.iter().map(run).collect()
        };
        let mut improved = false;
        for ((r, job_level, _), result) in jobs.iter().zip(results) {
            let candidate = result?;
            if candidate.cost < best_cost - IMPROVEMENT_EPS {
                best_cost = candidate.cost;
                best = candidate.model.clone();
                improved = true;
            }
            report.rounds.push(record(
                *r,
                *job_level,
                &candidate.model,
                candidate.cost,
                best_cost,
                candidate.merges,
                Duration::from_secs_f64(candidate.wall),
            ));
        }
        level = if improved || level >= config.max_neighborhood_level { 1 } else { level + 1 };
        round += width;
        batch += 1;
    }
    let cost = criterion::cost(&best)?;
    Ok(FitResult { model: best, cost, report })
}

fn record(
    round: usize,
    level: u32,
    model: &Triclustering,
    cost: f64,
    best_cost: f64,
    merges: usize,
    wall: Duration,
) -> RoundRecord {
    RoundRecord {
        round,
        level,
        cost,
        best_cost,
        merges,
        wall_seconds: wall.as_secs_f64(),
        k_s: model.k_s(),
        k_d: model.k_d(),
        k_t: model.k_t(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::cost;

    fn small() -> TemporalEdgeList {
        let rows: Vec<(String, String, f64)> = (0..40)
            .map(|n| {
                let s = n % 4;
                let d = if n < 20 { s % 2 } else { 2 + (s % 2) };
                (format!("s{s}"), format!("d{d}"), n as f64)
            })
            .collect();
        TemporalEdgeList::from_records(rows).unwrap()
    }

    #[test]
    fn initial_solution_shapes() {
        let nine = TemporalEdgeList::from_indexed(1, 1, vec![0; 9], vec![0; 9], (1..=9).collect()).unwrap();
        let model = initial_solution(&nine, Granularity::Auto).unwrap();
        assert_eq!(model.time_boundaries(), [0, 3, 6, 9]);
        let four = TemporalEdgeList::from_indexed(2, 2, vec![0, 1, 0, 1], vec![0, 0, 1, 1], vec![1, 2, 3, 4]).unwrap();
        assert_eq!(initial_solution(&four, Granularity::Full).unwrap().k_t(), 4);
    }

    #[test]
    fn granularity_parsing() {
        assert_eq!("auto".parse::<Granularity>().unwrap(), Granularity::Auto);
        assert_eq!("full".parse::<Granularity>().unwrap(), Granularity::Full);
        assert_eq!("7".parse::<Granularity>().unwrap(), Granularity::Intervals(7));
        assert!("0".parse::<Granularity>().is_err());
        assert_eq!(Granularity::Intervals(100).intervals(10), 10);
    }

    #[test]
    fn greedy_decreases_and_is_locally_optimal() {
        let e = small();
        let init = initial_solution(&e, Granularity::Full).unwrap();
        let out = greedy_merge_outcome(&init).unwrap();
        assert!(out.cost <= cost(&init).unwrap().total);
        assert!((cost(&out.model).unwrap().total - out.cost).abs() < 1e-8);
        if let Some(d) = min_merge_delta(&out.model).unwrap() {
            assert!(d >= -1e-9);
        }
    }

    #[test]
    fn refine_never_increases_cost_and_is_fixed_point() {
        let e = small();
        let start = Triclustering::compute_counts(&e, vec![0, 1, 0, 1], vec![0, 0, 1, 1], vec![0, 20, 40]).unwrap();
        let refined = refine_reassign(&e, &start).unwrap();
        assert!(cost(&refined).unwrap().total <= cost(&start).unwrap().total + 1e-9);
        assert_eq!(refine_reassign(&e, &refined).unwrap(), refined);
        let null = Triclustering::null_model(&e);
        assert_eq!(refine_reassign(&e, &null).unwrap(), null);
    }

    #[test]
    fn single_round_equals_greedy() {
        let e = small();
        let config = SearchConfig { restarts: 1, ..Default::default() };
        let fit = vns_fit(&e, &config).unwrap();
        let greedy = greedy_merge(&initial_solution(&e, Granularity::Auto).unwrap()).unwrap();
        assert_eq!(fit.model, greedy);
    }

    #[test]
    fn single_edge_returns_null() {
        let e = TemporalEdgeList::from_records([("a", "b", 1.0)]).unwrap();
        let fit = vns_fit(&e, &SearchConfig::default()).unwrap();
        assert!(fit.model.is_null());
        assert_eq!(fit.cost.total, 0.0);
    }
}
