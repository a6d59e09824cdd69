//! Triclustering models: three partitions and the sparse count cube they
//! induce on a data set.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::TemporalEdgeList;
use crate::error::{Error, Result};

/// One of the three clustered dimensions. The derived order
/// (source < destination < time) is the tie-breaking order of the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Source,
    Destination,
    Time,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Source, Axis::Destination, Axis::Time];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Source => "source",
            Axis::Destination => "destination",
            Axis::Time => "time",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" => Ok(Axis::Source),
            "destination" => Ok(Axis::Destination),
            "time" => Ok(Axis::Time),
            other => Err(Error::Value(format!("unknown axis '{other}'"))),
        }
    }
}

/// Cell key `(source cluster, destination cluster, time interval)`.
pub type CellKey = (u32, u32, u32);

/// A triclustering compatible with its data: partitions of sources and
/// destinations, an ordered interval partition of the ranks `1..=m`, and the
/// count cube `μ` with its marginals and the vertex degrees.
///
/// Cluster indices are zero based. Time boundaries are `k_T + 1` cut points
/// `0 = b_0 < b_1 < ... < b_kT = m`; interval `l` holds ranks
/// `b_l + 1 ..= b_{l+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Triclustering {
    source_assignment: Vec<u32>,
    destination_assignment: Vec<u32>,
    time_boundaries: Vec<u32>,
    cube: BTreeMap<CellKey, u64>,
    source_marginals: Vec<u64>,
    destination_marginals: Vec<u64>,
    time_marginals: Vec<u64>,
    out_degrees: Vec<u64>,
    in_degrees: Vec<u64>,
    source_sizes: Vec<u64>,
    destination_sizes: Vec<u64>,
    m: u64,
}

/// Relabels arbitrary cluster labels to `0..k` in order of first appearance.
pub fn canonical_labels(labels: &[u32]) -> Vec<u32> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len() as u32;
            *map.entry(l).or_insert(next)
        })
        .collect()
}

fn cluster_sizes(assignment: &[u32], axis: Axis) -> Result<Vec<u64>> {
    let k = assignment.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut sizes = vec![0u64; k];
    for &c in assignment {
        sizes[c as usize] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&n| n == 0) {
        return Err(Error::Invariant(format!("{axis} cluster {empty} is empty")));
    }
    if k == 0 {
        return Err(Error::Invariant(format!("{axis} partition has no clusters")));
    }
    Ok(sizes)
}

/// Cut points of the unique ordered interval partition with the given sizes.
pub fn time_partition_from_marginals(sizes: &[u64]) -> Result<Vec<u32>> {
    if sizes.is_empty() {
        return Err(Error::Value("no time intervals".into()));
    }
    let mut cuts = Vec::with_capacity(sizes.len() + 1);
    cuts.push(0u32);
    let mut acc = 0u64;
    for &s in sizes {
        if s == 0 {
            return Err(Error::Value("time interval sizes must be positive".into()));
        }
        acc += s;
        if acc > u32::MAX as u64 {
            return Err(Error::Value("time axis too long".into()));
        }
        cuts.push(acc as u32);
    }
    Ok(cuts)
}

fn check_boundaries(boundaries: &[u32], m: u64) -> Result<()> {
    if boundaries.len() < 2 || boundaries[0] != 0 || *boundaries.last().unwrap() as u64 != m {
        return Err(Error::Value(format!("time boundaries must run from 0 to m = {m}")));
    }
    if boundaries.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Value("time boundaries must be strictly increasing".into()));
    }
    Ok(())
}

/// Equal-frequency cut points splitting `1..=m` into `min(m, parts)` intervals.
pub fn equal_frequency_boundaries(m: u64, parts: u64) -> Vec<u32> {
    let parts = parts.clamp(1, m.max(1));
    (0..=parts).map(|p| ((p as u128 * m as u128) / parts as u128) as u32).collect()
}

impl Triclustering {
    /// Counts the edges of `edges` falling in each tricluster.
    ///
    /// Assignments must give every vertex a label; labels must be dense
    /// (`0..k` with every cluster used).
    pub fn compute_counts(
        edges: &TemporalEdgeList,
        source_assignment: Vec<u32>,
        destination_assignment: Vec<u32>,
        time_boundaries: Vec<u32>,
    ) -> Result<Self> {
        if source_assignment.len() < edges.n_sources() {
            return Err(Error::Coverage { axis: Axis::Source, vertex: source_assignment.len() });
        }
        if destination_assignment.len() < edges.n_destinations() {
            return Err(Error::Coverage {
                axis: Axis::Destination,
                vertex: destination_assignment.len(),
            });
        }
        if source_assignment.len() != edges.n_sources() {
            return Err(Error::Dimension(edges.n_sources(), source_assignment.len()));
        }
        if destination_assignment.len() != edges.n_destinations() {
            return Err(Error::Dimension(edges.n_destinations(), destination_assignment.len()));
        }
        let m = edges.m();
        check_boundaries(&time_boundaries, m)?;
        let source_sizes = cluster_sizes(&source_assignment, Axis::Source)?;
        let destination_sizes = cluster_sizes(&destination_assignment, Axis::Destination)?;

        let interval_of_rank = interval_lookup(&time_boundaries);
        let cell_of = |(s, d, r): (u32, u32, u32)| -> CellKey {
            (
                source_assignment[s as usize],
                destination_assignment[d as usize],
                interval_of_rank[r as usize - 1],
            )
        };
        let cube = count_cells(edges, cell_of);

        let mut model = Self {
            out_degrees: edges.out_degrees(),
            in_degrees: edges.in_degrees(),
            source_marginals: Vec::new(),
            destination_marginals: Vec::new(),
            time_marginals: Vec::new(),
            source_assignment,
            destination_assignment,
            time_boundaries,
            cube,
            source_sizes,
            destination_sizes,
            m,
        };
        model.fill_marginals();
        Ok(model)
    }

    /// The 1×1×1 model of a data set.
    pub fn null_model(edges: &TemporalEdgeList) -> Self {
        Self::compute_counts(
            edges,
            vec![0; edges.n_sources()],
            vec![0; edges.n_destinations()],
            vec![0, edges.m() as u32],
        )
        .expect("null partitions always cover the data")
    }

    /// Builds a model from its free parameters: vertex partitions, cube and
    /// degrees. The time partition is derived from the cube's time marginals.
    /// Fails if the degree-consistency constraints do not hold.
    pub fn from_parameters(
        source_assignment: Vec<u32>,
        destination_assignment: Vec<u32>,
        cube: BTreeMap<CellKey, u64>,
        out_degrees: Vec<u64>,
        in_degrees: Vec<u64>,
    ) -> Result<Self> {
        if out_degrees.len() != source_assignment.len() {
            return Err(Error::Dimension(source_assignment.len(), out_degrees.len()));
        }
        if in_degrees.len() != destination_assignment.len() {
            return Err(Error::Dimension(destination_assignment.len(), in_degrees.len()));
        }
        let source_sizes = cluster_sizes(&source_assignment, Axis::Source)?;
        let destination_sizes = cluster_sizes(&destination_assignment, Axis::Destination)?;
        let k_t = cube.keys().map(|&(_, _, l)| l as usize + 1).max().unwrap_or(0);
        let mut time_marginals = vec![0u64; k_t];
        for (&(i, j, l), &c) in &cube {
            if i as usize >= source_sizes.len() || j as usize >= destination_sizes.len() {
                return Err(Error::Invariant(format!("cell ({i},{j},{l}) outside the partitions")));
            }
            time_marginals[l as usize] += c;
        }
        let time_boundaries = time_partition_from_marginals(&time_marginals)?;
        let m = time_marginals.iter().sum();
        let mut model = Self {
            source_assignment,
            destination_assignment,
            time_boundaries,
            cube: cube.into_iter().filter(|&(_, c)| c > 0).collect(),
            source_marginals: Vec::new(),
            destination_marginals: Vec::new(),
            time_marginals: Vec::new(),
            out_degrees,
            in_degrees,
            source_sizes,
            destination_sizes,
            m,
        };
        model.fill_marginals();
        model.validate()?;
        Ok(model)
    }

    /// Assembles a model from partitions and a cube already known to be
    /// consistent with them (used by the search code).
    pub(crate) fn assemble(
        source_assignment: Vec<u32>,
        destination_assignment: Vec<u32>,
        time_boundaries: Vec<u32>,
        cube: BTreeMap<CellKey, u64>,
        out_degrees: Vec<u64>,
        in_degrees: Vec<u64>,
    ) -> Self {
        let source_sizes = cluster_sizes(&source_assignment, Axis::Source).expect("dense source labels");
        let destination_sizes =
            cluster_sizes(&destination_assignment, Axis::Destination).expect("dense destination labels");
        let m = *time_boundaries.last().expect("non-empty boundaries") as u64;
        let mut model = Self {
            source_assignment,
            destination_assignment,
            time_boundaries,
            cube,
            source_marginals: Vec::new(),
            destination_marginals: Vec::new(),
            time_marginals: Vec::new(),
            out_degrees,
            in_degrees,
            source_sizes,
            destination_sizes,
            m,
        };
        model.fill_marginals();
        debug_assert!(model.validate().is_ok());
        model
    }

    fn fill_marginals(&mut self) {
        let mut sigma = vec![0u64; self.source_sizes.len()];
        let mut delta = vec![0u64; self.destination_sizes.len()];
        let mut tau = vec![0u64; self.time_boundaries.len() - 1];
        for (&(i, j, l), &c) in &self.cube {
            sigma[i as usize] += c;
            delta[j as usize] += c;
            tau[l as usize] += c;
        }
        self.source_marginals = sigma;
        self.destination_marginals = delta;
        self.time_marginals = tau;
    }

    /// Checks every structural invariant: cube total, degree consistency,
    /// interval sizes, non-empty clusters.
    pub fn validate(&self) -> Result<()> {
        let total: u64 = self.cube.values().sum();
        if total != self.m {
            return Err(Error::Invariant(format!("cube holds {total} edges, expected {}", self.m)));
        }
        let mut out_sum = vec![0u64; self.k_s()];
        for (s, &c) in self.source_assignment.iter().enumerate() {
            out_sum[c as usize] += self.out_degrees[s];
        }
        if out_sum != self.source_marginals {
            return Err(Error::Invariant("out-degrees disagree with source marginals".into()));
        }
        let mut in_sum = vec![0u64; self.k_d()];
        for (d, &c) in self.destination_assignment.iter().enumerate() {
            in_sum[c as usize] += self.in_degrees[d];
        }
        if in_sum != self.destination_marginals {
            return Err(Error::Invariant("in-degrees disagree with destination marginals".into()));
        }
        for (l, w) in self.time_boundaries.windows(2).enumerate() {
            if (w[1] - w[0]) as u64 != self.time_marginals[l] {
                return Err(Error::Invariant(format!("time interval {l} size mismatch")));
            }
        }
        if self.source_sizes.iter().chain(&self.destination_sizes).any(|&n| n == 0) {
            return Err(Error::Invariant("empty vertex cluster".into()));
        }
        Ok(())
    }

    /// Checks compatibility with a data set: same edge count, same degrees,
    /// and a cube equal to the counts the partitions induce on the data.
    pub fn check_compatible(&self, edges: &TemporalEdgeList) -> Result<()> {
        if edges.m() != self.m {
            return Err(Error::Incompatible(format!("m = {} but model has {}", edges.m(), self.m)));
        }
        if edges.n_sources() != self.n_sources() || edges.n_destinations() != self.n_destinations()
        {
            return Err(Error::Incompatible("vertex universes differ".into()));
        }
        if edges.out_degrees() != self.out_degrees {
            return Err(Error::Incompatible("out-degrees differ".into()));
        }
        if edges.in_degrees() != self.in_degrees {
            return Err(Error::Incompatible("in-degrees differ".into()));
        }
        let recount = Self::compute_counts(
            edges,
            self.source_assignment.clone(),
            self.destination_assignment.clone(),
            self.time_boundaries.clone(),
        )?;
        if recount.cube != self.cube {
            return Err(Error::Incompatible("count cube differs".into()));
        }
        Ok(())
    }

    /// Returns the model with clusters `a` and `b` of `axis` merged. The
    /// merged cluster takes the smaller index; higher indices shift down.
    /// Time merges require adjacent intervals.
    pub fn merged(&self, axis: Axis, a: usize, b: usize) -> Result<Self> {
        let k = self.k(axis);
        if a == b || a >= k || b >= k {
            return Err(Error::Value(format!("invalid {axis} merge ({a}, {b}) with k = {k}")));
        }
        if axis == Axis::Time && a.abs_diff(b) != 1 {
            return Err(Error::NonAdjacentTime(a, b));
        }
        let (keep, gone) = (a.min(b) as u32, a.max(b) as u32);
        let remap = |c: u32| -> u32 {
            match c.cmp(&gone) {
                std::cmp::Ordering::Less => c,
                std::cmp::Ordering::Equal => keep,
                std::cmp::Ordering::Greater => c - 1,
            }
        };
        let mut next = self.clone();
        match axis {
            Axis::Source => {
                next.source_assignment.iter_mut().for_each(|c| *c = remap(*c));
                let moved = next.source_sizes.remove(gone as usize);
                next.source_sizes[keep as usize] += moved;
            }
            Axis::Destination => {
                next.destination_assignment.iter_mut().for_each(|c| *c = remap(*c));
                let moved = next.destination_sizes.remove(gone as usize);
                next.destination_sizes[keep as usize] += moved;
            }
            Axis::Time => {
                next.time_boundaries.remove(gone as usize);
            }
        }
        let mut cube = BTreeMap::new();
        for (&(i, j, l), &c) in &self.cube {
            let key = match axis {
                Axis::Source => (remap(i), j, l),
                Axis::Destination => (i, remap(j), l),
                Axis::Time => (i, j, remap(l)),
            };
            *cube.entry(key).or_insert(0) += c;
        }
        next.cube = cube;
        next.fill_marginals();
        Ok(next)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n_sources(&self) -> usize {
        self.source_assignment.len()
    }

    pub fn n_destinations(&self) -> usize {
        self.destination_assignment.len()
    }

    pub fn k_s(&self) -> usize {
        self.source_sizes.len()
    }

    pub fn k_d(&self) -> usize {
        self.destination_sizes.len()
    }

    pub fn k_t(&self) -> usize {
        self.time_marginals.len()
    }

    pub fn k(&self, axis: Axis) -> usize {
        match axis {
            Axis::Source => self.k_s(),
            Axis::Destination => self.k_d(),
            Axis::Time => self.k_t(),
        }
    }

    /// `(k_S, k_D, k_T)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.k_s(), self.k_d(), self.k_t())
    }

    pub fn is_null(&self) -> bool {
        self.shape() == (1, 1, 1)
    }

    pub fn source_assignment(&self) -> &[u32] {
        &self.source_assignment
    }

    pub fn destination_assignment(&self) -> &[u32] {
        &self.destination_assignment
    }

    pub fn time_boundaries(&self) -> &[u32] {
        &self.time_boundaries
    }

    /// Interval index of each rank, `result[r - 1]`.
    pub fn time_assignment(&self) -> Vec<u32> {
        interval_lookup(&self.time_boundaries)
    }

    pub fn cube(&self) -> &BTreeMap<CellKey, u64> {
        &self.cube
    }

    pub fn count(&self, i: usize, j: usize, l: usize) -> u64 {
        self.cube.get(&(i as u32, j as u32, l as u32)).copied().unwrap_or(0)
    }

    pub fn source_marginals(&self) -> &[u64] {
        &self.source_marginals
    }

    pub fn destination_marginals(&self) -> &[u64] {
        &self.destination_marginals
    }

    pub fn time_marginals(&self) -> &[u64] {
        &self.time_marginals
    }

    pub fn marginals(&self, axis: Axis) -> &[u64] {
        match axis {
            Axis::Source => &self.source_marginals,
            Axis::Destination => &self.destination_marginals,
            Axis::Time => &self.time_marginals,
        }
    }

    pub fn out_degrees(&self) -> &[u64] {
        &self.out_degrees
    }

    pub fn in_degrees(&self) -> &[u64] {
        &self.in_degrees
    }

    /// Vertex counts of the source clusters.
    pub fn source_sizes(&self) -> &[u64] {
        &self.source_sizes
    }

    pub fn destination_sizes(&self) -> &[u64] {
        &self.destination_sizes
    }

    /// Members of each cluster of a vertex axis, in index order.
    pub fn members(&self, axis: Axis) -> Vec<Vec<u32>> {
        let (assignment, k) = match axis {
            Axis::Source => (&self.source_assignment, self.k_s()),
            Axis::Destination => (&self.destination_assignment, self.k_d()),
            Axis::Time => {
                return self
                    .time_boundaries
                    .windows(2)
                    .map(|w| (w[0] + 1..=w[1]).collect())
                    .collect()
            }
        };
        let mut members = vec![Vec::new(); k];
        for (v, &c) in assignment.iter().enumerate() {
            members[c as usize].push(v as u32);
        }
        members
    }
}

/// Interval index for every rank `1..=m`.
fn interval_lookup(boundaries: &[u32]) -> Vec<u32> {
    let m = *boundaries.last().unwrap_or(&0) as usize;
    let mut lookup = vec![0u32; m];
    for (l, w) in boundaries.windows(2).enumerate() {
        for slot in &mut lookup[w[0] as usize..w[1] as usize] {
            *slot = l as u32;
        }
    }
    lookup
}

const PARALLEL_COUNT_THRESHOLD: usize = 1 << 16;

fn count_cells<F>(edges: &TemporalEdgeList, cell_of: F) -> BTreeMap<CellKey, u64>
where
    F: Fn((u32, u32, u32)) -> CellKey + Sync,
{
    let m = edges.len();
    if m < PARALLEL_COUNT_THRESHOLD {
        let mut cube = BTreeMap::new();
        for e in edges.edges() {
            *cube.entry(cell_of(e)).or_insert(0u64) += 1;
        }
        return cube;
    }
    let (s, d, t) = (edges.sources(), edges.destinations(), edges.time_ranks());
    let chunk = PARALLEL_COUNT_THRESHOLD;
    let partials: Vec<std::collections::HashMap<CellKey, u64>> = (0..m.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut local = std::collections::HashMap::new();
            for n in c * chunk..((c + 1) * chunk).min(m) {
                *local.entry(cell_of((s[n], d[n], t[n]))).or_insert(0u64) += 1;
            }
            local
        })
        .collect();
    let mut cube = BTreeMap::new();
    for part in partials {
        for (k, c) in part {
            *cube.entry(k).or_insert(0) += c;
        }
    }
    cube
}
