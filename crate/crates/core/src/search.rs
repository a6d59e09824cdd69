// Mutable merge state shared by the greedy optimizer and the coarsening
// process.
//
// The count cube is held three times, once per axis, as per-cluster slices
// keyed by the coordinates on the two other axes. For every legal pair of
// clusters on an axis we cache the pooled log-factorial gain
// `I(a, b) = Σ ln C(x + y, x)` over the cells the two clusters share. The
// merge delta is then `global(axis) + local(a, b)`, where `global` depends only
// on the cluster counts and `local` on the two clusters. Candidates live in a
// per-axis min-heap; entries carry version stamps and stale ones are dropped
// when popped. Every change of a pair's local value pushes a fresh entry, so
// the live heap minimum is exact.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::sync::Arc;

use crate::combinatorics::{ln_compositions, pool_gain, CombinatoricsCache};
use crate::error::Result;
use crate::model::{Axis, Triclustering};

const NONE: u32 = u32::MAX;

type SliceKey = (u32, u32);

/// The two other axes, in increasing order.
fn others(axis: Axis) -> (Axis, Axis) {
    match axis {
        Axis::Source => (Axis::Destination, Axis::Time),
        Axis::Destination => (Axis::Source, Axis::Time),
        Axis::Time => (Axis::Source, Axis::Destination),
    }
}

fn slice_key(axis: Axis, cell: [u32; 3]) -> SliceKey {
    let (o0, o1) = others(axis);
    (cell[o0.index()], cell[o1.index()])
}

fn join(axis: Axis, own: u32, key: SliceKey) -> [u32; 3] {
    let (o0, o1) = others(axis);
    let mut cell = [0u32; 3];
    cell[axis.index()] = own;
    cell[o0.index()] = key.0;
    cell[o1.index()] = key.1;
    cell
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    local: f64,
    a: u32,
    b: u32,
    va: u32,
    vb: u32,
    pv: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.local
            .total_cmp(&other.local)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
            .then(self.va.cmp(&other.va))
            .then(self.vb.cmp(&other.vb))
            .then(self.pv.cmp(&other.pv))
    }
}

#[derive(Clone, Debug)]
struct AxisState {
    axis: Axis,
    k: usize,
    active: Vec<bool>,
    marginal: Vec<u64>,
    size: Vec<u64>,
    version: Vec<u32>,
    slices: Vec<HashMap<SliceKey, u64>>,
    members: Vec<Vec<u32>>,
    prev: Vec<u32>,
    next: Vec<u32>,
    interactions: HashMap<(u32, u32), (f64, u32)>,
    heap: BinaryHeap<Reverse<Candidate>>,
}

impl AxisState {
    fn is_vertex(&self) -> bool {
        self.axis != Axis::Time
    }

    fn interaction(&self, a: u32, b: u32) -> (f64, u32) {
        let key = if a < b { (a, b) } else { (b, a) };
        self.interactions.get(&key).copied().unwrap_or((0.0, 0))
    }

    fn local(&self, a: u32, b: u32) -> f64 {
        let (ma, mb) = (self.marginal[a as usize], self.marginal[b as usize]);
        let mut value = pool_gain(ma, mb) - self.interaction(a, b).0;
        if self.is_vertex() {
            let (na, nb) = (self.size[a as usize], self.size[b as usize]);
            value += ln_compositions(ma + mb, na + nb)
                - ln_compositions(ma, na)
                - ln_compositions(mb, nb);
        }
        value
    }

    fn push(&mut self, a: u32, b: u32) {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let candidate = Candidate {
            local: self.local(a, b),
            a,
            b,
            va: self.version[a as usize],
            vb: self.version[b as usize],
            pv: self.interaction(a, b).1,
        };
        self.heap.push(Reverse(candidate));
    }

    fn is_live(&self, c: &Candidate) -> bool {
        let (a, b) = (c.a as usize, c.b as usize);
        self.active[a]
            && self.active[b]
            && self.version[a] == c.va
            && self.version[b] == c.vb
            && self.interaction(c.a, c.b).1 == c.pv
            && (self.is_vertex() || self.next[a] == c.b)
    }

    fn top(&mut self) -> Option<Candidate> {
        while let Some(Reverse(c)) = self.heap.peek().copied() {
            if self.is_live(&c) {
                return Some(c);
            }
            self.heap.pop();
        }
        None
    }

    fn active_slots(&self) -> impl Iterator<Item = u32> + '_ {
        self.active.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i as u32)
    }

    fn live_pairs(&self) -> usize {
        if self.is_vertex() {
            self.k * self.k.saturating_sub(1) / 2
        } else {
            self.k.saturating_sub(1)
        }
    }

    fn rebuild_heap(&mut self) {
        self.heap.clear();
        let slots: Vec<u32> = self.active_slots().collect();
        if self.is_vertex() {
            for (idx, &a) in slots.iter().enumerate() {
                for &b in &slots[idx + 1..] {
                    self.push(a, b);
                }
            }
        } else {
            for &a in &slots {
                let b = self.next[a as usize];
                if b != NONE {
                    self.push(a, b);
                }
            }
        }
    }

    fn maybe_compact(&mut self) {
        if self.heap.len() > 4 * self.live_pairs() + 4096 {
            self.rebuild_heap();
        }
    }

    /// Pooled gain of two clusters over their shared cells.
    fn pair_interaction(&self, a: u32, b: u32) -> f64 {
        let (sa, sb) = (&self.slices[a as usize], &self.slices[b as usize]);
        let (small, large) = if sa.len() <= sb.len() { (sa, sb) } else { (sb, sa) };
        small
            .iter()
            .filter_map(|(key, &x)| large.get(key).map(|&y| pool_gain(x, y)))
            .sum()
    }
}

/// A chosen merge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct MergeChoice {
    pub axis: Axis,
    /// Surviving slot (the smaller / earlier one).
    pub keep: u32,
    pub gone: u32,
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct MergeState {
    m: u64,
    n_vertices: [usize; 2],
    log_partitions: [Arc<Vec<f64>>; 2],
    axes: [AxisState; 3],
    out_degrees: Vec<u64>,
    in_degrees: Vec<u64>,
    cost: f64,
    merges: usize,
}

impl MergeState {
    pub fn new(model: &Triclustering, cost: f64) -> Result<Self> {
        let cache = CombinatoricsCache::shared();
        let log_row = |n: usize| -> Result<Arc<Vec<f64>>> {
            if n == 0 {
                Ok(Arc::new(vec![0.0]))
            } else {
                cache.log_bell_row(n as u64)
            }
        };
        let log_partitions = [log_row(model.n_sources())?, log_row(model.n_destinations())?];
        let axes = Axis::ALL.map(|axis| Self::axis_state(model, axis));
        let mut state = Self {
            m: model.m(),
            n_vertices: [model.n_sources(), model.n_destinations()],
            log_partitions,
            axes,
            out_degrees: model.out_degrees().to_vec(),
            in_degrees: model.in_degrees().to_vec(),
            cost,
            merges: 0,
        };
        for axis in Axis::ALL {
            state.init_interactions(axis);
            state.axes[axis.index()].rebuild_heap();
        }
        Ok(state)
    }

    fn axis_state(model: &Triclustering, axis: Axis) -> AxisState {
        let k = model.k(axis);
        let mut slices: Vec<HashMap<SliceKey, u64>> = vec![HashMap::new(); k];
        for (&(i, j, l), &c) in model.cube() {
            let cell = [i, j, l];
            slices[cell[axis.index()] as usize].insert(slice_key(axis, cell), c);
        }
        let marginal = model.marginals(axis).to_vec();
        let (size, members) = match axis {
            Axis::Source => (model.source_sizes().to_vec(), model.members(axis)),
            Axis::Destination => (model.destination_sizes().to_vec(), model.members(axis)),
            Axis::Time => (marginal.clone(), vec![Vec::new(); k]),
        };
        let (prev, next) = if axis == Axis::Time {
            (
                (0..k as u32).map(|l| if l == 0 { NONE } else { l - 1 }).collect(),
                (0..k as u32).map(|l| if l + 1 == k as u32 { NONE } else { l + 1 }).collect(),
            )
        } else {
            (Vec::new(), Vec::new())
        };
        AxisState {
            axis,
            k,
            active: vec![true; k],
            marginal,
            size,
            version: vec![0; k],
            slices,
            members,
            prev,
            next,
            interactions: HashMap::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn init_interactions(&mut self, axis: Axis) {
        let ax = &self.axes[axis.index()];
        let mut interactions: HashMap<(u32, u32), (f64, u32)> = HashMap::new();
        if ax.is_vertex() {
            // Group cells into fibres along this axis; every pair within a
            // fibre shares that cell.
            let mut fibres: HashMap<SliceKey, Vec<(u32, u64)>> = HashMap::new();
            for (x, slice) in ax.slices.iter().enumerate() {
                for (&key, &c) in slice {
                    fibres.entry(key).or_default().push((x as u32, c));
                }
            }
            for fibre in fibres.values() {
                for (idx, &(p, cp)) in fibre.iter().enumerate() {
                    for &(q, cq) in &fibre[idx + 1..] {
                        let key = if p < q { (p, q) } else { (q, p) };
                        interactions.entry(key).or_insert((0.0, 0)).0 += pool_gain(cp, cq);
                    }
                }
            }
        } else {
            for a in 0..ax.k as u32 {
                let b = ax.next[a as usize];
                if b != NONE {
                    let value = ax.pair_interaction(a, b);
                    if value != 0.0 {
                        interactions.insert((a, b), (value, 0));
                    }
                }
            }
        }
        self.axes[axis.index()].interactions = interactions;
    }

    pub fn k(&self, axis: Axis) -> usize {
        self.axes[axis.index()].k
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn merges(&self) -> usize {
        self.merges
    }

    fn global(&self, axis: Axis) -> f64 {
        let (k_s, k_d, k_t) = (self.k(Axis::Source), self.k(Axis::Destination), self.k(Axis::Time));
        let cells = (k_s * k_d * k_t) as u64;
        let (after, partition) = match axis {
            Axis::Source => (
                ((k_s - 1) * k_d * k_t) as u64,
                self.log_partitions[0][k_s - 1] - self.log_partitions[0][k_s],
            ),
            Axis::Destination => (
                (k_s * (k_d - 1) * k_t) as u64,
                self.log_partitions[1][k_d - 1] - self.log_partitions[1][k_d],
            ),
            Axis::Time => ((k_s * k_d * (k_t - 1)) as u64, 0.0),
        };
        partition + ln_compositions(self.m, after) - ln_compositions(self.m, cells)
    }

    /// Best legal merge over the allowed axes. Ties are broken by
    /// `(axis, keep, gone)`.
    pub fn best_merge(&mut self, allowed: [bool; 3]) -> Option<MergeChoice> {
        let mut best: Option<MergeChoice> = None;
        for axis in Axis::ALL {
            if !allowed[axis.index()] || self.k(axis) < 2 {
                continue;
            }
            let Some(top) = self.axes[axis.index()].top() else { continue };
            let delta = self.global(axis) + top.local;
            let better = match &best {
                None => true,
                Some(b) => delta < b.delta,
            };
            if better {
                best = Some(MergeChoice { axis, keep: top.a, gone: top.b, delta });
            }
        }
        best
    }

    /// Applies a merge previously returned by [`best_merge`](Self::best_merge)
    /// or built by the caller for two live clusters.
    pub fn apply(&mut self, choice: MergeChoice) {
        let MergeChoice { axis, keep, gone, delta } = choice;
        debug_assert!(keep < gone);
        self.update_cross_axes(axis, keep, gone);
        self.merge_slices(axis, keep, gone);
        self.refresh_own_axis(axis, keep, gone);
        self.cost += delta;
        self.merges += 1;
        for ax in &mut self.axes {
            ax.maybe_compact();
        }
    }

    /// Exact delta of merging two live clusters (any pair, time pairs must
    /// be adjacent).
    pub fn delta(&self, axis: Axis, a: u32, b: u32) -> f64 {
        self.global(axis) + self.axes[axis.index()].local(a, b)
    }

    fn update_cross_axes(&mut self, axis: Axis, keep: u32, gone: u32) {
        let own = &self.axes[axis.index()];
        let mut pooled: HashMap<SliceKey, (u64, u64)> = HashMap::new();
        for (&key, &c) in &own.slices[keep as usize] {
            pooled.entry(key).or_default().0 = c;
        }
        for (&key, &c) in &own.slices[gone as usize] {
            pooled.entry(key).or_default().1 = c;
        }
        let (o0, o1) = others(axis);
        for (target, position) in [(o0, 0usize), (o1, 1usize)] {
            // Group by the coordinate on the third axis.
            let mut groups: HashMap<u32, Vec<(u32, u64, u64)>> = HashMap::new();
            for (&key, &(u, v)) in &pooled {
                let (y, z) = if position == 0 { (key.0, key.1) } else { (key.1, key.0) };
                groups.entry(z).or_default().push((y, u, v));
            }
            let tax = &self.axes[target.index()];
            let mut changes: HashMap<(u32, u32), f64> = HashMap::new();
            for list in groups.values_mut() {
                if list.len() < 2 {
                    continue;
                }
                if tax.is_vertex() {
                    for (idx, &(p, up, vp)) in list.iter().enumerate() {
                        for &(q, uq, vq) in &list[idx + 1..] {
                            let change = pool_gain(up + vp, uq + vq) - pool_gain(up, uq) - pool_gain(vp, vq);
                            if change != 0.0 {
                                let key = if p < q { (p, q) } else { (q, p) };
                                *changes.entry(key).or_insert(0.0) += change;
                            }
                        }
                    }
                } else {
                    list.sort_unstable_by_key(|&(y, _, _)| y);
                    for w in list.windows(2) {
                        let ((p, up, vp), (q, uq, vq)) = (w[0], w[1]);
                        if tax.next[p as usize] == q {
                            let change = pool_gain(up + vp, uq + vq) - pool_gain(up, uq) - pool_gain(vp, vq);
                            if change != 0.0 {
                                *changes.entry((p, q)).or_insert(0.0) += change;
                            }
                        }
                    }
                }
            }
            let tax = &mut self.axes[target.index()];
            let mut touched: Vec<(u32, u32)> = changes.keys().copied().collect();
            touched.sort_unstable();
            for key in touched {
                let entry = tax.interactions.entry(key).or_insert((0.0, 0));
                entry.0 += changes[&key];
                entry.1 += 1;
                tax.push(key.0, key.1);
            }
        }
    }

    fn merge_slices(&mut self, axis: Axis, keep: u32, gone: u32) {
        let moved = std::mem::take(&mut self.axes[axis.index()].slices[gone as usize]);
        let (o0, o1) = others(axis);
        for (&key, &c) in &moved {
            let old_cell = join(axis, gone, key);
            let new_cell = join(axis, keep, key);
            for target in [o0, o1] {
                let y = old_cell[target.index()] as usize;
                let slice = &mut self.axes[target.index()].slices[y];
                slice.remove(&slice_key(target, old_cell));
                *slice.entry(slice_key(target, new_cell)).or_insert(0) += c;
            }
        }
        let ax = &mut self.axes[axis.index()];
        let keep_slice = &mut ax.slices[keep as usize];
        for (key, c) in moved {
            *keep_slice.entry(key).or_insert(0) += c;
        }
        ax.marginal[keep as usize] += ax.marginal[gone as usize];
        ax.marginal[gone as usize] = 0;
        ax.size[keep as usize] += ax.size[gone as usize];
        ax.size[gone as usize] = 0;
        let moved_members = std::mem::take(&mut ax.members[gone as usize]);
        ax.members[keep as usize].extend(moved_members);
        ax.active[gone as usize] = false;
        ax.version[keep as usize] += 1;
        ax.k -= 1;
        if axis == Axis::Time {
            let after = ax.next[gone as usize];
            ax.next[keep as usize] = after;
            if after != NONE {
                ax.prev[after as usize] = keep;
            }
        }
    }

    fn refresh_own_axis(&mut self, axis: Axis, keep: u32, gone: u32) {
        let ax = &mut self.axes[axis.index()];
        ax.interactions.retain(|&(a, b), _| a != keep && b != keep && a != gone && b != gone);
        let partners: Vec<u32> = if ax.is_vertex() {
            ax.active_slots().filter(|&r| r != keep).collect()
        } else {
            [ax.prev[keep as usize], ax.next[keep as usize]].into_iter().filter(|&r| r != NONE).collect()
        };
        for r in partners {
            let value = ax.pair_interaction(keep, r);
            if value != 0.0 {
                let key = if keep < r { (keep, r) } else { (r, keep) };
                ax.interactions.insert(key, (value, 0));
            }
            ax.push(keep, r);
        }
    }

    /// Dense model of the current state. Clusters are numbered in slot order.
    pub fn to_model(&self) -> Triclustering {
        let index_of = |axis: Axis| -> Vec<u32> {
            let ax = &self.axes[axis.index()];
            let mut map = vec![NONE; ax.active.len()];
            for (idx, slot) in ax.active_slots().enumerate() {
                map[slot as usize] = idx as u32;
            }
            map
        };
        let maps = Axis::ALL.map(index_of);
        let assignment = |axis: Axis, n: usize| -> Vec<u32> {
            let ax = &self.axes[axis.index()];
            let mut labels = vec![0u32; n];
            for slot in ax.active_slots() {
                for &v in &ax.members[slot as usize] {
                    labels[v as usize] = maps[axis.index()][slot as usize];
                }
            }
            labels
        };
        let source_assignment = assignment(Axis::Source, self.n_vertices[0]);
        let destination_assignment = assignment(Axis::Destination, self.n_vertices[1]);
        let time = &self.axes[Axis::Time.index()];
        let mut boundaries = vec![0u32];
        let mut acc = 0u64;
        for slot in time.active_slots() {
            acc += time.marginal[slot as usize];
            boundaries.push(acc as u32);
        }
        let mut cube = BTreeMap::new();
        let src = &self.axes[Axis::Source.index()];
        for slot in src.active_slots() {
            for (&(j, l), &c) in &src.slices[slot as usize] {
                cube.insert(
                    (
                        maps[0][slot as usize],
                        maps[1][j as usize],
                        maps[2][l as usize],
                    ),
                    c,
                );
            }
        }
        Triclustering::assemble(
            source_assignment,
            destination_assignment,
            boundaries,
            cube,
            self.out_degrees.clone(),
            self.in_degrees.clone(),
        )
    }

    /// Slot ids of the live clusters of an axis, in order.
    pub fn active_slots(&self, axis: Axis) -> Vec<u32> {
        self.axes[axis.index()].active_slots().collect()
    }

    /// Slot following `slot` on the time axis.
    pub fn next_interval(&self, slot: u32) -> Option<u32> {
        let next = self.axes[Axis::Time.index()].next[slot as usize];
        (next != NONE).then_some(next)
    }

    /// All legal merges with their exact deltas (used by checks).
    pub fn all_deltas(&self) -> Vec<MergeChoice> {
        let mut out = Vec::new();
        for axis in Axis::ALL {
            let slots = self.active_slots(axis);
            if axis == Axis::Time {
                for &a in &slots {
                    if let Some(b) = self.next_interval(a) {
                        out.push(MergeChoice { axis, keep: a, gone: b, delta: self.delta(axis, a, b) });
                    }
                }
            } else {
                for (idx, &a) in slots.iter().enumerate() {
                    for &b in &slots[idx + 1..] {
                        out.push(MergeChoice { axis, keep: a, gone: b, delta: self.delta(axis, a, b) });
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::{cost, merge_delta};
    use crate::data::TemporalEdgeList;

    fn sample() -> TemporalEdgeList {
        let rows = [
            ("a", "x", 1.0),
            ("a", "x", 2.0),
            ("b", "x", 3.0),
            ("b", "y", 4.0),
            ("c", "y", 5.0),
            ("c", "z", 6.0),
            ("a", "z", 7.0),
            ("d", "x", 8.0),
            ("d", "x", 9.0),
            ("c", "y", 10.0),
        ];
        TemporalEdgeList::from_records(rows).unwrap()
    }

    #[test]
    fn deltas_match_model_level_deltas_through_a_merge_sequence() {
        let e = sample();
        let mut model =
            Triclustering::compute_counts(&e, vec![0, 1, 2, 3], vec![0, 1, 2], vec![0, 2, 4, 6, 8, 10])
                .unwrap();
        let mut state = MergeState::new(&model, cost(&model).unwrap().total).unwrap();
        while let Some(choice) = state.best_merge([true; 3]) {
            // Slots and dense indices coincide until the first merge on an
            // axis, so compare through the dense model.
            let dense = state.to_model();
            assert_eq!(dense, model);
            let slots = state.active_slots(choice.axis);
            let a = slots.iter().position(|&s| s == choice.keep).unwrap();
            let b = slots.iter().position(|&s| s == choice.gone).unwrap();
            let expected = merge_delta(&model, choice.axis, a, b).unwrap();
            assert!((expected - choice.delta).abs() < 1e-9, "{expected} vs {}", choice.delta);
            for c in state.all_deltas() {
                assert!(c.delta >= choice.delta - 1e-12);
            }
            state.apply(choice);
            model = model.merged(choice.axis, a, b).unwrap();
            let recomputed = cost(&model).unwrap().total;
            assert!((recomputed - state.cost()).abs() < 1e-8);
        }
        assert!(state.to_model().is_null());
    }
}
