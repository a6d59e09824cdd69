//! Post-hoc statistics of a fitted triclustering: the empirical cluster
//! distributions, contributions to mutual information, and the
//! Jensen–Shannon view of merge dissimilarities.
//!
//! All quantities are in nats; [`Units::Bits`] converts on export.
//! `0 · ln(0 / x)` is taken as 0.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::criterion;
use crate::error::{Error, Result};
use crate::model::{Axis, Triclustering};

/// Empirical distributions of the clusters of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterDistributions {
    pub source: Vec<f64>,
    pub destination: Vec<f64>,
    pub time: Vec<f64>,
    /// `joint_sd[i][j] = Σ_l μ_ijl / m`.
    pub joint_sd: Vec<Vec<f64>>,
    /// Full joint `μ_ijl / m`, dense, indexed by [`ClusterDistributions::cell`].
    pub joint: Vec<f64>,
    shape: (usize, usize, usize),
}

impl ClusterDistributions {
    pub fn new(model: &Triclustering) -> Self {
        let (k_s, k_d, k_t) = model.shape();
        let m = model.m() as f64;
        let scale = |v: &[u64]| v.iter().map(|&x| x as f64 / m).collect::<Vec<_>>();
        let mut joint = vec![0.0; k_s * k_d * k_t];
        let mut joint_sd = vec![vec![0.0; k_d]; k_s];
        for (&(i, j, l), &c) in model.cube() {
            let p = c as f64 / m;
            joint[(i as usize * k_d + j as usize) * k_t + l as usize] = p;
            joint_sd[i as usize][j as usize] += p;
        }
        Self {
            source: scale(model.source_marginals()),
            destination: scale(model.destination_marginals()),
            time: scale(model.time_marginals()),
            joint_sd,
            joint,
            shape: (k_s, k_d, k_t),
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.shape
    }

    /// Dense index of cell `(i, j, l)`.
    pub fn cell(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.shape.1 + j) * self.shape.2 + l
    }

    pub fn marginal(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::Source => &self.source,
            Axis::Destination => &self.destination,
            Axis::Time => &self.time,
        }
    }

    /// Profile of cluster `c` of `axis`: the distribution of its edges over
    /// the clusters of the two other axes (in their natural order, e.g.
    /// `(j, l)` for a source cluster). Empty clusters have an all-zero
    /// profile.
    pub fn profile(&self, axis: Axis, c: usize) -> Vec<f64> {
        let (k_s, k_d, k_t) = self.shape;
        let weight = self.marginal(axis)[c];
        let mut out = Vec::new();
        let mut push = |p: f64| out.push(if weight > 0.0 { p / weight } else { 0.0 });
        match axis {
            Axis::Source => {
                for j in 0..k_d {
                    for l in 0..k_t {
                        push(self.joint[self.cell(c, j, l)]);
                    }
                }
            }
            Axis::Destination => {
                for i in 0..k_s {
                    for l in 0..k_t {
                        push(self.joint[self.cell(i, c, l)]);
                    }
                }
            }
            Axis::Time => {
                for i in 0..k_s {
                    for j in 0..k_d {
                        push(self.joint[self.cell(i, j, c)]);
                    }
                }
            }
        }
        out
    }

    /// Mixture weight `π_c` of cluster `c` of `axis` (its share of edges).
    pub fn weight(&self, axis: Axis, c: usize) -> f64 {
        self.marginal(axis)[c]
    }
}

fn contribution(p: f64, q: f64) -> f64 {
    if p > 0.0 { p * (p / q).ln() } else { 0.0 }
}

/// Contributions of source × destination cluster pairs to their mutual
/// information.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairContributions {
    /// `values[i][j]`.
    pub values: Vec<Vec<f64>>,
    pub total: f64,
}

/// Contributions of (source, destination) pair × time cells to the mutual
/// information between pairs and time segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTimeContributions {
    pub shape: (usize, usize, usize),
    /// Dense, indexed `(i · k_D + j) · k_T + l`.
    pub values: Vec<f64>,
    pub total: f64,
}

impl PairTimeContributions {
    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.values[(i * self.shape.1 + j) * self.shape.2 + l]
    }
}

pub fn mi_source_dest(model: &Triclustering) -> PairContributions {
    let dist = ClusterDistributions::new(model);
    let values: Vec<Vec<f64>> = dist
        .joint_sd
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &p)| contribution(p, dist.source[i] * dist.destination[j]))
                .collect()
        })
        .collect();
    let total = values.iter().flatten().sum();
    PairContributions { values, total }
}

pub fn mi_pair_time(model: &Triclustering) -> PairTimeContributions {
    let dist = ClusterDistributions::new(model);
    let (k_s, k_d, k_t) = dist.shape;
    let mut values = vec![0.0; k_s * k_d * k_t];
    for i in 0..k_s {
        for j in 0..k_d {
            for l in 0..k_t {
                let idx = dist.cell(i, j, l);
                values[idx] = contribution(dist.joint[idx], dist.joint_sd[i][j] * dist.time[l]);
            }
        }
    }
    let total = values.iter().sum();
    PairTimeContributions { shape: dist.shape, values, total }
}

/// Generalized Jensen–Shannon divergence
/// `α_p KL(P ‖ α_p P + α_q Q) + α_q KL(Q ‖ α_p P + α_q Q)`.
pub fn js_divergence(p: &[f64], q: &[f64], alpha_p: f64, alpha_q: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension(p.len(), q.len()));
    }
    if !(alpha_p >= 0.0 && alpha_q >= 0.0 && ((alpha_p + alpha_q) - 1.0).abs() < 1e-9) {
        return Err(Error::Value(format!("weights {alpha_p} and {alpha_q} must be non-negative and sum to 1")));
    }
    let mut kl_p = 0.0;
    let mut kl_q = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let mix = alpha_p * a + alpha_q * b;
        kl_p += contribution(a, mix);
        kl_q += contribution(b, mix);
    }
    Ok((alpha_p * kl_p + alpha_q * kl_q).max(0.0))
}

/// Merge dissimilarity per edge next to its large-sample limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityCheck {
    /// `Δ / m`.
    pub empirical: f64,
    /// `(π_i + π_k) · JS^{α_i, α_k}(profile_i, profile_k)`.
    pub limit: f64,
    pub alpha_i: f64,
    pub alpha_k: f64,
}

impl DissimilarityCheck {
    /// `|empirical − limit| / limit` (infinite when the limit is 0 and the
    /// empirical value is not).
    pub fn relative_gap(&self) -> f64 {
        let gap = (self.empirical - self.limit).abs();
        if gap == 0.0 { 0.0 } else { gap / self.limit }
    }
}

/// Compares the dissimilarity of source clusters `i` and `k` with its
/// Jensen–Shannon limit.
pub fn asymptotic_dissimilarity_check(model: &Triclustering, i: usize, k: usize) -> Result<DissimilarityCheck> {
    asymptotic_dissimilarity_check_axis(model, Axis::Source, i, k)
}

/// As [`asymptotic_dissimilarity_check`] for clusters of any axis, using the
/// profile of each cluster over the clusters of the two other axes. Time
/// clusters must be adjacent.
pub fn asymptotic_dissimilarity_check_axis(
    model: &Triclustering,
    axis: Axis,
    i: usize,
    k: usize,
) -> Result<DissimilarityCheck> {
    let n = model.k(axis);
    if i == k || i >= n || k >= n {
        return Err(Error::Value(format!("invalid {axis} cluster pair ({i}, {k}) with k = {n}")));
    }
    let delta = criterion::merge_delta(model, axis, i, k)?;
    let dist = ClusterDistributions::new(model);
    let (pi_i, pi_k) = (dist.weight(axis, i), dist.weight(axis, k));
    let alpha_i = pi_i / (pi_i + pi_k);
    let alpha_k = pi_k / (pi_i + pi_k);
    let js = js_divergence(&dist.profile(axis, i), &dist.profile(axis, k), alpha_i, alpha_k)?;
    Ok(DissimilarityCheck { empirical: delta / model.m() as f64, limit: (pi_i + pi_k) * js, alpha_i, alpha_k })
}

/// Unit of exported contributions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

fn sign(v: f64) -> &'static str {
    if v > 0.0 {
        "+"
    } else if v < 0.0 {
        "-"
    } else {
        "0"
    }
}

/// Long-format table with columns
/// `source_cluster,destination_cluster,contribution,sign`, one row per pair.
pub fn write_pair_csv<W: Write>(c: &PairContributions, units: Units, mut out: W) -> Result<()> {
    writeln!(out, "source_cluster,destination_cluster,contribution,sign")?;
    for (i, row) in c.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            writeln!(out, "{i},{j},{:.12e},{}", units.convert(v), sign(v))?;
        }
    }
    Ok(())
}

/// Long-format table with columns
/// `source_cluster,destination_cluster,time_cluster,contribution,sign`.
pub fn write_pair_time_csv<W: Write>(c: &PairTimeContributions, units: Units, mut out: W) -> Result<()> {
    writeln!(out, "source_cluster,destination_cluster,time_cluster,contribution,sign")?;
    let (k_s, k_d, k_t) = c.shape;
    for i in 0..k_s {
        for j in 0..k_d {
            for l in 0..k_t {
                let v = c.get(i, j, l);
                writeln!(out, "{i},{j},{l},{:.12e},{}", units.convert(v), sign(v))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TemporalEdgeList;

    fn model_from_cube(cube: &[((u32, u32, u32), u64)], k: (usize, usize, usize)) -> Triclustering {
        let mut rows = Vec::new();
        let mut t = 0.0;
        for l in 0..k.2 as u32 {
            for &((i, j, ll), c) in cube {
                if ll == l {
                    for _ in 0..c {
                        rows.push((format!("s{i}"), format!("d{j}"), t));
                        t += 1.0;
                    }
                }
            }
        }
        let e = TemporalEdgeList::from_records(rows).unwrap();
        let src: Vec<u32> = e.source_ids().iter().map(|s| s[1..].parse().unwrap()).collect();
        let dst: Vec<u32> = e.destination_ids().iter().map(|s| s[1..].parse().unwrap()).collect();
        let mut bounds = vec![0u32];
        let mut acc = 0;
        for l in 0..k.2 as u32 {
            acc += cube.iter().filter(|c| c.0.2 == l).map(|c| c.1 as u32).sum::<u32>();
            bounds.push(acc);
        }
        Triclustering::compute_counts(&e, src, dst, bounds).unwrap()
    }

    #[test]
    fn independent_joint_has_no_information() {
        // μ_ij = a_i b_j.
        let m = model_from_cube(&[((0, 0, 0), 2), ((0, 1, 0), 4), ((1, 0, 0), 3), ((1, 1, 0), 6)], (2, 2, 1));
        let c = mi_source_dest(&m);
        assert!(c.values.iter().flatten().all(|v| v.abs() < 1e-15));
        let t = mi_pair_time(&m);
        assert!(t.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn time_uniform_cube_has_no_pair_time_information() {
        let m = model_from_cube(
            &[((0, 0, 0), 3), ((1, 1, 0), 1), ((0, 0, 1), 3), ((1, 1, 1), 1)],
            (2, 2, 2),
        );
        assert!(mi_pair_time(&m).values.iter().all(|v| v.abs() < 1e-15));
        assert!(mi_source_dest(&m).total > 0.0);
    }

    #[test]
    fn distributions_are_consistent() {
        let m = model_from_cube(&[((0, 0, 0), 5), ((1, 0, 1), 2), ((0, 1, 1), 3)], (2, 2, 2));
        let d = ClusterDistributions::new(&m);
        for axis in Axis::ALL {
            assert!((d.marginal(axis).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for c in 0..m.k(axis) {
                assert!((d.profile(axis, c).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        assert!((d.joint.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn js_examples() {
        let ln2 = std::f64::consts::LN_2;
        assert!((js_divergence(&[1.0, 0.0], &[0.0, 1.0], 0.5, 0.5).unwrap() - ln2).abs() < 1e-12);
        assert_eq!(js_divergence(&[0.3, 0.7], &[0.3, 0.7], 0.2, 0.8).unwrap(), 0.0);
        let a = js_divergence(&[0.1, 0.9], &[0.6, 0.4], 0.3, 0.7).unwrap();
        let b = js_divergence(&[0.6, 0.4], &[0.1, 0.9], 0.7, 0.3).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(matches!(js_divergence(&[1.0], &[0.5, 0.5], 0.5, 0.5), Err(Error::Dimension(1, 2))));
    }

    #[test]
    fn bits_conversion() {
        assert!((Units::Bits.convert(std::f64::consts::LN_2) - 1.0).abs() < 1e-15);
    }
}
