//! Agglomerative simplification of a fitted triclustering.
//!
//! Starting from a (locally) optimal model `M*`, the cheapest merge over
//! all three axes is applied repeatedly, time merges being restricted to
//! adjacent segments. Each step records the merge, its dissimilarity `Δ`
//! (the cost increase) and the informativity of the coarser model. This is
//! an agglomerative hierarchical clustering with `Δ` as linkage.
//!
//! If a merge lowers the cost below the best cost seen so far (the start
//! model was not merge-optimal), the improved model becomes the
//! informativity baseline: a [`BaselineNotice`] is recorded and every
//! informativity value is expressed against the final baseline. Reported
//! values therefore never exceed 1.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::criterion::{self, informativity};
use crate::error::{Error, Result};
use crate::model::{Axis, Triclustering};
use crate::search::MergeState;

/// When to stop merging.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop before the informativity would drop below the threshold.
    /// A threshold of 0 builds the full hierarchy down to the null model.
    MinInformativity(f64),
    /// Stop once every axis with a non-zero target has reached it. Axes with
    /// a zero target are unconstrained (they may merge, but never hold the
    /// process back). With all targets zero the process ends at the null
    /// model.
    TargetCounts { source: usize, destination: usize, time: usize },
}

impl StopRule {
    fn validate(&self) -> Result<()> {
        match *self {
            StopRule::MinInformativity(tau) if !(tau.is_finite() && tau <= 1.0) => {
                Err(Error::Domain(format!("informativity threshold {tau} must be at most 1")))
            }
            StopRule::MinInformativity(tau) if tau < 0.0 => {
                Err(Error::Domain(format!("informativity threshold {tau} must be at least 0")))
            }
            _ => Ok(()),
        }
    }

    fn target(&self, axis: Axis) -> usize {
        match *self {
            StopRule::TargetCounts { source, destination, time } => match axis {
                Axis::Source => source,
                Axis::Destination => destination,
                Axis::Time => time,
            },
            StopRule::MinInformativity(_) => 0,
        }
    }
}

/// One merge of the hierarchy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    /// 1-based step number.
    pub step: usize,
    pub axis: Axis,
    /// Cluster indices in the model before this step; the merged cluster
    /// keeps the smaller index (see [`Triclustering::merged`]).
    pub kept: usize,
    pub absorbed: usize,
    /// Cost increase of the merge (the dissimilarity of the two clusters).
    pub delta: f64,
    pub cost_after: f64,
    /// Informativity of the model after this step, against the final
    /// baseline.
    pub informativity_after: f64,
    pub shape_after: (usize, usize, usize),
}

/// Recorded when a merge lowers the cost below the best seen so far.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineNotice {
    pub step: usize,
    pub previous_best: f64,
    pub new_best: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeHierarchy {
    pub stop: StopRule,
    pub start_cost: f64,
    pub null_cost: f64,
    /// Lowest cost along the trajectory, the informativity baseline.
    pub baseline_cost: f64,
    pub start_shape: (usize, usize, usize),
    pub records: Vec<MergeRecord>,
    pub notices: Vec<BaselineNotice>,
    /// Informativity is undefined because the baseline equals the null cost.
    pub informativity_undefined: bool,
}

/// Posterior ratio `P(M | E) / P(M_merged | E) = exp(Δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorRatio {
    /// `exp(Δ)`, infinite on overflow.
    pub value: f64,
    /// `Δ` itself.
    pub log_value: f64,
    pub overflow: bool,
}

pub fn posterior_ratio(delta: f64) -> Result<PosteriorRatio> {
    if !delta.is_finite() {
        return Err(Error::Value(format!("dissimilarity {delta} is not finite")));
    }
    let value = delta.exp();
    Ok(PosteriorRatio { value, log_value: delta, overflow: value.is_infinite() })
}

/// Builds the merge hierarchy of `mstar` under `stop`.
pub fn agglomerate(mstar: &Triclustering, stop: StopRule) -> Result<MergeHierarchy> {
    stop.validate()?;
    let start_cost = criterion::cost(mstar)?.total;
    let null_cost = criterion::null_cost(mstar).total;
    let mut state = MergeState::new(mstar, start_cost)?;
    let mut best = start_cost;
    let mut notices = Vec::new();
    // Informativity is filled in once the final baseline is known.
    let mut records: Vec<MergeRecord> = Vec::new();
    loop {
        let shape = (state.k(Axis::Source), state.k(Axis::Destination), state.k(Axis::Time));
        let mut allowed = [false; 3];
        let mut pending = false;
        for axis in Axis::ALL {
            let k = state.k(axis);
            let target = stop.target(axis);
            allowed[axis.index()] = k > target.max(1);
            pending |= target > 0 && k > target;
        }
        let all_unconstrained = Axis::ALL.iter().all(|&a| stop.target(a) == 0);
        if matches!(stop, StopRule::TargetCounts { .. }) && !pending && !all_unconstrained {
            break;
        }
        let Some(choice) = state.best_merge(allowed) else { break };
        let shape_after = match choice.axis {
            Axis::Source => (shape.0 - 1, shape.1, shape.2),
            Axis::Destination => (shape.0, shape.1 - 1, shape.2),
            Axis::Time => (shape.0, shape.1, shape.2 - 1),
        };
        // The single-cluster model is the null model; use its exact cost
        // rather than the accumulated deltas.
        let cost_after = if shape_after == (1, 1, 1) { null_cost } else { state.cost() + choice.delta };
        if let StopRule::MinInformativity(tau) = stop {
            if tau > 0.0 {
                let baseline = best.min(cost_after);
                let value = informativity(cost_after, baseline, null_cost);
                if value.undefined || value.value < tau {
                    break;
                }
            }
        }
        let slots = state.active_slots(choice.axis);
        let kept = slots.iter().position(|&s| s == choice.keep).expect("live slot");
        let absorbed = slots.iter().position(|&s| s == choice.gone).expect("live slot");
        state.apply(choice);
        let step = records.len() + 1;
        if cost_after < best - 1e-9 {
            notices.push(BaselineNotice { step, previous_best: best, new_best: cost_after });
            best = cost_after;
        }
        records.push(MergeRecord {
            step,
            axis: choice.axis,
            kept,
            absorbed,
            delta: choice.delta,
            cost_after,
            informativity_after: 0.0,
            shape_after,
        });
    }
    let undefined = informativity(best, best, null_cost).undefined;
    for record in &mut records {
        record.informativity_after = informativity(record.cost_after, best, null_cost).value;
    }
    Ok(MergeHierarchy {
        stop,
        start_cost,
        null_cost,
        baseline_cost: best,
        start_shape: mstar.shape(),
        records,
        notices,
        informativity_undefined: undefined,
    })
}

impl MergeHierarchy {
    /// Number of merges.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Informativity of the start model against the final baseline.
    pub fn start_informativity(&self) -> f64 {
        informativity(self.start_cost, self.baseline_cost, self.null_cost).value
    }

    /// The model after `step` merges, rebuilt by replaying the records on
    /// `mstar` (step 0 is `mstar` itself).
    pub fn replay(&self, mstar: &Triclustering, step: usize) -> Result<Triclustering> {
        if step > self.records.len() {
            return Err(Error::Value(format!("step {step} beyond the {} recorded merges", self.records.len())));
        }
        if mstar.shape() != self.start_shape {
            return Err(Error::Incompatible("hierarchy was built from a model of another shape".into()));
        }
        let mut model = mstar.clone();
        for record in &self.records[..step] {
            model = model.merged(record.axis, record.kept, record.absorbed)?;
        }
        Ok(model)
    }

    /// Replays every step and returns the largest absolute difference
    /// between a recomputed cost and the recorded one.
    pub fn verify(&self, mstar: &Triclustering) -> Result<f64> {
        let mut model = mstar.clone();
        let mut worst = (criterion::cost(&model)?.total - self.start_cost).abs();
        for record in &self.records {
            model = model.merged(record.axis, record.kept, record.absorbed)?;
            worst = worst.max((criterion::cost(&model)?.total - record.cost_after).abs());
        }
        Ok(worst)
    }

    /// Last step whose informativity is at least `tau` (0 if none).
    pub fn step_for_informativity(&self, tau: f64) -> usize {
        self.records.iter().take_while(|r| r.informativity_after >= tau).count()
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Dendrogram of each axis as nested lists. Leaves are the cluster
    /// indices of the start model; each merge joins two subtrees; the roots
    /// left when the process stopped are listed in index order. One line per
    /// axis, e.g. `source: [[0, 3], [1, 2]]`.
    pub fn dendrogram(&self) -> String {
        let mut out = String::new();
        let k = [self.start_shape.0, self.start_shape.1, self.start_shape.2];
        for axis in Axis::ALL {
            let mut nodes: Vec<String> = (0..k[axis.index()]).map(|c| c.to_string()).collect();
            for record in self.records.iter().filter(|r| r.axis == axis) {
                let gone = nodes.remove(record.absorbed);
                let kept = &mut nodes[record.kept];
                *kept = format!("[{kept}, {gone}]");
            }
            out.push_str(&format!("{axis}: [{}]\n", nodes.join(", ")));
        }
        out
    }

    /// Comma-separated merge records.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "step,axis,kept,absorbed,delta,cost_after,informativity_after,k_s,k_d,k_t")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{:.9},{:.9},{:.9},{},{},{}",
                r.step,
                r.axis,
                r.kept,
                r.absorbed,
                r.delta,
                r.cost_after,
                r.informativity_after,
                r.shape_after.0,
                r.shape_after.1,
                r.shape_after.2
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TemporalEdgeList;

    fn model() -> Triclustering {
        let rows: Vec<(String, String, f64)> = (0..60)
            .map(|n| {
                let s = n % 6;
                let d = if n < 30 { s % 3 } else { (s + 1) % 3 };
                (format!("s{s}"), format!("d{d}"), n as f64)
            })
            .collect();
        let e = TemporalEdgeList::from_records(rows).unwrap();
        Triclustering::compute_counts(&e, vec![0, 1, 2, 0, 1, 2], vec![0, 1, 2], vec![0, 20, 40, 60]).unwrap()
    }

    #[test]
    fn full_hierarchy_reaches_null() {
        let m = model();
        let h = agglomerate(&m, StopRule::MinInformativity(0.0)).unwrap();
        assert_eq!(h.len(), (m.k_s() - 1) + (m.k_d() - 1) + (m.k_t() - 1));
        assert_eq!(h.records.last().unwrap().shape_after, (1, 1, 1));
        assert!(h.verify(&m).unwrap() < 1e-6);
        assert!(h.replay(&m, h.len()).unwrap().is_null());
        assert_eq!(h.records.last().unwrap().informativity_after, 0.0);
        assert!(h.records.iter().all(|r| r.informativity_after <= 1.0));
    }

    #[test]
    fn target_counts_leave_other_axes_free() {
        let m = model();
        let h = agglomerate(&m, StopRule::TargetCounts { source: 2, destination: 0, time: 0 }).unwrap();
        assert_eq!(h.records.last().unwrap().shape_after.0, 2);
        let h = agglomerate(&m, StopRule::TargetCounts { source: 3, destination: 3, time: 3 }).unwrap();
        assert!(h.is_empty());
    }

    #[test]
    fn threshold_above_one_is_rejected() {
        assert!(agglomerate(&model(), StopRule::MinInformativity(1.5)).is_err());
    }

    #[test]
    fn posterior_ratio_values() {
        assert_eq!(posterior_ratio(0.0).unwrap().value, 1.0);
        assert!((posterior_ratio(2f64.ln()).unwrap().value - 2.0).abs() < 1e-12);
        let big = posterior_ratio(1e4).unwrap();
        assert!(big.overflow && big.log_value == 1e4);
    }

    #[test]
    fn dendrogram_nests_leaves() {
        let m = model();
        let h = agglomerate(&m, StopRule::MinInformativity(0.0)).unwrap();
        let text = h.dendrogram();
        assert_eq!(text.lines().count(), 3);
        for line in text.lines() {
            assert_eq!(line.matches('[').count(), line.matches(']').count());
        }
    }
}
