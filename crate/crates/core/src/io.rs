//! JSON model documents.
//!
//! A document stores the cluster memberships by original vertex id, the
//! time boundaries both as ranks and as cut values on the original time
//! scale, the sparse count cube and the vertex degrees. Integer vertex ids
//! are positions in `source_ids` / `destination_ids`.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::data::TemporalEdgeList;
use crate::error::{Error, Result};
use crate::model::Triclustering;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub m: u64,
    /// `[k_S, k_D, k_T]`.
    pub shape: [usize; 3],
    pub source_ids: Vec<String>,
    pub destination_ids: Vec<String>,
    /// Members of each source cluster, by id.
    pub source_clusters: Vec<Vec<String>>,
    pub destination_clusters: Vec<Vec<String>>,
    /// Rank boundaries `0 = b_0 < … < b_kT = m`; segment `l` holds ranks
    /// `b_l + 1 ..= b_{l+1}`.
    pub time_boundaries: Vec<u32>,
    /// The same boundaries on the original time scale: the midpoint of the
    /// stamps on either side (the extreme stamps at both ends).
    pub time_cuts: Vec<f64>,
    /// Non-zero cells as `[i, j, l, count]`.
    pub cube: Vec<[u64; 4]>,
    pub out_degrees: Vec<u64>,
    pub in_degrees: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

impl ModelDocument {
    /// Describes `model`, fitted on `edges`.
    pub fn new(model: &Triclustering, edges: &TemporalEdgeList, cost: Option<f64>) -> Result<Self> {
        model.check_compatible(edges)?;
        let by_rank = edges.raw_times_by_rank();
        let named = |members: Vec<Vec<u32>>, ids: &[String]| -> Vec<Vec<String>> {
            members.into_iter().map(|c| c.into_iter().map(|v| ids[v as usize].clone()).collect()).collect()
        };
        let (k_s, k_d, k_t) = model.shape();
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            m: model.m(),
            shape: [k_s, k_d, k_t],
            source_ids: edges.source_ids().to_vec(),
            destination_ids: edges.destination_ids().to_vec(),
            source_clusters: named(model.members(crate::model::Axis::Source), edges.source_ids()),
            destination_clusters: named(model.members(crate::model::Axis::Destination), edges.destination_ids()),
            time_boundaries: model.time_boundaries().to_vec(),
            time_cuts: model.time_boundaries().iter().map(|&b| TemporalEdgeList::cut_value(&by_rank, b)).collect(),
            cube: model.cube().iter().map(|(&(i, j, l), &c)| [i as u64, j as u64, l as u64, c]).collect(),
            out_degrees: model.out_degrees().to_vec(),
            in_degrees: model.in_degrees().to_vec(),
            cost,
        })
    }

    /// Describes a coarsening of this document's model (same vertices and
    /// edges, time boundaries a subset of the stored ones) without access
    /// to the data.
    pub fn derived(&self, model: &Triclustering, cost: Option<f64>) -> Result<Self> {
        if model.n_sources() != self.source_ids.len()
            || model.n_destinations() != self.destination_ids.len()
            || model.m() != self.m
        {
            return Err(Error::Incompatible("model does not describe the same data".into()));
        }
        let cuts: HashMap<u32, f64> = self.time_boundaries.iter().copied().zip(self.time_cuts.iter().copied()).collect();
        let time_cuts = model
            .time_boundaries()
            .iter()
            .map(|b| {
                cuts.get(b)
                    .copied()
                    .ok_or_else(|| Error::Incompatible(format!("time boundary {b} is not a stored boundary")))
            })
            .collect::<Result<Vec<_>>>()?;
        let named = |members: Vec<Vec<u32>>, ids: &[String]| -> Vec<Vec<String>> {
            members.into_iter().map(|c| c.into_iter().map(|v| ids[v as usize].clone()).collect()).collect()
        };
        let (k_s, k_d, k_t) = model.shape();
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            m: model.m(),
            shape: [k_s, k_d, k_t],
            source_ids: self.source_ids.clone(),
            destination_ids: self.destination_ids.clone(),
            source_clusters: named(model.members(crate::model::Axis::Source), &self.source_ids),
            destination_clusters: named(model.members(crate::model::Axis::Destination), &self.destination_ids),
            time_boundaries: model.time_boundaries().to_vec(),
            time_cuts,
            cube: model.cube().iter().map(|(&(i, j, l), &c)| [i as u64, j as u64, l as u64, c]).collect(),
            out_degrees: model.out_degrees().to_vec(),
            in_degrees: model.in_degrees().to_vec(),
            cost,
        })
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let doc: Self = serde_json::from_reader(input)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Value(format!(
                "unsupported model schema version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    fn assignment(clusters: &[Vec<String>], ids: &[String], axis: &str) -> Result<Vec<u32>> {
        let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(n, id)| (id.as_str(), n)).collect();
        let mut labels = vec![u32::MAX; ids.len()];
        for (c, members) in clusters.iter().enumerate() {
            for id in members {
                let &v = index
                    .get(id.as_str())
                    .ok_or_else(|| Error::Incompatible(format!("{axis} vertex {id:?} is not in the data")))?;
                labels[v] = c as u32;
            }
        }
        if let Some(v) = labels.iter().position(|&c| c == u32::MAX) {
            return Err(Error::Incompatible(format!("{axis} vertex {:?} has no cluster", ids[v])));
        }
        Ok(labels)
    }

    /// Rebuilds the model from the document alone.
    pub fn to_model(&self) -> Result<Triclustering> {
        let src = Self::assignment(&self.source_clusters, &self.source_ids, "source")?;
        let dst = Self::assignment(&self.destination_clusters, &self.destination_ids, "destination")?;
        let cube: BTreeMap<_, _> =
            self.cube.iter().map(|&[i, j, l, c]| ((i as u32, j as u32, l as u32), c)).collect();
        let model = Triclustering::from_parameters(src, dst, cube, self.out_degrees.clone(), self.in_degrees.clone())?;
        if model.time_boundaries() != self.time_boundaries.as_slice() {
            return Err(Error::Invariant("time boundaries disagree with the count cube".into()));
        }
        Ok(model)
    }

    /// Maps the document onto `edges` by vertex id and checks that the
    /// stored counts match the data.
    pub fn model_for(&self, edges: &TemporalEdgeList) -> Result<Triclustering> {
        if self.m != edges.m() {
            return Err(Error::Incompatible(format!("model has {} edges, data has {}", self.m, edges.m())));
        }
        let src = Self::assignment(&self.source_clusters, edges.source_ids(), "source")?;
        let dst = Self::assignment(&self.destination_clusters, edges.destination_ids(), "destination")?;
        if self.source_ids != edges.source_ids() || self.destination_ids != edges.destination_ids() {
            // Same vertex sets in another order are fine; the degrees are
            // compared by id below.
            let mut a = self.source_ids.clone();
            let mut b = edges.source_ids().to_vec();
            a.sort();
            b.sort();
            let mut c = self.destination_ids.clone();
            let mut d = edges.destination_ids().to_vec();
            c.sort();
            d.sort();
            if a != b || c != d {
                return Err(Error::Incompatible("vertex sets differ".into()));
            }
        }
        let by_id = |ids: &[String], degrees: &[u64]| -> HashMap<String, u64> {
            ids.iter().cloned().zip(degrees.iter().copied()).collect()
        };
        if by_id(&self.source_ids, &self.out_degrees) != by_id(edges.source_ids(), &edges.out_degrees())
            || by_id(&self.destination_ids, &self.in_degrees) != by_id(edges.destination_ids(), &edges.in_degrees())
        {
            return Err(Error::Incompatible("vertex degrees differ from the data".into()));
        }
        let model = Triclustering::compute_counts(edges, src, dst, self.time_boundaries.clone())
            .map_err(|e| Error::Incompatible(e.to_string()))?;
        let stored = self.to_model()?;
        let stored_cube: Vec<[u64; 4]> =
            model.cube().iter().map(|(&(i, j, l), &c)| [i as u64, j as u64, l as u64, c]).collect();
        if stored_cube != self.cube || stored.shape() != model.shape() {
            return Err(Error::Incompatible("count cube differs from the data".into()));
        }
        Ok(model)
    }
}

/// Writes `model` as a JSON document to `path`.
pub fn save_model(path: &std::path::Path, model: &Triclustering, edges: &TemporalEdgeList, cost: Option<f64>) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    ModelDocument::new(model, edges, cost)?.write(file)
}

pub fn load_document(path: &std::path::Path) -> Result<ModelDocument> {
    ModelDocument::read(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges() -> TemporalEdgeList {
        TemporalEdgeList::from_records((0..12).map(|n| (format!("a{}", n % 3), format!("b{}", n % 4), n as f64 * 2.0)))
            .unwrap()
    }

    #[test]
    fn round_trip() {
        let e = edges();
        let m = Triclustering::compute_counts(&e, vec![0, 1, 0], vec![0, 0, 1, 1], vec![0, 5, 12]).unwrap();
        let doc = ModelDocument::new(&m, &e, Some(1.5)).unwrap();
        assert_eq!(doc.time_cuts, vec![0.0, 9.0, 22.0]);
        let mut buf = Vec::new();
        doc.write(&mut buf).unwrap();
        let back = ModelDocument::read(buf.as_slice()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_model().unwrap(), m);
        assert_eq!(back.model_for(&e).unwrap(), m);
    }

    #[test]
    fn unknown_vertex_is_incompatible() {
        let e = edges();
        let m = Triclustering::null_model(&e);
        let mut doc = ModelDocument::new(&m, &e, None).unwrap();
        doc.source_clusters[0][0] = "zz".into();
        assert!(matches!(doc.model_for(&e), Err(Error::Incompatible(_))));
    }

    #[test]
    fn different_data_is_incompatible() {
        let e = edges();
        let m = Triclustering::compute_counts(&e, vec![0, 1, 0], vec![0, 0, 1, 1], vec![0, 5, 12]).unwrap();
        let doc = ModelDocument::new(&m, &e, None).unwrap();
        let other = TemporalEdgeList::from_records(
            (0..12).map(|n| (format!("a{}", (n + 1) % 3), format!("b{}", n % 4), n as f64)),
        )
        .unwrap();
        assert!(matches!(doc.model_for(&other), Err(Error::Incompatible(_))));
    }
}
