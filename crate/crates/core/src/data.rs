//! Temporal edge lists: ingestion, id mapping and the rank transform.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::model::Axis;

/// Field separator of an edge-list file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Delimiter {
    /// Tab if the first data row contains one, comma otherwise.
    #[default]
    Auto,
    Comma,
    Tab,
}

impl Delimiter {
    fn resolve(self, sample: &str) -> char {
        match self {
            Delimiter::Comma => ',',
            Delimiter::Tab => '\t',
            Delimiter::Auto => {
                if sample.contains('\t') {
                    '\t'
                } else {
                    ','
                }
            }
        }
    }
}

impl std::str::FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Delimiter::Auto),
            "csv" | "comma" => Ok(Delimiter::Comma),
            "tsv" | "tab" => Ok(Delimiter::Tab),
            other => Err(Error::Value(format!("unknown delimiter format '{other}'"))),
        }
    }
}

/// An observed temporal interaction data set.
///
/// Vertex ids are opaque strings mapped to dense indices. Source and
/// destination universes are separate: the same string may name a source
/// vertex and a destination vertex, which are different vertices of the model.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalEdgeList {
    sources: Vec<u32>,
    destinations: Vec<u32>,
    time_ranks: Vec<u32>,
    raw_times: Option<Vec<f64>>,
    source_ids: Vec<String>,
    destination_ids: Vec<String>,
}

/// Ranks `1..=m` of the timestamps; ties keep input order.
pub fn rank_transform(raw_times: &[f64]) -> Result<Vec<u32>> {
    if raw_times.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(pos) = raw_times.iter().position(|t| !t.is_finite()) {
        return Err(Error::Value(format!("timestamp at position {pos} is not finite")));
    }
    if raw_times.len() > u32::MAX as usize {
        return Err(Error::Value("too many edges".into()));
    }
    let mut order: Vec<usize> = (0..raw_times.len()).collect();
    order.sort_by(|&a, &b| raw_times[a].total_cmp(&raw_times[b]));
    let mut ranks = vec![0u32; raw_times.len()];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos as u32 + 1;
    }
    Ok(ranks)
}

#[derive(Default)]
struct Interner {
    ids: Vec<String>,
    index: HashMap<String, u32>,
    frozen: bool,
}

impl Interner {
    fn with_universe(universe: Vec<String>) -> Result<Self> {
        let mut interner = Interner::default();
        for id in universe {
            if interner.index.contains_key(&id) {
                return Err(Error::Value(format!("duplicate vertex id '{id}' in universe")));
            }
            interner.index.insert(id.clone(), interner.ids.len() as u32);
            interner.ids.push(id);
        }
        interner.frozen = true;
        Ok(interner)
    }

    fn intern(&mut self, id: &str, axis: Axis) -> Result<u32> {
        if let Some(&idx) = self.index.get(id) {
            return Ok(idx);
        }
        if self.frozen {
            return Err(Error::Value(format!("{axis} id '{id}' is not in the supplied universe")));
        }
        let idx = self.ids.len() as u32;
        self.index.insert(id.to_owned(), idx);
        self.ids.push(id.to_owned());
        Ok(idx)
    }
}

impl TemporalEdgeList {
    /// Builds an edge list from `(source, destination, timestamp)` records.
    /// Ids are numbered by first occurrence.
    pub fn from_records<I, S, D>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, D, f64)>,
        S: AsRef<str>,
        D: AsRef<str>,
    {
        Self::build(records, Interner::default(), Interner::default())
    }

    /// Like [`from_records`](Self::from_records) but with fixed vertex
    /// universes, listed in index order. Universe vertices absent from the
    /// records become isolated vertices of degree zero.
    pub fn from_records_with_universe<I, S, D>(
        records: I,
        source_universe: Vec<String>,
        destination_universe: Vec<String>,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (S, D, f64)>,
        S: AsRef<str>,
        D: AsRef<str>,
    {
        Self::build(
            records,
            Interner::with_universe(source_universe)?,
            Interner::with_universe(destination_universe)?,
        )
    }

    fn build<I, S, D>(records: I, mut src: Interner, mut dst: Interner) -> Result<Self>
    where
        I: IntoIterator<Item = (S, D, f64)>,
        S: AsRef<str>,
        D: AsRef<str>,
    {
        let mut sources = Vec::new();
        let mut destinations = Vec::new();
        let mut raw = Vec::new();
        for (s, d, t) in records {
            sources.push(src.intern(s.as_ref(), Axis::Source)?);
            destinations.push(dst.intern(d.as_ref(), Axis::Destination)?);
            raw.push(t);
        }
        if raw.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let time_ranks = rank_transform(&raw)?;
        Ok(Self {
            sources,
            destinations,
            time_ranks,
            raw_times: Some(raw),
            source_ids: src.ids,
            destination_ids: dst.ids,
        })
    }

    /// Builds an edge list directly from dense indices and ranks. Vertex ids
    /// default to the decimal index.
    pub fn from_indexed(
        n_sources: usize,
        n_destinations: usize,
        sources: Vec<u32>,
        destinations: Vec<u32>,
        time_ranks: Vec<u32>,
    ) -> Result<Self> {
        let m = sources.len();
        if m == 0 {
            return Err(Error::EmptyDataset);
        }
        if destinations.len() != m {
            return Err(Error::Dimension(m, destinations.len()));
        }
        if time_ranks.len() != m {
            return Err(Error::Dimension(m, time_ranks.len()));
        }
        if let Some(&s) = sources.iter().find(|&&s| s as usize >= n_sources) {
            return Err(Error::Value(format!("source index {s} outside universe of {n_sources}")));
        }
        if let Some(&d) = destinations.iter().find(|&&d| d as usize >= n_destinations) {
            return Err(Error::Value(format!(
                "destination index {d} outside universe of {n_destinations}"
            )));
        }
        let mut seen = vec![false; m];
        for &r in &time_ranks {
            if r == 0 || r as usize > m || std::mem::replace(&mut seen[r as usize - 1], true) {
                return Err(Error::Value("time ranks are not a permutation of 1..=m".into()));
            }
        }
        Ok(Self {
            sources,
            destinations,
            time_ranks,
            raw_times: None,
            source_ids: (0..n_sources).map(|i| i.to_string()).collect(),
            destination_ids: (0..n_destinations).map(|i| i.to_string()).collect(),
        })
    }

    /// Replaces the vertex id tables; lengths must match the universes.
    pub fn with_ids(mut self, source_ids: Vec<String>, destination_ids: Vec<String>) -> Result<Self> {
        if source_ids.len() != self.source_ids.len() {
            return Err(Error::Dimension(self.source_ids.len(), source_ids.len()));
        }
        if destination_ids.len() != self.destination_ids.len() {
            return Err(Error::Dimension(self.destination_ids.len(), destination_ids.len()));
        }
        self.source_ids = source_ids;
        self.destination_ids = destination_ids;
        Ok(self)
    }

    /// Attaches raw timestamps, recomputing the ranks from them.
    pub fn with_raw_times(mut self, raw: Vec<f64>) -> Result<Self> {
        if raw.len() != self.len() {
            return Err(Error::Dimension(self.len(), raw.len()));
        }
        self.time_ranks = rank_transform(&raw)?;
        self.raw_times = Some(raw);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// Number of edges `m`.
    pub fn m(&self) -> u64 {
        self.sources.len() as u64
    }

    pub fn n_sources(&self) -> usize {
        self.source_ids.len()
    }

    pub fn n_destinations(&self) -> usize {
        self.destination_ids.len()
    }

    pub fn sources(&self) -> &[u32] {
        &self.sources
    }

    pub fn destinations(&self) -> &[u32] {
        &self.destinations
    }

    pub fn time_ranks(&self) -> &[u32] {
        &self.time_ranks
    }

    pub fn raw_times(&self) -> Option<&[f64]> {
        self.raw_times.as_deref()
    }

    pub fn source_ids(&self) -> &[String] {
        &self.source_ids
    }

    pub fn destination_ids(&self) -> &[String] {
        &self.destination_ids
    }

    /// Iterates `(source, destination, rank)` triples in input order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.sources
            .iter()
            .zip(&self.destinations)
            .zip(&self.time_ranks)
            .map(|((&s, &d), &t)| (s, d, t))
    }

    pub fn out_degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.n_sources()];
        for &s in &self.sources {
            deg[s as usize] += 1;
        }
        deg
    }

    pub fn in_degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.n_destinations()];
        for &d in &self.destinations {
            deg[d as usize] += 1;
        }
        deg
    }

    /// Raw timestamps sorted by rank (`result[r - 1]` is the stamp of rank
    /// `r`). Falls back to the ranks themselves when no raw times exist.
    pub fn raw_times_by_rank(&self) -> Vec<f64> {
        let mut by_rank = vec![0.0; self.len()];
        for (n, &r) in self.time_ranks.iter().enumerate() {
            by_rank[r as usize - 1] = match &self.raw_times {
                Some(raw) => raw[n],
                None => r as f64,
            };
        }
        by_rank
    }

    /// Original-timestamp cut value for a boundary placed after `rank`:
    /// the midpoint between the stamps of ranks `rank` and `rank + 1`.
    /// Boundaries at 0 and `m` map to the extreme stamps.
    pub fn cut_value(by_rank: &[f64], rank: u32) -> f64 {
        let r = rank as usize;
        if r == 0 {
            by_rank[0]
        } else if r >= by_rank.len() {
            by_rank[by_rank.len() - 1]
        } else {
            0.5 * (by_rank[r - 1] + by_rank[r])
        }
    }

    pub(crate) fn replace_edges(
        &self,
        sources: Vec<u32>,
        destinations: Vec<u32>,
        time_ranks: Vec<u32>,
        raw_times: Option<Vec<f64>>,
    ) -> Self {
        Self {
            sources,
            destinations,
            time_ranks,
            raw_times,
            source_ids: self.source_ids.clone(),
            destination_ids: self.destination_ids.clone(),
        }
    }

    /// Writes `src,dst,time` rows. Raw stamps are written when present,
    /// ranks otherwise.
    pub fn write<W: Write>(&self, mut out: W, delimiter: Delimiter) -> Result<()> {
        let sep = match delimiter {
            Delimiter::Tab => '\t',
            _ => ',',
        };
        writeln!(out, "src{sep}dst{sep}time")?;
        for (n, (s, d, r)) in self.edges().enumerate() {
            let src = &self.source_ids[s as usize];
            let dst = &self.destination_ids[d as usize];
            match &self.raw_times {
                Some(raw) => writeln!(out, "{src}{sep}{dst}{sep}{}", raw[n])?,
                None => writeln!(out, "{src}{sep}{dst}{sep}{r}")?,
            }
        }
        Ok(())
    }
}

/// Reads a delimiter-separated edge list with columns `src, dst, time`.
///
/// Lines starting with `#` and blank lines are skipped. The first data row is
/// treated as a header when its time column is not numeric. Equal timestamps
/// are ranked in input order.
pub fn read_edge_list<R: BufRead>(reader: R, delimiter: Delimiter) -> Result<TemporalEdgeList> {
    let mut records: Vec<(String, String, f64)> = Vec::new();
    let mut sep: Option<char> = None;
    let mut seen_data_row = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let sep = *sep.get_or_insert_with(|| delimiter.resolve(trimmed));
        let fields: Vec<&str> = trimmed.split(sep).map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let first_row = !seen_data_row;
        seen_data_row = true;
        let time = match fields[2].parse::<f64>() {
            Ok(t) if t.is_finite() => t,
            Ok(_) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("timestamp '{}' is not finite", fields[2]),
                })
            }
            Err(_) if first_row => continue,
            Err(_) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("timestamp '{}' is not a number", fields[2]),
                })
            }
        };
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::Parse { line: line_no, message: "empty vertex id".into() });
        }
        records.push((fields[0].to_owned(), fields[1].to_owned(), time));
    }
    TemporalEdgeList::from_records(records)
}
