//! Triclustering of temporal interaction data.
//!
//! A temporal interaction data set is a list of timestamped directed edges
//! `(source, destination, time)`. This crate partitions the source vertices,
//! the destination vertices and the (rank-transformed) time axis jointly,
//! producing a piecewise-stationary block model. Models are scored with an
//! exact MODL cost (negative log posterior of the triclustering given the data)
//! and searched with a greedy bottom-up merge heuristic wrapped in a variable
//! neighborhood search.
//!
//! The main entry points:
//!
//! * [`data::TemporalEdgeList`] and [`data::read_edge_list`] for ingestion.
//! * [`model::Triclustering`] for the model and its count cube.
//! * [`criterion::cost`] and [`criterion::merge_delta`] for scoring.
//! * [`optimizer::vns_fit`] to fit a model.
//! * [`coarsen::agglomerate`] to simplify a fitted model.
//! * [`analysis`] for mutual-information contributions.
//! * [`synthgen`] for synthetic benchmarks and model sampling.

pub mod analysis;
pub mod cli;
pub mod coarsen;
pub mod combinatorics;
pub mod criterion;
pub mod data;
pub mod error;
pub mod io;
pub mod model;
pub mod optimizer;
mod search;
pub mod synthgen;

pub use error::{Error, Result};
pub use model::{Axis, Triclustering};
