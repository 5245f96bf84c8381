//! Small-world analysis of collaboration networks.
//!
//! Graphs are built from an edge table plus a node table of artist metadata,
//! sliced into subgraphs by chart, genre or degree, and measured: components,
//! clustering, exact diameter, degree distribution and power-law fit, Louvain
//! communities, and comparisons against density-matched random graphs and ring
//! lattices. The [`report`] module wires these into the `collabnet` command.

pub mod baselines;
pub mod community;
pub mod cooccur;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod report;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId, NodeSet};
