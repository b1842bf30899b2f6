//! Barabási–Albert growth with an incrementally maintained strong-tie
//! subgraph, plus the metrics, sweeps and file outputs built on top of it.

pub mod cli;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod output;
pub mod rng;
pub mod sim;
pub mod svg;
pub mod tie_strength;

pub use error::{Error, Result};
pub use graph::{Arrival, EdgeId, EvolvingGraph, NodeId};
pub use metrics::{SeriesSummary, SnapshotRecord};
pub use rng::Prng;
pub use sim::{RunConfig, RunResult};
pub use tie_strength::{OverlapPolicy, StrongGraph};
