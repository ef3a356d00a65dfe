//! Enumeration of admissible, locally optimal single-via routes between sets
//! of origins and destinations in directed road networks.

pub mod bench;
pub mod bits;
pub mod compare;
pub mod dijkstra;
pub mod distance;
pub mod error;
pub mod graph;
pub mod io;
pub mod lo;
pub mod oracle;
pub mod params;
pub mod pipeline;
pub mod query;
pub mod reach;
pub mod sidecar;
pub mod synth;
pub mod trees;
pub mod via;

pub use error::{Result, RevcError};
pub use graph::{Cost, Direction, EdgeId, Graph, PerturbationSpec, VertexId};
