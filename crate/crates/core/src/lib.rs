//! Palette sparsification for locally sparse graphs.

pub mod coloring;
pub mod cover;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod nibble;
pub mod query;
pub mod rng;
pub mod sparsify;
pub mod streaming;

pub use coloring::{verify_coloring, PartialColoring, Verification, Violation};
pub use cover::{Color, CorrespondenceCover, Instance, ListAssignment};
pub use graph::{Graph, GraphError, Vertex};
