//! Vertex-decremental single-source shortest paths with approximate path
//! queries, built from Even-Shiloach trees, weight-sensitive ES trees, core
//! decompositions via the cut-matching game, and expander trimming. On top of
//! the decremental structures sit approximate vertex-capacitated max s-t
//! flow, min s-t cut, and vertex sparsest cut solvers.

pub mod conn;
pub mod coredecomp;
pub mod estree;
pub mod expander;
pub mod flow;
pub mod graph;
pub mod heavy;
pub mod oracle;
pub mod params;
pub mod sssp;
pub mod wses;

pub use graph::{DynamicGraph, EdgeId, VertexId};
pub use params::{Mode, Params, Rational};
