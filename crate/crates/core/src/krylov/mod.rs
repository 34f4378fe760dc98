//! Krylov sectors, the coarse-grained sector graph and sector packing.

mod decomposition;
mod graph;
mod pack;

pub use decomposition::{detect_fragile, enumerate_sectors, FragileLabel, KrylovDecomposition, ENUMERATION_CAP};
pub use graph::{big_ratio, build_krylov_graph, build_krylov_graph_with, Edge, EdgeConvention, KrylovGraph};
pub use pack::{pack_sectors, PackingScheme};
