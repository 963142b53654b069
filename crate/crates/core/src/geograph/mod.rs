//! Cell-list neighbour search and geometric graph construction.

mod graph;
mod grid;

pub use graph::{
    build_gilbert, build_rcm, degree_stats, DegreeStats, Edge, EdgeRule, GeometricGraph, Neighbor,
};
pub use grid::{Metric, SpatialGrid};
