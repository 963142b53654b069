//! Site, bond and mixed percolation marks, cluster labelling, crossing
//! events and crossing-probability estimates.

mod clusters;
mod crossing;
mod marks;
mod theta;

pub use clusters::{components, ClusterLabels, DisplacementUnionFind, CORE, SHELL};
pub use crossing::{crossing_occurs, crossing_with, vertex_flags, Axis, CrossingSpec};
pub use marks::{bond_percolation, mixed_percolation, site_percolation, Colour, MarkState};
pub use theta::{
    binomial_estimate, estimate_theta_n, sample_graph, theta_replication, ColouringModel, Estimate,
    ThetaParams,
};
