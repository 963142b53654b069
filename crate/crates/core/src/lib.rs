//! Monte Carlo engine for continuum percolation on the planar Poisson
//! random connection model.
//!
//! The crate is organised bottom-up:
//!
//! * [`ppgen`] – simulation regions, key-derived random streams and
//!   homogeneous Poisson sampling.
//! * [`connfn`] – step-function connection functions with the squash and
//!   spread transforms.
//! * [`geograph`] – cell-list neighbour search and Gilbert / RCM graph
//!   construction.
//! * [`perc`] – site, bond and mixed percolation marks, cluster labelling and
//!   crossing events.
//! * [`enhance`] – bow-tie enhancement, diminishment, pivotality and the
//!   site-in-bond dynamic coupling.
//! * [`estimate`] – coupled crossing sweeps, pseudo-critical thresholds and
//!   inequality-direction experiments.

// Negated float comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod connfn;
pub mod enhance;
pub mod error;
pub mod estimate;
pub mod geograph;
pub mod perc;
pub mod ppgen;

pub use connfn::ConnectionFunction;
pub use error::{Error, Result};
pub use perc::{ClusterLabels, ColouringModel, CrossingSpec, Estimate, MarkState};
pub use geograph::{GeometricGraph, SpatialGrid};

pub use ppgen::{PointSet, Purpose, Region, RngStream};
