//! Regions, key-derived random streams and homogeneous Poisson sampling.

mod points;
mod poisson;
mod region;
mod rng;

pub use points::{sample_poisson, NestedSample, Point, PointSet};
pub use poisson::poisson_count;
pub use region::{area, Region};
pub use rng::{Purpose, RngStream, INSERTED_ID};
