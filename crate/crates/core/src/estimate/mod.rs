//! Pseudo-critical thresholds and finite-size direction experiments.
//!
//! Every estimator is a monotone coupled family of crossing indicators,
//! one per replication. A replication's critical value is where its
//! indicator switches on; the coupled crossing curve is the empirical
//! distribution of those values, and the pseudo-critical point is its
//! 1/2-crossing.

mod estimator;
mod threshold;
mod verify;

pub use estimator::{
    critical_values, BondCrossing, CoupledCrossing, IntensityCrossing, ModelCrossing, SiteCrossing,
};
pub use threshold::{
    bisect_curve, bisect_threshold, sweep_crossing, CurvePoint, ThresholdResult, BOOTSTRAP_SAMPLES,
};
pub use verify::{verify_inequality, Experiment, VerifyReport};
