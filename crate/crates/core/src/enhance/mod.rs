//! Bow-tie enhancement, diminishment, pivotality queries, the
//! Margulis–Russo numerical check and the site-in-bond dynamic coupling.

mod config;
mod coupling;
mod pivotal;
mod russo;

pub use config::{
    apply_diminishment, apply_enhancement, colour_realization, configured_at, detect_configured,
    ConfigModel, ConfigurationReport, Witness,
};
pub use coupling::{
    coupled_diminished_in_mixed, coupled_from_bernoulli, coupled_site_in_bond, explore,
    ClusterContainment, CouplingReport, DiminishedCouplingReport, EnhancedCoupling, Exploration,
};
pub use pivotal::{is_pivotal, PivotMode, PivotalQuery, Realization};
pub use russo::{russo_check, Derivative, RussoParams, RussoReport};
