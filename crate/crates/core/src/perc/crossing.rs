use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::geograph::GeometricGraph;
use crate::ppgen::{Point, Region};

use super::clusters::{ClusterLabels, CORE, SHELL};
use super::MarkState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Either,
}

fn default_margin() -> f64 {
    0.5
}

/// Crossing event evaluated on a finite window.
///
/// `DiscAnnulus` asks for an open path inside the disc of radius `n` from a
/// vertex with `|x| < margin` to a vertex with `n - margin <= |x| < n`. The
/// enhancement model uses `margin = 0.5`; the diminishment model uses `0.2`.
/// `TorusWrap` asks for an open cluster winding around the torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CrossingSpec {
    DiscAnnulus {
        n: f64,
        #[serde(default = "default_margin")]
        margin: f64,
    },
    TorusWrap { axis: Axis },
}

impl CrossingSpec {
    pub fn disc(n: f64) -> Self {
        CrossingSpec::DiscAnnulus { n, margin: 0.5 }
    }

    pub fn disc_diminished(n: f64) -> Self {
        CrossingSpec::DiscAnnulus { n, margin: 0.2 }
    }

    pub fn wrap() -> Self {
        CrossingSpec::TorusWrap { axis: Axis::Either }
    }

    pub fn validate(&self) -> Result<()> {
        if let CrossingSpec::DiscAnnulus { n, margin } = *self {
            check_positive("margin", margin)?;
            if !(n > 1.0 && n.is_finite()) {
                return Err(Error::invalid("n", format!("{n} must be > 1")));
            }
            if n <= 2.0 * margin {
                return Err(Error::invalid(
                    "n",
                    format!("inner disc and outer annulus overlap for n={n}, margin={margin}"),
                ));
            }
        }
        Ok(())
    }

    /// The window this event is defined on, for the given torus side when
    /// wrapping.
    pub fn check_region(&self, region: &Region) -> Result<()> {
        match (*self, region) {
            (CrossingSpec::DiscAnnulus { n, .. }, Region::Disc { radius })
                if (radius - n).abs() <= 1e-12 * n.max(1.0) =>
            {
                Ok(())
            }
            (CrossingSpec::TorusWrap { .. }, Region::Torus { .. }) => Ok(()),
            _ => Err(Error::RegionMismatch(format!(
                "{} is not defined on {}",
                self.describe(),
                region.describe()
            ))),
        }
    }

    pub fn flag_of(&self, p: Point) -> u8 {
        match *self {
            CrossingSpec::DiscAnnulus { n, margin } => {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                let mut f = 0;
                if r < margin {
                    f |= CORE;
                }
                if r >= n - margin && r < n {
                    f |= SHELL;
                }
                f
            }
            CrossingSpec::TorusWrap { .. } => 0,
        }
    }

    /// Whether a cluster with these flags and windings realises the event.
    pub fn cluster_crosses(&self, flags: u8, wrap: [bool; 2]) -> bool {
        match *self {
            CrossingSpec::DiscAnnulus { .. } => flags & (CORE | SHELL) == CORE | SHELL,
            CrossingSpec::TorusWrap { axis } => match axis {
                Axis::X => wrap[0],
                Axis::Y => wrap[1],
                Axis::Either => wrap[0] || wrap[1],
            },
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            CrossingSpec::DiscAnnulus { n, margin } => format!("disc(n={n};margin={margin})"),
            CrossingSpec::TorusWrap { axis } => format!("wrap({axis:?})").to_lowercase(),
        }
    }
}

pub fn vertex_flags(g: &GeometricGraph, spec: &CrossingSpec) -> Vec<u8> {
    (0..g.len()).map(|i| spec.flag_of(g.position(i))).collect()
}

/// Crossing event for an explicit set of open vertices and edges.
pub fn crossing_with(
    g: &GeometricGraph,
    open: &[bool],
    edge_open: Option<&[bool]>,
    spec: &CrossingSpec,
) -> Result<bool> {
    spec.validate()?;
    spec.check_region(&g.points().region)?;
    if open.len() != g.len() || edge_open.is_some_and(|e| e.len() != g.edge_count()) {
        return Err(Error::SizeMismatch("open flags do not match graph".into()));
    }
    let flags = vertex_flags(g, spec);
    let labels = ClusterLabels::build(g, open, edge_open, Some(&flags));
    Ok(labels
        .clusters()
        .into_iter()
        .any(|l| spec.cluster_crosses(labels.flags(l), labels.wraps(l))))
}

/// True iff some open cluster realises `spec`.
pub fn crossing_occurs(g: &GeometricGraph, m: &MarkState, spec: &CrossingSpec) -> Result<bool> {
    if m.len() != g.len() {
        return Err(Error::SizeMismatch(format!(
            "marks cover {} vertices, graph has {}",
            m.len(),
            g.len()
        )));
    }
    crossing_with(g, &m.open_vertices(), Some(&m.edge_open), spec)
}
