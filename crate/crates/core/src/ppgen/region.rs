use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};

use super::Point;

/// Simulation domain. Lengths are in connection-range units.
///
/// `Disc` is the open disc centred at the origin, `Annulus` the half-open
/// ring `inner <= |x - center| < outer`, `Rect` and `Torus` the half-open
/// boxes `[0, width) x [0, height)` and `[0, side)^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    Disc { radius: f64 },
    Annulus { inner: f64, outer: f64, center: Point },
    Rect { width: f64, height: f64 },
    Torus { side: f64 },
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Region::Disc { radius } => check_positive("radius", radius),
            Region::Annulus {
                inner,
                outer,
                center,
            } => {
                check_positive("inner", inner)?;
                check_positive("outer", outer)?;
                if !(center[0].is_finite() && center[1].is_finite()) {
                    return Err(Error::invalid("center", "must be finite"));
                }
                if inner >= outer {
                    return Err(Error::invalid(
                        "inner",
                        format!("annulus inner radius {inner} must be < outer {outer}"),
                    ));
                }
                Ok(())
            }
            Region::Rect { width, height } => {
                check_positive("width", width)?;
                check_positive("height", height)
            }
            Region::Torus { side } => check_positive("side", side),
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Region::Disc { radius } => PI * radius * radius,
            Region::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
            Region::Rect { width, height } => width * height,
            Region::Torus { side } => side * side,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::Disc { radius } => norm2(p) < radius * radius,
            Region::Annulus {
                inner,
                outer,
                center,
            } => {
                let d2 = norm2([p[0] - center[0], p[1] - center[1]]);
                d2 >= inner * inner && d2 < outer * outer
            }
            Region::Rect { width, height } => {
                p[0] >= 0.0 && p[0] < width && p[1] >= 0.0 && p[1] < height
            }
            Region::Torus { side } => p[0] >= 0.0 && p[0] < side && p[1] >= 0.0 && p[1] < side,
        }
    }

    pub fn torus_side(&self) -> Option<f64> {
        match *self {
            Region::Torus { side } => Some(side),
            _ => None,
        }
    }

    /// Axis-aligned bounding box as `(min, max)` corners.
    pub fn bounds(&self) -> (Point, Point) {
        match *self {
            Region::Disc { radius } => ([-radius, -radius], [radius, radius]),
            Region::Annulus { outer, center, .. } => (
                [center[0] - outer, center[1] - outer],
                [center[0] + outer, center[1] + outer],
            ),
            Region::Rect { width, height } => ([0.0, 0.0], [width, height]),
            Region::Torus { side } => ([0.0, 0.0], [side, side]),
        }
    }

    /// One uniform point in the region. Rejection guards the strict upper
    /// boundaries against floating-point rounding.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        loop {
            let p = match *self {
                Region::Disc { radius } => {
                    let r = radius * rng.random::<f64>().sqrt();
                    let t = 2.0 * PI * rng.random::<f64>();
                    [r * t.cos(), r * t.sin()]
                }
                Region::Annulus {
                    inner,
                    outer,
                    center,
                } => {
                    let u: f64 = rng.random();
                    let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
                    let t = 2.0 * PI * rng.random::<f64>();
                    [center[0] + r * t.cos(), center[1] + r * t.sin()]
                }
                Region::Rect { width, height } => {
                    [width * rng.random::<f64>(), height * rng.random::<f64>()]
                }
                Region::Torus { side } => [side * rng.random::<f64>(), side * rng.random::<f64>()],
            };
            if self.contains(p) {
                return p;
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Region::Disc { radius } => format!("disc(r={radius})"),
            Region::Annulus { inner, outer, .. } => format!("annulus({inner},{outer})"),
            Region::Rect { width, height } => format!("rect({width}x{height})"),
            Region::Torus { side } => format!("torus({side})"),
        }
    }
}

/// Closed-form Lebesgue area.
pub fn area(region: &Region) -> f64 {
    region.area()
}

pub(crate) fn norm2(p: Point) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}
