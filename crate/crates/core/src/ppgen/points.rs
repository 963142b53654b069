use std::cmp::Ordering;
use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::{check_positive, Error, Result};

use super::poisson::poisson_count;
use super::region::norm2;
use super::{Purpose, Region, RngStream};

pub type Point = [f64; 2];

/// A realised point pattern in a region.
///
/// Points are kept sorted by distance from the origin, ties broken by angle
/// and then by raw sample order. `ids` holds each point's raw sample order;
/// it is the stable key under which per-vertex and per-pair uniforms are
/// drawn, so it survives re-sorting and sub-sampling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSet {
    pub region: Region,
    pub intensity: f64,
    pub points: Vec<Point>,
    pub ids: Vec<u64>,
    /// `(master_seed, replication)` of the stream that produced the sample.
    pub provenance: Option<(u64, u64)>,
}

impl PointSet {
    /// Builds a point set from explicit coordinates; `ids` follow input order.
    pub fn from_points(region: Region, points: Vec<Point>) -> Result<Self> {
        region.validate()?;
        if let Some(p) = points.iter().find(|p| !region.contains(**p)) {
            return Err(Error::invalid(
                "points",
                format!("{p:?} lies outside {}", region.describe()),
            ));
        }
        let ids = (0..points.len() as u64).collect();
        let mut set = PointSet {
            region,
            intensity: 0.0,
            points,
            ids,
            provenance: None,
        };
        set.sort_by_distance();
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn sort_by_distance(&mut self) {
        let pts = &self.points;
        let ids = &self.ids;
        let r2: Vec<f64> = pts.iter().map(|&p| norm2(p)).collect();
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            r2[a]
                .total_cmp(&r2[b])
                .then_with(|| distance_order(pts[a], ids[a], pts[b], ids[b]))
        });
        self.points = order.iter().map(|&i| pts[i]).collect();
        self.ids = order.iter().map(|&i| ids[i]).collect();
    }

    /// Writes `index,x,y` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "x", "y"])?;
        for (i, p) in self.points.iter().enumerate() {
            w.write_record([i.to_string(), p[0].to_string(), p[1].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn distance_order(a: Point, ida: u64, b: Point, idb: u64) -> Ordering {
    norm2(a)
        .total_cmp(&norm2(b))
        .then_with(|| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])))
        .then_with(|| ida.cmp(&idb))
}

/// Homogeneous Poisson process of the given intensity on `region`.
pub fn sample_poisson(region: &Region, intensity: f64, stream: &RngStream) -> Result<PointSet> {
    region.validate()?;
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::invalid(
            "intensity",
            format!("{intensity} must be finite and >= 0"),
        ));
    }
    let mut rng = stream.with_purpose(Purpose::Points).rng();
    let n = poisson_count(intensity * region.area(), &mut rng) as usize;
    let points: Vec<Point> = (0..n).map(|_| region.sample_uniform(&mut rng)).collect();
    let mut set = PointSet {
        region: region.clone(),
        intensity,
        points,
        ids: (0..n as u64).collect(),
        provenance: Some((stream.master_seed(), stream.replication())),
    };
    set.sort_by_distance();
    Ok(set)
}

/// A Poisson process of intensity `max_intensity` whose points carry
/// independent uniform birth marks on `[0, max_intensity)`.
///
/// The points with mark below `λ` form a Poisson process of intensity `λ`,
/// so one sample couples every intensity in `[0, max_intensity]`
/// monotonically. Points are stored in increasing mark order and a point's
/// id is its rank in that order.
#[derive(Clone, Debug)]
pub struct NestedSample {
    pub region: Region,
    pub max_intensity: f64,
    pub points: Vec<Point>,
    pub marks: Vec<f64>,
    pub provenance: (u64, u64),
}

impl NestedSample {
    pub fn new(region: &Region, max_intensity: f64, stream: &RngStream) -> Result<Self> {
        region.validate()?;
        check_positive("max_intensity", max_intensity)?;
        let mut rng = stream.with_purpose(Purpose::Points).rng();
        let n = poisson_count(max_intensity * region.area(), &mut rng) as usize;
        let mut raw: Vec<(f64, Point)> = (0..n)
            .map(|_| {
                let p = region.sample_uniform(&mut rng);
                (max_intensity * rng.random::<f64>(), p)
            })
            .collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(NestedSample {
            region: region.clone(),
            max_intensity,
            marks: raw.iter().map(|r| r.0).collect(),
            points: raw.into_iter().map(|r| r.1).collect(),
            provenance: (stream.master_seed(), stream.replication()),
        })
    }

    /// Number of points with mark `< intensity`.
    pub fn count_below(&self, intensity: f64) -> usize {
        self.marks.partition_point(|&m| m < intensity)
    }

    /// The coupled sub-process at `intensity` (must not exceed the maximum).
    pub fn at(&self, intensity: f64) -> Result<PointSet> {
        if !(intensity >= 0.0 && intensity <= self.max_intensity) {
            return Err(Error::invalid(
                "intensity",
                format!("{intensity} outside [0, {}]", self.max_intensity),
            ));
        }
        let k = self.count_below(intensity);
        let mut set = PointSet {
            region: self.region.clone(),
            intensity,
            points: self.points[..k].to_vec(),
            ids: (0..k as u64).collect(),
            provenance: Some(self.provenance),
        };
        set.sort_by_distance();
        Ok(set)
    }
}
