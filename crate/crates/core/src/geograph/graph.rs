use std::io::Write;

use serde::Serialize;

use crate::connfn::ConnectionFunction;
use crate::error::{check_positive, Error, Result};
use crate::ppgen::{Point, PointSet, Purpose, RngStream, INSERTED_ID};

use super::grid::{Metric, SpatialGrid};

/// How candidate pairs become edges.
#[derive(Clone, Debug)]
pub enum EdgeRule {
    /// Edge iff distance `<= range`.
    Gilbert { range: f64 },
    /// Edge with probability `f(distance)`, decided by the pair-keyed
    /// uniform of `stream` at the two vertex ids.
    Rcm {
        f: ConnectionFunction,
        stream: RngStream,
    },
}

impl EdgeRule {
    pub fn support(&self) -> f64 {
        match self {
            EdgeRule::Gilbert { range } => *range,
            EdgeRule::Rcm { f, .. } => f.support_radius(),
        }
    }

    #[inline]
    /// Whether two points at distance `dist` with the given ids are joined.
    pub fn connects(&self, dist: f64, id_a: u64, id_b: u64) -> bool {
        match self {
            EdgeRule::Gilbert { range } => dist <= *range,
            EdgeRule::Rcm { f, stream } => {
                let prob = f.value(dist);
                prob >= 1.0 || (prob > 0.0 && stream.pair_uniform(id_a, id_b) < prob)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub dist: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub vertex: usize,
    pub edge: usize,
}

/// Undirected geometric graph on a point set.
///
/// Edges are indexed lexicographically by `(min vertex, max vertex)` and
/// neighbour lists are sorted by vertex index. A vertex inserted with
/// [`GeometricGraph::with_inserted_vertex`] is appended after the sampled
/// vertices and its edges after the sampled edges.
#[derive(Clone, Debug)]
pub struct GeometricGraph {
    points: PointSet,
    metric: Metric,
    rule: EdgeRule,
    adjacency: Vec<Vec<Neighbor>>,
    edges: Vec<Edge>,
    grid: SpatialGrid,
    extra: Vec<usize>,
    pairs_examined: usize,
}

pub fn build_gilbert(points: &PointSet, range: f64) -> Result<GeometricGraph> {
    check_positive("range", range)?;
    GeometricGraph::build(points, EdgeRule::Gilbert { range })
}

pub fn build_rcm(
    points: &PointSet,
    f: &ConnectionFunction,
    stream: &RngStream,
) -> Result<GeometricGraph> {
    GeometricGraph::build(
        points,
        EdgeRule::Rcm {
            f: f.clone(),
            stream: stream.with_purpose(Purpose::Edges),
        },
    )
}

impl GeometricGraph {
    pub fn build(points: &PointSet, rule: EdgeRule) -> Result<Self> {
        let support = rule.support();
        let metric = Metric::for_region(&points.region);
        if let Metric::Torus { side } = metric {
            if support >= side / 2.0 {
                return Err(Error::invalid(
                    "support",
                    format!("support radius {support} must be < half the torus side {side}"),
                ));
            }
        }
        let pts = &points.points;
        let grid = SpatialGrid::build(pts, &points.region, support);
        let mut pairs = Vec::new();
        let mut examined = 0usize;
        let mut later = Vec::new();
        for (i, &a) in pts.iter().enumerate() {
            later.clear();
            grid.for_each_candidate(a, support, |j| {
                if j > i {
                    later.push(j);
                }
            });
            later.sort_unstable();
            for &j in &later {
                let d = metric.distance(a, pts[j]);
                if d <= support {
                    examined += 1;
                    if rule.connects(d, points.ids[i], points.ids[j]) {
                        pairs.push(Edge { u: i, v: j, dist: d });
                    }
                }
            }
        }
        // Edges are in (u, v) order, so each adjacency list comes out sorted
        // by neighbour index.
        let mut degree = vec![0usize; pts.len()];
        for e in &pairs {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut adjacency: Vec<Vec<Neighbor>> = degree.iter().map(|&d| Vec::with_capacity(d)).collect();
        for (e, edge) in pairs.iter().enumerate() {
            adjacency[edge.u].push(Neighbor {
                vertex: edge.v,
                edge: e,
            });
            adjacency[edge.v].push(Neighbor {
                vertex: edge.u,
                edge: e,
            });
        }
        Ok(GeometricGraph {
            points: points.clone(),
            metric,
            rule,
            adjacency,
            edges: pairs,
            grid,
            extra: Vec::new(),
            pairs_examined: examined,
        })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn position(&self, i: usize) -> Point {
        self.points.points[i]
    }

    pub fn id(&self, i: usize) -> u64 {
        self.points.ids[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn rule(&self) -> &EdgeRule {
        &self.rule
    }

    pub fn support_radius(&self) -> f64 {
        self.rule.support()
    }

    /// True for Gilbert graphs and RCMs whose connection function is an
    /// indicator (edges are then deterministic).
    pub fn is_gilbert(&self) -> bool {
        match &self.rule {
            EdgeRule::Gilbert { .. } => true,
            EdgeRule::Rcm { f, .. } => f.as_indicator().is_some(),
        }
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_between(&self, i: usize, j: usize) -> Option<usize> {
        let list = &self.adjacency[i];
        list.binary_search_by_key(&j, |n| n.vertex)
            .ok()
            .map(|k| list[k].edge)
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.edge_between(i, j).is_some()
    }

    /// Number of pairs within the support radius examined during
    /// construction (each eligible pair exactly once).
    pub fn pairs_examined(&self) -> usize {
        self.pairs_examined
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.distance(self.position(i), self.position(j))
    }

    pub fn displacement(&self, i: usize, j: usize) -> Point {
        self.metric.displacement(self.position(i), self.position(j))
    }

    /// Vertices other than `i` within distance `radius` of vertex `i`,
    /// sorted by index.
    pub fn within(&self, i: usize, radius: f64) -> Vec<usize> {
        let mut out = self.within_point(self.position(i), radius);
        out.retain(|&j| j != i);
        out
    }

    /// Vertices within distance `radius` of location `p`, sorted by index.
    pub fn within_point(&self, p: Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.grid.for_each_candidate(p, radius, |j| {
            if self.metric.distance(p, self.points.points[j]) <= radius {
                out.push(j);
            }
        });
        for &j in &self.extra {
            if self.metric.distance(p, self.points.points[j]) <= radius {
                out.push(j);
            }
        }
        out.sort_unstable();
        out
    }

    /// The graph with one extra vertex at `x` (key [`INSERTED_ID`]), joined to
    /// existing vertices by the same edge rule and pair-keyed randomness.
    pub fn with_inserted_vertex(&self, x: Point) -> Result<Self> {
        if !self.points.region.contains(x) {
            return Err(Error::invalid(
                "x",
                format!("{x:?} lies outside {}", self.points.region.describe()),
            ));
        }
        let mut g = self.clone();
        let new = g.len();
        let support = g.support_radius();
        let near = self.within_point(x, support);
        g.points.points.push(x);
        g.points.ids.push(INSERTED_ID);
        g.adjacency.push(Vec::new());
        g.extra.push(new);
        for j in near {
            let d = g.metric.distance(x, g.points.points[j]);
            if g.rule.connects(d, INSERTED_ID, g.points.ids[j]) {
                let e = g.edges.len();
                g.edges.push(Edge { u: j, v: new, dist: d });
                g.adjacency[j].push(Neighbor { vertex: new, edge: e });
                g.adjacency[new].push(Neighbor { vertex: j, edge: e });
            }
        }
        Ok(g)
    }

    /// Writes `u,v,dist` rows.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "v", "dist"])?;
        for e in &self.edges {
            w.write_record([e.u.to_string(), e.v.to_string(), e.dist.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeStats {
    pub mean: f64,
    pub variance: f64,
    /// `histogram[k]` = number of vertices of degree `k`.
    pub histogram: Vec<usize>,
}

pub fn degree_stats(g: &GeometricGraph) -> DegreeStats {
    let n = g.len();
    if n == 0 {
        return DegreeStats {
            mean: 0.0,
            variance: 0.0,
            histogram: Vec::new(),
        };
    }
    let degrees: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; max + 1];
    for &d in &degrees {
        histogram[d] += 1;
    }
    let mean = degrees.iter().sum::<usize>() as f64 / n as f64;
    let variance = degrees
        .iter()
        .map(|&d| (d as f64 - mean).powi(2))
        .sum::<f64>()
        / n as f64;
    DegreeStats {
        mean,
        variance,
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppgen::Region;

    fn set(points: Vec<Point>) -> PointSet {
        PointSet::from_points(Region::Rect { width: 10.0, height: 10.0 }, points).unwrap()
    }

    #[test]
    fn gilbert_pairs_at_threshold() {
        let g = build_gilbert(&set(vec![[1.0, 1.0], [1.5, 1.0]]), 1.0).unwrap();
        assert_eq!(g.edge_count(), 1);
        let g = build_gilbert(&set(vec![[1.0, 1.0], [2.000001, 1.0]]), 1.0).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn degree_stats_small_cases() {
        let empty = build_gilbert(&set(vec![]), 1.0).unwrap();
        assert_eq!(degree_stats(&empty).mean, 0.0);
        let tri = build_gilbert(&set(vec![[1.0, 1.0], [1.5, 1.0], [1.2, 1.4]]), 1.0).unwrap();
        let s = degree_stats(&tri);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.histogram, vec![0, 0, 3]);
    }

    #[test]
    fn torus_edges_wrap() {
        let pts = PointSet::from_points(Region::Torus { side: 5.0 }, vec![[0.1, 2.0], [4.8, 2.0]])
            .unwrap();
        let g = build_gilbert(&pts, 1.0).unwrap();
        assert_eq!(g.edge_count(), 1);
        let d = g.displacement(g.edges()[0].u, g.edges()[0].v);
        assert!((d[0].abs() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn torus_too_small_for_support() {
        let pts = PointSet::from_points(Region::Torus { side: 2.0 }, vec![]).unwrap();
        assert!(build_gilbert(&pts, 1.0).is_err());
    }

    #[test]
    fn inserted_vertex_edges() {
        let g = build_gilbert(&set(vec![[1.0, 1.0], [3.0, 1.0]]), 1.0).unwrap();
        let h = g.with_inserted_vertex([2.0, 1.0]).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h.id(2), INSERTED_ID);
        assert_eq!(h.degree(2), 2);
        assert!(h.adjacent(0, 2) && h.adjacent(1, 2));
        assert_eq!(h.within(2, 1.0), vec![0, 1]);
        assert!(g.with_inserted_vertex([11.0, 1.0]).is_err());
    }

    #[test]
    fn edges_csv() {
        let g = build_gilbert(&set(vec![[1.0, 1.0], [1.5, 1.0]]), 1.0).unwrap();
        let mut buf = Vec::new();
        g.write_edges_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "u,v,dist\n0,1,0.5\n");
    }
}
