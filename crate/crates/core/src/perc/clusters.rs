use crate::error::{Error, Result};
use crate::geograph::{GeometricGraph, Metric};
use crate::ppgen::Point;

use super::MarkState;

/// Vertex lies in the inner target set of a disc crossing.
pub const CORE: u8 = 1;
/// Vertex lies in the outer annulus of a disc crossing.
pub const SHELL: u8 = 2;

/// Union-find that also tracks each vertex's displacement from its root.
///
/// On a torus, closing a loop whose displacements do not sum to zero means
/// the cluster winds around the torus; the axis of any nonzero winding is
/// recorded on the root. Roots additionally OR together per-vertex flag
/// bits (see [`CORE`], [`SHELL`]).
#[derive(Clone, Debug)]
pub struct DisplacementUnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    offset: Vec<Point>,
    size: Vec<usize>,
    wrap: Vec<[bool; 2]>,
    flags: Vec<u8>,
    side: Option<f64>,
}

impl DisplacementUnionFind {
    pub fn new(n: usize, metric: Metric) -> Self {
        DisplacementUnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
            offset: vec![[0.0, 0.0]; n],
            size: vec![1; n],
            wrap: vec![[false, false]; n],
            flags: vec![0; n],
            side: match metric {
                Metric::Torus { side } => Some(side),
                Metric::Planar => None,
            },
        }
    }

    pub fn set_flags(&mut self, i: usize, bits: u8) {
        let (r, _) = self.find(i);
        self.flags[r] |= bits;
    }

    /// Root of `i` and the displacement of `i` relative to it.
    pub fn find(&mut self, i: usize) -> (usize, Point) {
        let mut r = i;
        let mut total = [0.0, 0.0];
        while self.parent[r] != r {
            total = [total[0] + self.offset[r][0], total[1] + self.offset[r][1]];
            r = self.parent[r];
        }
        // Second pass: point the path at the root, peeling off each
        // vertex's own offset from the running total.
        let mut v = i;
        let mut rem = total;
        while self.parent[v] != r && v != r {
            let next = self.parent[v];
            let own = self.offset[v];
            self.offset[v] = rem;
            self.parent[v] = r;
            rem = [rem[0] - own[0], rem[1] - own[1]];
            v = next;
        }
        (r, total)
    }

    /// Joins `i` and `j`, where `d` is the displacement from `i` to `j`.
    /// Returns the root of the merged cluster.
    pub fn union(&mut self, i: usize, j: usize, d: Point) -> usize {
        let (ri, oi) = self.find(i);
        let (rj, oj) = self.find(j);
        // Position of rj relative to ri.
        let rel = [oi[0] + d[0] - oj[0], oi[1] + d[1] - oj[1]];
        if ri == rj {
            if let Some(side) = self.side {
                for (w, r) in self.wrap[ri].iter_mut().zip(rel) {
                    if r.abs() > side / 2.0 {
                        *w = true;
                    }
                }
            }
            return ri;
        }
        let (top, below, off) = if self.rank[ri] >= self.rank[rj] {
            (ri, rj, rel)
        } else {
            (rj, ri, [-rel[0], -rel[1]])
        };
        self.parent[below] = top;
        self.offset[below] = off;
        if self.rank[top] == self.rank[below] {
            self.rank[top] += 1;
        }
        self.size[top] += self.size[below];
        self.flags[top] |= self.flags[below];
        let w = self.wrap[below];
        self.wrap[top][0] |= w[0];
        self.wrap[top][1] |= w[1];
        top
    }

    pub fn root_size(&self, root: usize) -> usize {
        self.size[root]
    }

    pub fn root_wrap(&self, root: usize) -> [bool; 2] {
        self.wrap[root]
    }

    pub fn root_flags(&self, root: usize) -> u8 {
        self.flags[root]
    }
}

/// Cluster labels of the open subgraph.
///
/// A cluster's label is the smallest vertex index it contains; closed
/// vertices carry no label.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterLabels {
    labels: Vec<Option<usize>>,
    sizes: Vec<usize>,
    wraps: Vec<[bool; 2]>,
    flags: Vec<u8>,
}

impl ClusterLabels {
    pub fn build(
        g: &GeometricGraph,
        open: &[bool],
        edge_open: Option<&[bool]>,
        vertex_flags: Option<&[u8]>,
    ) -> Self {
        let n = g.len();
        let mut uf = DisplacementUnionFind::new(n, g.metric());
        if let Some(fl) = vertex_flags {
            for i in (0..n).filter(|&i| open[i]) {
                uf.set_flags(i, fl[i]);
            }
        }
        for (e, edge) in g.edges().iter().enumerate() {
            if open[edge.u] && open[edge.v] && edge_open.is_none_or(|eo| eo[e]) {
                uf.union(edge.u, edge.v, g.displacement(edge.u, edge.v));
            }
        }
        let mut canon = vec![usize::MAX; n];
        let mut labels = vec![None; n];
        for i in 0..n {
            if !open[i] {
                continue;
            }
            let (r, _) = uf.find(i);
            if canon[r] == usize::MAX {
                canon[r] = i;
            }
            labels[i] = Some(canon[r]);
        }
        let mut sizes = vec![0; n];
        let mut wraps = vec![[false, false]; n];
        let mut flags = vec![0u8; n];
        for l in 0..n {
            if labels[l] == Some(l) {
                let r = uf.find(l).0;
                sizes[l] = uf.root_size(r);
                wraps[l] = uf.root_wrap(r);
                flags[l] = uf.root_flags(r);
            }
        }
        ClusterLabels {
            labels,
            sizes,
            wraps,
            flags,
        }
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        matches!((self.labels[i], self.labels[j]), (Some(a), Some(b)) if a == b)
    }

    /// Labels of all clusters, increasing.
    pub fn clusters(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| (*l == Some(i)).then_some(i))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn size(&self, label: usize) -> usize {
        self.sizes[label]
    }

    /// Winding detected along `[x, y]`.
    pub fn wraps(&self, label: usize) -> [bool; 2] {
        self.wraps[label]
    }

    pub fn flags(&self, label: usize) -> u8 {
        self.flags[label]
    }

    /// Members of each cluster, keyed by label.
    pub fn members(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out: Vec<(usize, Vec<usize>)> =
            self.clusters().into_iter().map(|l| (l, Vec::new())).collect();
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(l) = l {
                let k = out.binary_search_by_key(l, |c| c.0).unwrap();
                out[k].1.push(i);
            }
        }
        out
    }
}

/// Union-find labels of the open subgraph of `g` under marks `m`: open
/// vertices joined by open edges.
pub fn components(g: &GeometricGraph, m: &MarkState) -> Result<ClusterLabels> {
    if m.len() != g.len() || m.edge_open.len() != g.edge_count() {
        return Err(Error::SizeMismatch(format!(
            "marks cover {} vertices / {} edges, graph has {} / {}",
            m.len(),
            m.edge_open.len(),
            g.len(),
            g.edge_count()
        )));
    }
    Ok(ClusterLabels::build(
        g,
        &m.open_vertices(),
        Some(&m.edge_open),
        None,
    ))
}
