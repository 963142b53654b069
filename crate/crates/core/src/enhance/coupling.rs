use std::collections::BTreeSet;

use serde::Serialize;

use super::config::{configured_at, detect_configured, ConfigModel, Witness};
use crate::error::{check_closed, Error, Result};
use crate::geograph::GeometricGraph;
use crate::perc::{mixed_percolation, ClusterLabels};
use crate::ppgen::{Purpose, RngStream};

/// Outcome of the dynamic exploration that builds site states from bond
/// states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Exploration {
    pub site_open: Vec<bool>,
    /// Edge whose bond state was copied into each site, `None` for sites
    /// started from their own vertex variable.
    pub source_edge: Vec<Option<usize>>,
    pub examined: Vec<bool>,
    pub order: Vec<usize>,
}

/// Assigns every site a state: the next frontier vertex (lowest index among
/// unassigned neighbours of open sites) copies the bond to its lowest-index
/// open neighbour; when the frontier is empty the lowest unassigned vertex
/// copies its own variable from `z_vertex`.
///
/// Each bond variable is read at most once, so with i.i.d. Bernoulli(p)
/// inputs the site states are i.i.d. Bernoulli(p).
pub fn explore(g: &GeometricGraph, x_edge: &[bool], z_vertex: &[bool]) -> Result<Exploration> {
    let n = g.len();
    if x_edge.len() != g.edge_count() || z_vertex.len() != n {
        return Err(Error::SizeMismatch("bernoulli inputs do not match graph".into()));
    }
    let mut assigned = vec![false; n];
    let mut site_open = vec![false; n];
    let mut source_edge = vec![None; n];
    let mut examined = vec![false; g.edge_count()];
    let mut order = Vec::with_capacity(n);
    let mut frontier = BTreeSet::new();
    let mut next = 0;
    loop {
        let v = if let Some(v) = frontier.pop_first() {
            let nb = g
                .neighbors(v)
                .iter()
                .filter(|nb| site_open[nb.vertex])
                .min_by_key(|nb| nb.vertex)
                .expect("frontier vertices have an open neighbour");
            examined[nb.edge] = true;
            source_edge[v] = Some(nb.edge);
            site_open[v] = x_edge[nb.edge];
            v
        } else {
            while next < n && assigned[next] {
                next += 1;
            }
            if next == n {
                break;
            }
            site_open[next] = z_vertex[next];
            next
        };
        assigned[v] = true;
        order.push(v);
        if site_open[v] {
            for nb in g.neighbors(v) {
                if !assigned[nb.vertex] {
                    frontier.insert(nb.vertex);
                }
            }
        }
    }
    Ok(Exploration {
        site_open,
        source_edge,
        examined,
        order,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterContainment {
    /// Smallest vertex index in the cluster.
    pub label: usize,
    pub size: usize,
    /// Label of the enclosing cluster in the larger process, if unique.
    pub enclosing: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnhancedCoupling {
    pub q: f64,
    pub green: Vec<bool>,
    pub clusters: Vec<ClusterContainment>,
    pub all_contained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub p: f64,
    pub site_open: Vec<bool>,
    pub bond_open: Vec<bool>,
    pub clusters: Vec<ClusterContainment>,
    pub all_contained: bool,
    /// Present when a bow-tie rule applies to the graph.
    pub enhanced: Option<EnhancedCoupling>,
}

/// For each cluster of `inner`, the unique `outer` cluster holding all of
/// its members, or `None` if they are split.
fn containment(inner: &ClusterLabels, outer: &ClusterLabels) -> (Vec<ClusterContainment>, bool) {
    let rows: Vec<ClusterContainment> = inner
        .members()
        .into_iter()
        .map(|(label, members)| {
            let first = outer.label(members[0]);
            let same = first.is_some() && members.iter().all(|&v| outer.label(v) == first);
            ClusterContainment {
                label,
                size: members.len(),
                enclosing: if same { first } else { None },
            }
        })
        .collect();
    let all = rows.iter().all(|c| c.enclosing.is_some());
    (rows, all)
}

/// Greens for the enhanced variant: a closed, correctly configured vertex
/// is green iff the first unexamined edge to each side of its bow tie is
/// open.
fn exploration_greens(g: &GeometricGraph, ex: &Exploration, x_edge: &[bool], model: ConfigModel) -> Vec<bool> {
    let up = vec![true; g.len()];
    let first_open = |x: usize, a: usize, b: usize| -> bool {
        let mut es: Vec<usize> = [a, b]
            .iter()
            .filter_map(|&t| g.edge_between(x, t))
            .filter(|&e| !ex.examined[e])
            .collect();
        es.sort_unstable();
        es.first().is_some_and(|&e| x_edge[e])
    };
    (0..g.len())
        .map(|x| match configured_at(g, &ex.site_open, &up, x, model) {
            Some(Witness::BowTie { v, w, y, z }) => first_open(x, v, w) && first_open(x, y, z),
            _ => false,
        })
        .collect()
}

/// Site percolation built from bond percolation at the same `p`, with the
/// containment of every open site cluster in a bond cluster checked.
pub fn coupled_site_in_bond(g: &GeometricGraph, p: f64, stream: &RngStream) -> Result<CouplingReport> {
    check_closed("p", p, 0.0, 1.0)?;
    let bond = stream.with_purpose(Purpose::Bond);
    let vert = stream.with_purpose(Purpose::CouplingVertex);
    let x_edge: Vec<bool> = g
        .edges()
        .iter()
        .map(|e| bond.pair_uniform(g.id(e.u), g.id(e.v)) < p)
        .collect();
    let z_vertex: Vec<bool> = (0..g.len()).map(|i| vert.uniform(g.id(i)) < p).collect();
    coupled_from_bernoulli(g, p, &x_edge, &z_vertex)
}

/// As [`coupled_site_in_bond`] with explicit bond and vertex variables.
pub fn coupled_from_bernoulli(
    g: &GeometricGraph,
    p: f64,
    x_edge: &[bool],
    z_vertex: &[bool],
) -> Result<CouplingReport> {
    let ex = explore(g, x_edge, z_vertex)?;
    let everyone = vec![true; g.len()];
    let bond_labels = ClusterLabels::build(g, &everyone, Some(x_edge), None);
    let site_labels = ClusterLabels::build(g, &ex.site_open, None, None);
    let (clusters, all_contained) = containment(&site_labels, &bond_labels);

    let model = ConfigModel::enhancement_for(g);
    let enhanced = (model == ConfigModel::Gilbert || (g.support_radius() - 1.0).abs() <= 1e-12)
        .then(|| {
            let green = exploration_greens(g, &ex, x_edge, model);
            let coloured: Vec<bool> = ex.site_open.iter().zip(&green).map(|(a, b)| *a || *b).collect();
            let labels = ClusterLabels::build(g, &coloured, None, None);
            let (clusters, all_contained) = containment(&labels, &bond_labels);
            EnhancedCoupling {
                q: p * p,
                green,
                clusters,
                all_contained,
            }
        });
    Ok(CouplingReport {
        p,
        site_open: ex.site_open,
        bond_open: x_edge.to_vec(),
        clusters,
        all_contained,
        enhanced,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiminishedCouplingReport {
    pub p: f64,
    pub q: f64,
    pub configured: usize,
    pub configured_red: usize,
    pub configured_kept: usize,
    pub kept: Vec<bool>,
    pub clusters: Vec<ClusterContainment>,
    pub all_contained: bool,
}

/// Mixed percolation `(p, q)` against the diminished site model driven by
/// the same variables: a correctly configured red vertex is removed iff its
/// first incident edge is closed. Every mixed cluster, minus removed
/// vertices, must sit inside one cluster of kept vertices.
pub fn coupled_diminished_in_mixed(
    g: &GeometricGraph,
    p: f64,
    q: f64,
    stream: &RngStream,
) -> Result<DiminishedCouplingReport> {
    let m = mixed_percolation(g, p, q, stream)?;
    let report = detect_configured(g, &m, ConfigModel::Diminish)?;
    let red = m.open_vertices();
    let mut kept = red.clone();
    let (mut configured, mut configured_red, mut configured_kept) = (0, 0, 0);
    for (x, _) in report.configured() {
        configured += 1;
        let first = g.neighbors(x).iter().map(|nb| nb.edge).min().expect("configured vertex has edges");
        if red[x] {
            configured_red += 1;
            kept[x] = m.edge_open[first];
            configured_kept += usize::from(kept[x]);
        }
    }
    let mixed = ClusterLabels::build(g, &red, Some(&m.edge_open), None);
    let site = ClusterLabels::build(g, &kept, None, None);
    let mut clusters = Vec::new();
    for (label, members) in mixed.members() {
        let kept_members: Vec<usize> = members.into_iter().filter(|&v| kept[v]).collect();
        let Some(&first) = kept_members.first() else { continue };
        let enc = site.label(first);
        let same = kept_members.iter().all(|&v| site.label(v) == enc);
        clusters.push(ClusterContainment {
            label,
            size: kept_members.len(),
            enclosing: if same { enc } else { None },
        });
    }
    let all_contained = clusters.iter().all(|c| c.enclosing.is_some());
    Ok(DiminishedCouplingReport {
        p,
        q,
        configured,
        configured_red,
        configured_kept,
        kept,
        clusters,
        all_contained,
    })
}
