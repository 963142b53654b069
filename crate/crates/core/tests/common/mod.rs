#![allow(dead_code)]

use std::collections::VecDeque;

use contperc::geograph::{build_gilbert, build_rcm};
use contperc::{ConnectionFunction, GeometricGraph, PointSet, Region};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distance computed from scratch: plain Euclidean, or the minimum over the
/// nine translates on a torus.
pub fn brute_distance(region: &Region, a: [f64; 2], b: [f64; 2]) -> f64 {
    match region {
        Region::Torus { side } => {
            let mut best = f64::INFINITY;
            for sx in -1..=1 {
                for sy in -1..=1 {
                    let dx = b[0] + side * sx as f64 - a[0];
                    let dy = b[1] + side * sy as f64 - a[1];
                    best = best.min((dx * dx + dy * dy).sqrt());
                }
            }
            best
        }
        _ => ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt(),
    }
}

/// `f(r)` read directly off its break/value lists.
pub fn brute_value(f: &ConnectionFunction, r: f64) -> f64 {
    let (breaks, values) = f.canonical_steps();
    for (b, v) in breaks.iter().zip(&values) {
        if r <= *b {
            return *v;
        }
    }
    0.0
}

pub fn random_steps(rng: &mut ChaCha8Rng, max_support: f64) -> ConnectionFunction {
    let k = rng.random_range(1..=6);
    let mut breaks: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..max_support)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    let mut values: Vec<f64> = (0..breaks.len()).map(|_| rng.random_range(0.01..=1.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    ConnectionFunction::steps(breaks, values).unwrap()
}

pub fn random_region(rng: &mut ChaCha8Rng) -> Region {
    match rng.random_range(0..4) {
        0 => Region::Disc {
            radius: rng.random_range(2.0..12.0),
        },
        1 => Region::Torus {
            side: rng.random_range(4.0..25.0),
        },
        2 => Region::Rect {
            width: rng.random_range(2.0..20.0),
            height: rng.random_range(2.0..20.0),
        },
        _ => {
            let inner = rng.random_range(0.5..4.0);
            Region::Annulus {
                inner,
                outer: inner + rng.random_range(2.0..8.0),
                center: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            }
        }
    }
}

/// A random Gilbert or step-function graph with at most `max_points`
/// expected points.
pub fn random_graph(rng: &mut ChaCha8Rng, seed: u64, max_points: f64) -> GeometricGraph {
    let region = random_region(rng);
    let lambda = rng.random_range(0.3..3.0f64).min(max_points / region.area());
    let stream = contperc::RngStream::new(seed, contperc::Purpose::Points, 0);
    let points = contperc::ppgen::sample_poisson(&region, lambda, &stream).unwrap();
    if rng.random_bool(0.5) {
        build_gilbert(&points, rng.random_range(0.3..1.5)).unwrap()
    } else {
        let f = random_steps(rng, 1.5);
        build_rcm(&points, &f, &stream).unwrap()
    }
}

/// Components of open vertices joined by open edges by breadth-first
/// search, each labelled by its smallest vertex.
pub fn bfs_labels(g: &GeometricGraph, open: &[bool], edge_open: &[bool]) -> Vec<Option<usize>> {
    let n = g.len();
    let mut label = vec![None; n];
    for s in 0..n {
        if !open[s] || label[s].is_some() {
            continue;
        }
        label[s] = Some(s);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for nb in g.neighbors(v) {
                if open[nb.vertex] && edge_open[nb.edge] && label[nb.vertex].is_none() {
                    label[nb.vertex] = Some(s);
                    queue.push_back(nb.vertex);
                }
            }
        }
    }
    label
}

pub fn points_in(region: Region, pts: Vec<[f64; 2]>) -> PointSet {
    PointSet::from_points(region, pts).unwrap()
}

/// Two-sample z statistic for binomial proportions.
pub fn two_sample_z(a: u64, b: u64, reps: u64) -> f64 {
    let (pa, pb) = (a as f64 / reps as f64, b as f64 / reps as f64);
    let se = ((pa * (1.0 - pa) + pb * (1.0 - pb)) / reps as f64).sqrt();
    if se == 0.0 {
        if a == b {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (pa - pb) / se
    }
}

/// Vertices within `radius` of `i` by exhaustive scan.
pub fn brute_within(g: &GeometricGraph, i: usize, radius: f64) -> Vec<usize> {
    let region = &g.points().region;
    (0..g.len())
        .filter(|&j| j != i && brute_distance(region, g.position(i), g.position(j)) <= radius)
        .collect()
}

/// Whether `s` (four vertices) carries exactly two edges, and those two are
/// disjoint.
fn is_bow_tie(g: &GeometricGraph, s: &[usize]) -> bool {
    let mut edges = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            if g.adjacent(s[a], s[b]) {
                edges.push((a, b));
            }
        }
    }
    edges.len() == 2 && {
        let (e, f) = (edges[0], edges[1]);
        e.0 != f.0 && e.0 != f.1 && e.1 != f.0 && e.1 != f.1
    }
}

/// Correct configuration recomputed from geometry and uniforms alone.
pub fn brute_configured(g: &GeometricGraph, m: &contperc::MarkState, i: usize, rule: contperc::enhance::ConfigModel) -> bool {
    use contperc::enhance::ConfigModel;
    let red = |v: usize| m.y[v] < m.p;
    match rule {
        ConfigModel::Gilbert => {
            let range = g.support_radius();
            let near = brute_within(g, i, range);
            !red(i) && near.len() == 4 && near.iter().all(|&v| red(v)) && is_bow_tie(g, &near)
        }
        ConfigModel::Rcm => {
            let near = brute_within(g, i, 1.0);
            !red(i)
                && near.len() == 4
                && near.iter().all(|&v| red(v) && g.adjacent(i, v))
                && g.degree(i) == 4
                && is_bow_tie(g, &near)
        }
        ConfigModel::Diminish => {
            let near = brute_within(g, i, 1.0);
            !m.up[i] && near.len() == 2 && near.iter().all(|&v| m.up[v] && g.adjacent(i, v))
        }
    }
}

/// Invariants of an enhanced colouring: no adjacent greens, greens are
/// exactly the configured closed vertices with `Z < q`, and configuration
/// status ignores green marks. Returns the number of greens.
pub fn check_enhanced(
    g: &GeometricGraph,
    m: &contperc::MarkState,
    rule: contperc::enhance::ConfigModel,
) -> Result<usize, String> {
    use contperc::enhance::detect_configured;
    use contperc::perc::Colour;
    for e in g.edges() {
        if m.colour[e.u] == Colour::Green && m.colour[e.v] == Colour::Green {
            return Err(format!("adjacent greens {} and {}", e.u, e.v));
        }
    }
    for i in 0..g.len() {
        let want = brute_configured(g, m, i, rule) && m.z[i] < m.q;
        if want != (m.colour[i] == Colour::Green) {
            return Err(format!("vertex {i}: green {} but witness says {want}", m.colour[i] == Colour::Green));
        }
        if m.colour[i] == Colour::Red && m.y[i] >= m.p {
            return Err(format!("vertex {i} red with Y >= p"));
        }
    }
    // Paint every closed vertex green: statuses must not move.
    let before = detect_configured(g, m, rule).map_err(|e| e.to_string())?;
    let mut painted = m.clone();
    for c in painted.colour.iter_mut() {
        if *c == Colour::Closed {
            *c = Colour::Green;
        }
    }
    let after = detect_configured(g, &painted, rule).map_err(|e| e.to_string())?;
    if before.status != after.status {
        return Err("configuration status changed under green marks".into());
    }
    Ok(m.count(Colour::Green))
}

/// Diminished colouring: removed vertices are exactly the configured red
/// vertices with `Z >= q`. Returns the number removed.
pub fn check_diminished(g: &GeometricGraph, m: &contperc::MarkState) -> Result<usize, String> {
    use contperc::enhance::ConfigModel;
    use contperc::perc::Colour;
    for i in 0..g.len() {
        let want = if m.y[i] >= m.p {
            Colour::Closed
        } else if brute_configured(g, m, i, ConfigModel::Diminish) && m.z[i] >= m.q {
            Colour::Diminished
        } else {
            Colour::Red
        };
        if m.colour[i] != want {
            return Err(format!("vertex {i}: {:?}, witness says {want:?}", m.colour[i]));
        }
    }
    Ok(m.count(Colour::Diminished))
}

/// Toggles the red (or up) state of `v` and checks that every vertex whose
/// configuration status changes lies within distance 2 of it.
pub fn check_locality(
    g: &GeometricGraph,
    m: &contperc::MarkState,
    rule: contperc::enhance::ConfigModel,
    v: usize,
) -> Result<usize, String> {
    use contperc::enhance::{detect_configured, ConfigModel};
    let before = detect_configured(g, m, rule).map_err(|e| e.to_string())?;
    let mut t = m.clone();
    if rule == ConfigModel::Diminish {
        t.up[v] = !t.up[v];
    } else {
        t.y[v] = if t.y[v] < t.p { 1.0 } else { 0.0 };
        t.recolour_site(t.p);
    }
    let after = detect_configured(g, &t, rule).map_err(|e| e.to_string())?;
    let region = &g.points().region;
    let mut moved = 0;
    for i in 0..g.len() {
        if before.status[i].is_some() != after.status[i].is_some() {
            moved += 1;
            let d = brute_distance(region, g.position(i), g.position(v));
            if d > 2.0 {
                return Err(format!("toggling {v} changed vertex {i} at distance {d}"));
            }
        }
    }
    Ok(moved)
}

/// Every cluster of `inner` (open vertices, all their edges) lies inside one
/// cluster of `outer` (all vertices, open edges).
pub fn check_contained(g: &GeometricGraph, inner: &[bool], outer_edges: &[bool]) -> Result<(), String> {
    let all_edges = vec![true; g.edge_count()];
    let everyone = vec![true; g.len()];
    let a = bfs_labels(g, inner, &all_edges);
    let b = bfs_labels(g, &everyone, outer_edges);
    let mut home = vec![None; g.len()];
    for i in 0..g.len() {
        if let Some(l) = a[i] {
            match home[l] {
                None => home[l] = b[i],
                Some(h) if Some(h) != b[i] => {
                    return Err(format!("cluster {l} splits across bond clusters at vertex {i}"))
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// The percolation flavours compared in the distributional equivalences.
#[derive(Clone, Copy, Debug)]
pub enum Flavour {
    /// Every vertex and edge of RCM(λ, f).
    Full,
    Site(f64),
    Bond(f64),
    Mixed(f64, f64),
}

/// Replications out of `reps` whose open subgraph winds around `region`.
pub fn wrap_count(region: &Region, lambda: f64, f: &ConnectionFunction, flavour: Flavour, reps: u64, seed: u64) -> u64 {
    use contperc::perc::{bond_percolation, crossing_occurs, mixed_percolation, sample_graph, site_percolation};
    use rayon::prelude::*;
    let spec = contperc::CrossingSpec::wrap();
    (0..reps)
        .into_par_iter()
        .filter(|&r| {
            let g = sample_graph(region, lambda, f, seed, r).unwrap();
            let s = contperc::RngStream::new(seed, contperc::Purpose::Site, r);
            let m = match flavour {
                Flavour::Full => contperc::MarkState::draw(&g, &s),
                Flavour::Site(p) => site_percolation(&g, p, &s).unwrap(),
                Flavour::Bond(p) => bond_percolation(&g, p, &s).unwrap(),
                Flavour::Mixed(p, q) => mixed_percolation(&g, p, q, &s).unwrap(),
            };
            crossing_occurs(&g, &m, &spec).unwrap()
        })
        .count() as u64
}

/// `(name, z)` for the three equivalences: bond-p on RCM(λ, f) against
/// RCM(λ, pf), site-p against intensity pλ, and mixed (p, q) against
/// RCM(pλ, qf). Each side uses its own seed.
pub fn equivalence_z(side: f64, lambda: f64, p: f64, q: f64, reps: u64, seed: u64) -> Vec<(&'static str, f64)> {
    let region = Region::Torus { side };
    let f = ConnectionFunction::indicator(1.0).unwrap();
    let z = |a: u64, b: u64| two_sample_z(a, b, reps);
    vec![
        (
            "bond(p) on RCM(λ,f) vs RCM(λ,pf)",
            z(
                wrap_count(&region, lambda, &f, Flavour::Bond(p), reps, seed),
                wrap_count(&region, lambda, &f.squash(p).unwrap(), Flavour::Full, reps, seed + 1),
            ),
        ),
        (
            "site(p) on RCM(λ,f) vs RCM(pλ,f)",
            z(
                wrap_count(&region, lambda, &f, Flavour::Site(p), reps, seed + 2),
                wrap_count(&region, p * lambda, &f, Flavour::Full, reps, seed + 3),
            ),
        ),
        (
            "mixed(p,q) on RCM(λ,f) vs RCM(pλ,qf)",
            z(
                wrap_count(&region, lambda, &f, Flavour::Mixed(p, q), reps, seed + 4),
                wrap_count(&region, p * lambda, &f.squash(q).unwrap(), Flavour::Full, reps, seed + 5),
            ),
        ),
    ]
}
