use rayon::prelude::*;
use serde_json::{json, Value};

use crate::connfn::{mean_degree, ConnectionFunction};
use crate::error::{check_positive, Error, Result};
use crate::geograph::{build_gilbert, build_rcm, EdgeRule, GeometricGraph, Metric, SpatialGrid};
use crate::perc::{
    sample_graph, theta_replication, ColouringModel, CrossingSpec, DisplacementUnionFind, Estimate,
    ThetaParams,
};
use crate::ppgen::{NestedSample, Purpose, Region, RngStream};

/// A family of crossing indicators, one per replication, each nondecreasing
/// in the swept value.
///
/// Convention: replication `rep` crosses at `value` iff `value` exceeds its
/// critical value.
pub trait CoupledCrossing: Sync {
    /// Name of the swept parameter.
    fn parameter(&self) -> &'static str;

    fn crossing(&self, seed: u64, rep: u64, value: f64) -> Result<bool>;

    /// Exact critical value of one replication, `+inf` if it never crosses,
    /// when the estimator can compute it directly.
    fn critical_value(&self, _seed: u64, _rep: u64) -> Option<Result<f64>> {
        None
    }

    fn describe(&self) -> Value;

    /// An [`Estimate`] row labelled for the swept value, with the result
    /// fields left for the caller.
    fn row(&self, value: f64) -> Estimate;
}

fn blank(model: &str, spec: &CrossingSpec) -> Estimate {
    Estimate {
        model: model.into(),
        lambda: None,
        p: None,
        q: None,
        n: None,
        spec: spec.describe(),
        reps: 0,
        successes: 0,
        value: f64::NAN,
        stderr: f64::NAN,
        seed: 0,
    }
}

/// Critical values for replications `0..reps`: exact where available,
/// otherwise bisected per replication to width `tol` inside `[lo, hi]`
/// (`-inf` if already crossing at `lo`, `+inf` if not at `hi`).
pub fn critical_values<E: CoupledCrossing + ?Sized>(
    est: &E,
    lo: f64,
    hi: f64,
    tol: f64,
    reps: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_positive("tol", tol)?;
    (0..reps)
        .into_par_iter()
        .map(|r| {
            if let Some(c) = est.critical_value(seed, r) {
                return c;
            }
            if est.crossing(seed, r, lo)? {
                return Ok(f64::NEG_INFINITY);
            }
            if !est.crossing(seed, r, hi)? {
                return Ok(f64::INFINITY);
            }
            let (mut a, mut b) = (lo, hi);
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if est.crossing(seed, r, mid)? {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            Ok(0.5 * (a + b))
        })
        .collect()
}

fn check_spec(spec: &CrossingSpec, region: &Region) -> Result<()> {
    region.validate()?;
    spec.validate()?;
    spec.check_region(region)
}

/// Adds vertices in `order`; returns `keys[v]` for the vertex whose arrival
/// first creates a crossing cluster.
fn sweep_vertices(g: &GeometricGraph, order: &[usize], keys: &[f64], spec: &CrossingSpec) -> f64 {
    let mut uf = DisplacementUnionFind::new(g.len(), g.metric());
    let mut active = vec![false; g.len()];
    for &v in order {
        active[v] = true;
        uf.set_flags(v, spec.flag_of(g.position(v)));
        let mut root = v;
        for nb in g.neighbors(v) {
            if active[nb.vertex] {
                root = uf.union(v, nb.vertex, g.displacement(v, nb.vertex));
            }
        }
        let root = if root == v { uf.find(v).0 } else { root };
        if spec.cluster_crosses(uf.root_flags(root), uf.root_wrap(root)) {
            return keys[v];
        }
    }
    f64::INFINITY
}

/// Adds edges in `order` with every vertex present.
fn sweep_edges(g: &GeometricGraph, order: &[usize], keys: &[f64], spec: &CrossingSpec) -> f64 {
    let mut uf = DisplacementUnionFind::new(g.len(), g.metric());
    for v in 0..g.len() {
        uf.set_flags(v, spec.flag_of(g.position(v)));
    }
    for &e in order {
        let edge = g.edges()[e];
        let root = uf.union(edge.u, edge.v, g.displacement(edge.u, edge.v));
        if spec.cluster_crosses(uf.root_flags(root), uf.root_wrap(root)) {
            return keys[e];
        }
    }
    f64::INFINITY
}

fn sorted_order(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    order
}

/// Crossing in the intensity `λ` at fixed connection function: points of a
/// nested Poisson sample are added in birth-mark order.
#[derive(Clone, Debug)]
pub struct IntensityCrossing {
    pub f: ConnectionFunction,
    pub region: Region,
    pub spec: CrossingSpec,
    pub max_intensity: f64,
}

impl IntensityCrossing {
    pub fn new(f: ConnectionFunction, region: Region, spec: CrossingSpec, max_intensity: f64) -> Result<Self> {
        check_spec(&spec, &region)?;
        check_positive("max_intensity", max_intensity)?;
        if let Some(side) = region.torus_side() {
            if f.support_radius() >= side / 2.0 {
                return Err(Error::invalid(
                    "support",
                    format!("support radius {} must be < half the torus side {side}", f.support_radius()),
                ));
            }
        }
        Ok(IntensityCrossing {
            f,
            region,
            spec,
            max_intensity,
        })
    }

    /// Maximum intensity giving mean degree `degree`.
    pub fn intensity_for_degree(f: &ConnectionFunction, degree: f64) -> Result<f64> {
        Ok(degree / mean_degree(1.0, f)?)
    }

    /// Adds points in birth order, testing pairs only against points already
    /// present, and stops at the first crossing. Pair randomness is keyed by
    /// birth rank, so this agrees with building the graph of any sub-sample.
    fn sweep(&self, seed: u64, rep: u64) -> Result<f64> {
        let ns = NestedSample::new(
            &self.region,
            self.max_intensity,
            &RngStream::new(seed, Purpose::Points, rep),
        )?;
        let pts = &ns.points;
        let metric = Metric::for_region(&self.region);
        let rule = match self.f.as_indicator() {
            Some(range) => EdgeRule::Gilbert { range },
            None => EdgeRule::Rcm {
                f: self.f.clone(),
                stream: RngStream::new(seed, Purpose::Edges, rep),
            },
        };
        let support = self.f.support_radius();
        let grid = SpatialGrid::build(pts, &self.region, support);
        let mut uf = DisplacementUnionFind::new(pts.len(), metric);
        for v in 0..pts.len() {
            uf.set_flags(v, self.spec.flag_of(pts[v]));
            grid.for_each_candidate(pts[v], support, |j| {
                if j < v {
                    let d = metric.distance(pts[v], pts[j]);
                    if d <= support && rule.connects(d, v as u64, j as u64) {
                        uf.union(v, j, metric.displacement(pts[v], pts[j]));
                    }
                }
            });
            let root = uf.find(v).0;
            if self.spec.cluster_crosses(uf.root_flags(root), uf.root_wrap(root)) {
                return Ok(ns.marks[v]);
            }
        }
        Ok(f64::INFINITY)
    }

    /// The full nested sample's graph; vertex ids are birth-mark ranks.
    pub fn graph(&self, seed: u64, rep: u64) -> Result<(NestedSample, GeometricGraph)> {
        let ns = NestedSample::new(
            &self.region,
            self.max_intensity,
            &RngStream::new(seed, Purpose::Points, rep),
        )?;
        let set = ns.at(self.max_intensity)?;
        let g = match self.f.as_indicator() {
            Some(range) => build_gilbert(&set, range)?,
            None => build_rcm(&set, &self.f, &RngStream::new(seed, Purpose::Edges, rep))?,
        };
        Ok((ns, g))
    }
}

impl CoupledCrossing for IntensityCrossing {
    fn parameter(&self) -> &'static str {
        "lambda"
    }

    fn crossing(&self, seed: u64, rep: u64, value: f64) -> Result<bool> {
        if value > self.max_intensity {
            return Err(Error::invalid(
                "lambda",
                format!("{value} exceeds the sampled maximum {}", self.max_intensity),
            ));
        }
        Ok(self.critical_value(seed, rep).expect("exact")? < value)
    }

    fn critical_value(&self, seed: u64, rep: u64) -> Option<Result<f64>> {
        Some(self.sweep(seed, rep))
    }

    fn describe(&self) -> Value {
        json!({
            "estimator": "intensity",
            "f": self.f,
            "region": self.region,
            "spec": self.spec,
            "max_intensity": self.max_intensity,
        })
    }

    fn row(&self, value: f64) -> Estimate {
        Estimate {
            lambda: Some(value),
            ..blank("intensity", &self.spec)
        }
    }
}

/// Site percolation in `p` on a fixed graph: vertices added in order of
/// their site uniforms.
#[derive(Clone, Debug)]
pub struct SiteCrossing {
    pub lambda: f64,
    pub f: ConnectionFunction,
    pub region: Region,
    pub spec: CrossingSpec,
}

impl SiteCrossing {
    pub fn new(lambda: f64, f: ConnectionFunction, region: Region, spec: CrossingSpec) -> Result<Self> {
        check_spec(&spec, &region)?;
        check_positive("lambda", lambda)?;
        Ok(SiteCrossing { lambda, f, region, spec })
    }
}

impl CoupledCrossing for SiteCrossing {
    fn parameter(&self) -> &'static str {
        "p"
    }

    fn crossing(&self, seed: u64, rep: u64, value: f64) -> Result<bool> {
        Ok(self.critical_value(seed, rep).expect("exact")? < value)
    }

    fn critical_value(&self, seed: u64, rep: u64) -> Option<Result<f64>> {
        let run = || -> Result<f64> {
            let g = sample_graph(&self.region, self.lambda, &self.f, seed, rep)?;
            let site = RngStream::new(seed, Purpose::Site, rep);
            let keys: Vec<f64> = (0..g.len()).map(|i| site.uniform(g.id(i))).collect();
            Ok(sweep_vertices(&g, &sorted_order(&keys), &keys, &self.spec))
        };
        Some(run())
    }

    fn describe(&self) -> Value {
        json!({
            "estimator": "site",
            "lambda": self.lambda,
            "f": self.f,
            "region": self.region,
            "spec": self.spec,
        })
    }

    fn row(&self, value: f64) -> Estimate {
        Estimate {
            lambda: Some(self.lambda),
            p: Some(value),
            ..blank("site", &self.spec)
        }
    }
}

/// Bond percolation in `p` on a fixed graph: edges added in order of their
/// bond uniforms.
#[derive(Clone, Debug)]
pub struct BondCrossing {
    pub lambda: f64,
    pub f: ConnectionFunction,
    pub region: Region,
    pub spec: CrossingSpec,
}

impl BondCrossing {
    pub fn new(lambda: f64, f: ConnectionFunction, region: Region, spec: CrossingSpec) -> Result<Self> {
        check_spec(&spec, &region)?;
        check_positive("lambda", lambda)?;
        Ok(BondCrossing { lambda, f, region, spec })
    }
}

impl CoupledCrossing for BondCrossing {
    fn parameter(&self) -> &'static str {
        "p"
    }

    fn crossing(&self, seed: u64, rep: u64, value: f64) -> Result<bool> {
        Ok(self.critical_value(seed, rep).expect("exact")? < value)
    }

    fn critical_value(&self, seed: u64, rep: u64) -> Option<Result<f64>> {
        let run = || -> Result<f64> {
            let g = sample_graph(&self.region, self.lambda, &self.f, seed, rep)?;
            let bond = RngStream::new(seed, Purpose::Bond, rep);
            let keys: Vec<f64> = g
                .edges()
                .iter()
                .map(|e| bond.pair_uniform(g.id(e.u), g.id(e.v)))
                .collect();
            Ok(sweep_edges(&g, &sorted_order(&keys), &keys, &self.spec))
        };
        Some(run())
    }

    fn describe(&self) -> Value {
        json!({
            "estimator": "bond",
            "lambda": self.lambda,
            "f": self.f,
            "region": self.region,
            "spec": self.spec,
        })
    }

    fn row(&self, value: f64) -> Estimate {
        Estimate {
            lambda: Some(self.lambda),
            p: Some(value),
            ..blank("bond", &self.spec)
        }
    }
}

/// The `θ_n` crossing of a colouring model, swept in `p` at fixed `q`.
#[derive(Clone, Debug)]
pub struct ModelCrossing {
    pub base: ThetaParams,
}

impl ModelCrossing {
    pub fn new(lambda: f64, f: ConnectionFunction, q: f64, n: f64, model: ColouringModel) -> Result<Self> {
        let base = ThetaParams {
            lambda,
            f,
            p: 0.5,
            q,
            n,
            model,
            reps: 1,
            seed: 0,
        };
        base.validate()?;
        Ok(ModelCrossing { base })
    }
}

impl CoupledCrossing for ModelCrossing {
    fn parameter(&self) -> &'static str {
        "p"
    }

    fn crossing(&self, seed: u64, rep: u64, value: f64) -> Result<bool> {
        let params = ThetaParams {
            p: value,
            seed,
            ..self.base.clone()
        };
        theta_replication(&params, rep)
    }

    fn describe(&self) -> Value {
        json!({
            "estimator": "model",
            "model": self.base.model,
            "lambda": self.base.lambda,
            "f": self.base.f,
            "q": self.base.q,
            "n": self.base.n,
        })
    }

    fn row(&self, value: f64) -> Estimate {
        Estimate {
            lambda: Some(self.base.lambda),
            p: Some(value),
            q: Some(self.base.q),
            n: Some(self.base.n),
            ..blank(self.base.model.name(), &self.base.spec())
        }
    }
}
