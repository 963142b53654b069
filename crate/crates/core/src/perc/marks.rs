use serde::Serialize;

use crate::error::{check_closed, Result};
use crate::geograph::GeometricGraph;
use crate::ppgen::{Purpose, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Colour {
    /// `Y < p`: an open vertex of the underlying site process.
    Red,
    Closed,
    /// Closed, correctly configured and enhanced.
    Green,
    /// Red but removed by diminishment.
    Diminished,
}

impl Colour {
    pub fn is_open(self) -> bool {
        matches!(self, Colour::Red | Colour::Green)
    }
}

/// Per-vertex uniforms `Y, Z, W`, per-edge uniforms `X`, and the colours,
/// up/down flags and edge states derived from them.
///
/// All uniforms are keyed by vertex id (pair of ids for edges), so marks for
/// different parameters built from the same stream are coupled.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkState {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub x: Vec<f64>,
    pub colour: Vec<Colour>,
    pub up: Vec<bool>,
    pub edge_open: Vec<bool>,
    pub p: f64,
    pub q: f64,
}

impl MarkState {
    /// Draws every uniform for `g` from `stream`; all vertices red, all edges
    /// open.
    pub fn draw(g: &GeometricGraph, stream: &RngStream) -> Self {
        let site = stream.with_purpose(Purpose::Site);
        let enhance = stream.with_purpose(Purpose::Enhance);
        let updown = stream.with_purpose(Purpose::UpDown);
        let bond = stream.with_purpose(Purpose::Bond);
        let n = g.len();
        let ids: Vec<u64> = (0..n).map(|i| g.id(i)).collect();
        let w: Vec<f64> = ids.iter().map(|&id| updown.uniform(id)).collect();
        MarkState {
            y: ids.iter().map(|&id| site.uniform(id)).collect(),
            z: ids.iter().map(|&id| enhance.uniform(id)).collect(),
            up: w.iter().map(|&u| u < 0.5).collect(),
            w,
            x: g.edges()
                .iter()
                .map(|e| bond.pair_uniform(ids[e.u], ids[e.v]))
                .collect(),
            colour: vec![Colour::Red; n],
            edge_open: vec![true; g.edge_count()],
            p: 1.0,
            q: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.colour.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colour.is_empty()
    }

    pub fn is_open(&self, i: usize) -> bool {
        self.colour[i].is_open()
    }

    pub fn open_vertices(&self) -> Vec<bool> {
        self.colour.iter().map(|c| c.is_open()).collect()
    }

    /// Red iff `Y < p`, everything else closed; edges untouched.
    pub fn recolour_site(&mut self, p: f64) {
        self.p = p;
        for (c, &y) in self.colour.iter_mut().zip(&self.y) {
            *c = if y < p { Colour::Red } else { Colour::Closed };
        }
    }

    /// Edge open iff `X < q`.
    pub fn reopen_bonds(&mut self, q: f64) {
        for (o, &x) in self.edge_open.iter_mut().zip(&self.x) {
            *o = x < q;
        }
    }

    pub fn count(&self, colour: Colour) -> usize {
        self.colour.iter().filter(|&&c| c == colour).count()
    }
}

pub fn site_percolation(g: &GeometricGraph, p: f64, stream: &RngStream) -> Result<MarkState> {
    check_closed("p", p, 0.0, 1.0)?;
    let mut m = MarkState::draw(g, stream);
    m.recolour_site(p);
    Ok(m)
}

pub fn bond_percolation(g: &GeometricGraph, p: f64, stream: &RngStream) -> Result<MarkState> {
    check_closed("p", p, 0.0, 1.0)?;
    let mut m = MarkState::draw(g, stream);
    m.reopen_bonds(p);
    m.q = p;
    Ok(m)
}

/// Sites open with probability `p`, bonds with probability `q`,
/// independently.
pub fn mixed_percolation(
    g: &GeometricGraph,
    p: f64,
    q: f64,
    stream: &RngStream,
) -> Result<MarkState> {
    check_closed("p", p, 0.0, 1.0)?;
    check_closed("q", q, 0.0, 1.0)?;
    let mut m = MarkState::draw(g, stream);
    m.recolour_site(p);
    m.reopen_bonds(q);
    m.q = q;
    Ok(m)
}
