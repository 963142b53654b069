use std::io::Write;

use serde::Serialize;

use crate::error::{check_closed, Error, Result};
use crate::geograph::GeometricGraph;
use crate::perc::{Colour, ColouringModel, MarkState};

/// Which correct-configuration rule applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigModel {
    /// Closed vertex with exactly four graph neighbours, all red, in a bow
    /// tie.
    Gilbert,
    /// Closed vertex with exactly four vertices within distance 1, all red
    /// and joined to it, in a bow tie. Needs unit support.
    Rcm,
    /// Down-site with exactly two 1-neighbours, both up-sites and both
    /// joined to it. Needs unit support.
    Diminish,
}

impl ConfigModel {
    /// The enhancement rule for `g`: bow ties on graph neighbours for
    /// Gilbert graphs, on the distance-1 neighbourhood otherwise.
    pub fn enhancement_for(g: &GeometricGraph) -> Self {
        if g.is_gilbert() {
            ConfigModel::Gilbert
        } else {
            ConfigModel::Rcm
        }
    }

    fn check(&self, g: &GeometricGraph) -> Result<()> {
        match self {
            ConfigModel::Gilbert if !g.is_gilbert() => Err(Error::ModelMismatch(
                "gilbert configuration needs a Gilbert graph".into(),
            )),
            ConfigModel::Rcm | ConfigModel::Diminish
                if (g.support_radius() - 1.0).abs() > 1e-12 =>
            {
                Err(Error::ModelMismatch(format!(
                    "{self:?} configuration needs support radius 1, got {}; normalize the connection function first",
                    g.support_radius()
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Edges `v~w` and `y~z` and no others among the four; `v < w`, `y < z`,
    /// `v < y`.
    BowTie {
        v: usize,
        w: usize,
        y: usize,
        z: usize,
    },
    Pair { y1: usize, y2: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigurationReport {
    pub model: ConfigModel,
    pub status: Vec<Option<Witness>>,
}

impl ConfigurationReport {
    pub fn is_configured(&self, i: usize) -> bool {
        self.status[i].is_some()
    }

    pub fn configured(&self) -> impl Iterator<Item = (usize, Witness)> + '_ {
        self.status
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|w| (i, w)))
    }

    /// Writes `vertex,x,y,kind,a,b,c,d` rows for configured vertices.
    pub fn write_csv<W: Write>(&self, g: &GeometricGraph, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["vertex", "x", "y", "kind", "a", "b", "c", "d"])?;
        for (i, wit) in self.configured() {
            let p = g.position(i);
            let (kind, ids) = match wit {
                Witness::BowTie { v, w, y, z } => ("bow_tie", vec![v, w, y, z]),
                Witness::Pair { y1, y2 } => ("pair", vec![y1, y2]),
            };
            let mut row = vec![i.to_string(), p[0].to_string(), p[1].to_string(), kind.into()];
            row.extend((0..4).map(|k| ids.get(k).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The bow-tie pattern among four sorted vertices, if their induced
/// subgraph is exactly a perfect matching.
fn bow_tie(g: &GeometricGraph, s: [usize; 4]) -> Option<Witness> {
    let adj = |a: usize, b: usize| g.adjacent(s[a], s[b]);
    let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        .into_iter()
        .filter(|&(a, b)| adj(a, b))
        .count();
    if edges != 2 {
        return None;
    }
    let [a, b, c, d] = s;
    if adj(0, 1) && adj(2, 3) {
        Some(Witness::BowTie { v: a, w: b, y: c, z: d })
    } else if adj(0, 2) && adj(1, 3) {
        Some(Witness::BowTie { v: a, w: c, y: b, z: d })
    } else if adj(0, 3) && adj(1, 2) {
        Some(Witness::BowTie { v: a, w: d, y: b, z: c })
    } else {
        None
    }
}

/// Configuration status of vertex `i` given red flags and up/down flags.
/// Depends only on geometry, edges, `red` and `up`; never on greens.
pub fn configured_at(
    g: &GeometricGraph,
    red: &[bool],
    up: &[bool],
    i: usize,
    model: ConfigModel,
) -> Option<Witness> {
    match model {
        ConfigModel::Gilbert => {
            if red[i] || g.degree(i) != 4 {
                return None;
            }
            let nb = g.neighbors(i);
            let mut s = [nb[0].vertex, nb[1].vertex, nb[2].vertex, nb[3].vertex];
            s.sort_unstable();
            if !s.iter().all(|&v| red[v]) {
                return None;
            }
            bow_tie(g, s)
        }
        ConfigModel::Rcm => {
            if red[i] || g.degree(i) != 4 {
                return None;
            }
            let near = g.within(i, 1.0);
            if near.len() != 4 {
                return None;
            }
            let s = [near[0], near[1], near[2], near[3]];
            if !s.iter().all(|&v| red[v] && g.adjacent(i, v)) {
                return None;
            }
            bow_tie(g, s)
        }
        ConfigModel::Diminish => {
            if up[i] {
                return None;
            }
            let near = g.within(i, 1.0);
            if near.len() != 2 {
                return None;
            }
            let (y1, y2) = (near[0], near[1]);
            (up[y1] && up[y2] && g.adjacent(i, y1) && g.adjacent(i, y2))
                .then_some(Witness::Pair { y1, y2 })
        }
    }
}

fn red_flags(m: &MarkState) -> Vec<bool> {
    m.colour.iter().map(|&c| c == Colour::Red).collect()
}

pub fn detect_configured(
    g: &GeometricGraph,
    m: &MarkState,
    model: ConfigModel,
) -> Result<ConfigurationReport> {
    model.check(g)?;
    if m.len() != g.len() {
        return Err(Error::SizeMismatch(format!(
            "marks cover {} vertices, graph has {}",
            m.len(),
            g.len()
        )));
    }
    let red = red_flags(m);
    Ok(ConfigurationReport {
        model,
        status: (0..g.len())
            .map(|i| configured_at(g, &red, &m.up, i, model))
            .collect(),
    })
}

/// Greens added to red/closed marks: each correctly configured closed
/// vertex with `Z < q`.
pub fn apply_enhancement(g: &GeometricGraph, m: &MarkState, q: f64) -> Result<MarkState> {
    check_closed("q", q, 0.0, 1.0)?;
    let report = detect_configured(g, m, ConfigModel::enhancement_for(g))?;
    let mut out = m.clone();
    enhance_with(&mut out, &report, q);
    Ok(out)
}

fn enhance_with(m: &mut MarkState, report: &ConfigurationReport, q: f64) {
    m.q = q;
    for i in 0..m.len() {
        if m.colour[i] == Colour::Closed && report.is_configured(i) && m.z[i] < q {
            m.colour[i] = Colour::Green;
        }
    }
}

/// Open iff `Y < p` and, for correctly configured vertices, also `Z < q`.
pub fn apply_diminishment(
    g: &GeometricGraph,
    m: &MarkState,
    p: f64,
    q: f64,
) -> Result<MarkState> {
    check_closed("p", p, 0.0, 1.0)?;
    check_closed("q", q, 0.0, 1.0)?;
    let report = detect_configured(g, m, ConfigModel::Diminish)?;
    let mut out = m.clone();
    diminish_with(&mut out, &report, p, q);
    Ok(out)
}

fn diminish_with(m: &mut MarkState, report: &ConfigurationReport, p: f64, q: f64) {
    m.p = p;
    m.q = q;
    for i in 0..m.len() {
        m.colour[i] = if m.y[i] >= p {
            Colour::Closed
        } else if report.is_configured(i) && m.z[i] >= q {
            Colour::Diminished
        } else {
            Colour::Red
        };
    }
}

/// Colours `m` in place under `model` at parameters `(p, q)` and returns
/// the configuration report used, if any.
pub fn colour_realization(
    g: &GeometricGraph,
    m: &mut MarkState,
    model: ColouringModel,
    p: f64,
    q: f64,
) -> Result<Option<ConfigurationReport>> {
    check_closed("p", p, 0.0, 1.0)?;
    check_closed("q", q, 0.0, 1.0)?;
    match model {
        ColouringModel::Plain => {
            m.recolour_site(p);
            Ok(None)
        }
        ColouringModel::Enhanced => {
            m.recolour_site(p);
            let report = detect_configured(g, m, ConfigModel::enhancement_for(g))?;
            enhance_with(m, &report, q);
            Ok(Some(report))
        }
        ColouringModel::Diminished => {
            let report = detect_configured(g, m, ConfigModel::Diminish)?;
            diminish_with(m, &report, p, q);
            Ok(Some(report))
        }
    }
}

pub(crate) fn report_with_local_update(
    g: &GeometricGraph,
    base: &ConfigurationReport,
    red: &[bool],
    up: &[bool],
    changed: usize,
) -> ConfigurationReport {
    let mut status = base.status.clone();
    status.resize(g.len(), None);
    let mut affected = g.within(changed, 2.0);
    affected.push(changed);
    for i in affected {
        status[i] = configured_at(g, red, up, i, base.model);
    }
    ConfigurationReport {
        model: base.model,
        status,
    }
}
