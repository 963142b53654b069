use serde::{Deserialize, Serialize};

use super::config::{colour_realization, report_with_local_update, ConfigurationReport};
use crate::connfn::ConnectionFunction;
use crate::error::{Error, Result};
use crate::geograph::GeometricGraph;
use crate::perc::{
    crossing_occurs, crossing_with, sample_graph, Colour, ColouringModel, CrossingSpec, MarkState,
};
use crate::ppgen::{Point, Purpose, Region, RngStream, INSERTED_ID};

// Uniform overrides that force the inserted vertex's marks below or above
// any threshold in [0, 1].
const FORCE_LOW: f64 = -1.0;
const FORCE_HIGH: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PivotMode {
    /// Enhanced model: red versus closed, `Z_0` left random.
    #[serde(rename = "1")]
    RedVsClosed,
    /// Enhanced model, `Y_0 > p`: green versus not.
    #[serde(rename = "2")]
    GreenVsClosed,
    /// Diminished model: `Y_0 < p` versus `Y_0 > p`, `Z_0, W_0` random.
    #[serde(rename = "3")]
    OpenVsClosed,
    /// Diminished model, `Y_0 < p`: kept versus diminished.
    #[serde(rename = "4")]
    KeptVsDiminished,
}

impl PivotMode {
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(PivotMode::RedVsClosed),
            2 => Ok(PivotMode::GreenVsClosed),
            3 => Ok(PivotMode::OpenVsClosed),
            4 => Ok(PivotMode::KeptVsDiminished),
            _ => Err(Error::invalid("mode", format!("must be 1..=4, got {k}"))),
        }
    }

    pub fn index(self) -> u8 {
        self as u8 + 1
    }

    fn model(self) -> ColouringModel {
        match self {
            PivotMode::RedVsClosed | PivotMode::GreenVsClosed => ColouringModel::Enhanced,
            _ => ColouringModel::Diminished,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PivotalQuery {
    pub x: Point,
    pub mode: PivotMode,
}

/// A coloured configuration together with everything needed to recolour it
/// after inserting one extra vertex.
#[derive(Clone, Debug)]
pub struct Realization {
    graph: GeometricGraph,
    marks: MarkState,
    report: Option<ConfigurationReport>,
    model: ColouringModel,
    spec: CrossingSpec,
    stream: RngStream,
}

impl Realization {
    /// Draws marks for `graph` from `stream` and colours them.
    pub fn new(
        graph: GeometricGraph,
        stream: &RngStream,
        model: ColouringModel,
        p: f64,
        q: f64,
        spec: CrossingSpec,
    ) -> Result<Self> {
        let marks = MarkState::draw(&graph, stream);
        Self::from_marks(graph, marks, stream, model, p, q, spec)
    }

    /// Colours the given uniforms; `stream` supplies the inserted vertex's
    /// uniforms.
    pub fn from_marks(
        graph: GeometricGraph,
        mut marks: MarkState,
        stream: &RngStream,
        model: ColouringModel,
        p: f64,
        q: f64,
        spec: CrossingSpec,
    ) -> Result<Self> {
        spec.validate()?;
        spec.check_region(&graph.points().region)?;
        let report = colour_realization(&graph, &mut marks, model, p, q)?;
        Ok(Realization {
            graph,
            marks,
            report,
            model,
            spec,
            stream: *stream,
        })
    }

    /// Poisson points in the disc of radius `n`, edges from `f`, marks from
    /// `(seed, rep)`.
    #[allow(clippy::too_many_arguments)]
    pub fn sample(
        lambda: f64,
        f: &ConnectionFunction,
        n: f64,
        model: ColouringModel,
        p: f64,
        q: f64,
        seed: u64,
        rep: u64,
    ) -> Result<Self> {
        let g = sample_graph(&Region::Disc { radius: n }, lambda, f, seed, rep)?;
        let stream = RngStream::new(seed, Purpose::Site, rep);
        Self::new(g, &stream, model, p, q, model.crossing(n))
    }

    pub fn graph(&self) -> &GeometricGraph {
        &self.graph
    }

    pub fn marks(&self) -> &MarkState {
        &self.marks
    }

    pub fn report(&self) -> Option<&ConfigurationReport> {
        self.report.as_ref()
    }

    pub fn model(&self) -> ColouringModel {
        self.model
    }

    pub fn spec(&self) -> &CrossingSpec {
        &self.spec
    }

    pub fn occurs(&self) -> Result<bool> {
        crossing_occurs(&self.graph, &self.marks, &self.spec)
    }

    /// `(Y_0, Z_0, W_0)` of the inserted vertex in this realization.
    pub fn inserted_uniforms(&self) -> [f64; 3] {
        [Purpose::Site, Purpose::Enhance, Purpose::UpDown]
            .map(|p| self.stream.with_purpose(p).uniform(INSERTED_ID))
    }

    /// Whether the event occurs after adding a vertex at `x` with uniforms
    /// `(y0, z0, w0)`. Configurations are recomputed within distance 2 of
    /// `x`; everything else is reused.
    pub fn occurs_with(&self, x: Point, y0: f64, z0: f64, w0: f64) -> Result<bool> {
        let report = self.report.as_ref().ok_or_else(|| {
            Error::ModelMismatch("vertex insertion needs an enhanced or diminished model".into())
        })?;
        let g = self.graph.with_inserted_vertex(x)?;
        let new = self.graph.len();
        let (p, q) = (self.marks.p, self.marks.q);
        let mut red: Vec<bool> = self.marks.y.iter().map(|&y| y < p).collect();
        red.push(y0 < p);
        let mut up = self.marks.up.clone();
        up.push(w0 < 0.5);
        let report = report_with_local_update(&g, report, &red, &up, new);
        let mut z = self.marks.z.clone();
        z.push(z0);

        let open: Vec<bool> = (0..g.len())
            .map(|i| {
                let conf = report.is_configured(i);
                match self.model {
                    ColouringModel::Enhanced => red[i] || (conf && z[i] < q),
                    _ => red[i] && (!conf || z[i] < q),
                }
            })
            .collect();
        crossing_with(&g, &open, None, &self.spec)
    }

    /// Colour the inserted vertex would take with uniforms `(y0, z0, w0)`.
    pub fn inserted_colour(&self, x: Point, y0: f64, z0: f64, w0: f64) -> Result<Colour> {
        let report = self.report.as_ref().ok_or_else(|| {
            Error::ModelMismatch("vertex insertion needs an enhanced or diminished model".into())
        })?;
        let g = self.graph.with_inserted_vertex(x)?;
        let new = self.graph.len();
        let (p, q) = (self.marks.p, self.marks.q);
        let mut red: Vec<bool> = self.marks.y.iter().map(|&y| y < p).collect();
        red.push(y0 < p);
        let mut up = self.marks.up.clone();
        up.push(w0 < 0.5);
        let conf = report_with_local_update(&g, report, &red, &up, new).is_configured(new);
        Ok(match (self.model, y0 < p) {
            (ColouringModel::Enhanced, true) => Colour::Red,
            (ColouringModel::Enhanced, false) if conf && z0 < q => Colour::Green,
            (_, false) => Colour::Closed,
            (_, true) if conf && z0 >= q => Colour::Diminished,
            (_, true) => Colour::Red,
        })
    }
}

/// Whether the vertex inserted at `query.x` is pivotal for the crossing
/// event in the sense of `query.mode`.
pub fn is_pivotal(real: &Realization, query: &PivotalQuery) -> Result<bool> {
    if real.model != query.mode.model() {
        return Err(Error::ModelMismatch(format!(
            "pivot mode {} needs the {} model, realization is {}",
            query.mode.index(),
            query.mode.model().name(),
            real.model.name()
        )));
    }
    let [y0, z0, w0] = real.inserted_uniforms();
    let p = real.marks.p;
    let x = query.x;
    let (with, without) = match query.mode {
        PivotMode::RedVsClosed | PivotMode::OpenVsClosed => (
            real.occurs_with(x, FORCE_LOW, z0, w0)?,
            real.occurs_with(x, FORCE_HIGH, z0, w0)?,
        ),
        PivotMode::GreenVsClosed => {
            if y0 < p {
                return Ok(false);
            }
            (
                real.occurs_with(x, y0, FORCE_LOW, w0)?,
                real.occurs_with(x, y0, FORCE_HIGH, w0)?,
            )
        }
        PivotMode::KeptVsDiminished => {
            if y0 >= p {
                return Ok(false);
            }
            (
                real.occurs_with(x, y0, FORCE_LOW, w0)?,
                real.occurs_with(x, y0, FORCE_HIGH, w0)?,
            )
        }
    };
    Ok(with && !without)
}
