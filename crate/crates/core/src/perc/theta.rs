use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connfn::ConnectionFunction;
use crate::enhance::colour_realization;
use crate::error::{check_closed, check_positive, Error, Result};
use crate::geograph::{build_gilbert, build_rcm, GeometricGraph};
use crate::perc::{crossing_occurs, CrossingSpec, MarkState};
use crate::ppgen::{sample_poisson, Purpose, Region, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColouringModel {
    Plain,
    Enhanced,
    Diminished,
}

impl ColouringModel {
    pub fn name(self) -> &'static str {
        match self {
            ColouringModel::Plain => "plain",
            ColouringModel::Enhanced => "enhanced",
            ColouringModel::Diminished => "diminished",
        }
    }

    /// Crossing event used for `θ_n` under this model.
    pub fn crossing(self, n: f64) -> CrossingSpec {
        match self {
            ColouringModel::Diminished => CrossingSpec::disc_diminished(n),
            _ => CrossingSpec::disc(n),
        }
    }
}

/// A Monte-Carlo proportion with its binomial standard error, plus the
/// parameters that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub model: String,
    pub lambda: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub n: Option<f64>,
    pub spec: String,
    pub reps: u64,
    pub successes: u64,
    pub value: f64,
    pub stderr: f64,
    pub seed: u64,
}

impl Estimate {
    pub const CSV_HEADER: [&'static str; 10] = [
        "model", "lambda", "p", "q", "n", "spec", "reps", "value", "stderr", "seed",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.model.clone(),
            opt(self.lambda),
            opt(self.p),
            opt(self.q),
            opt(self.n),
            self.spec.clone(),
            self.reps.to_string(),
            self.value.to_string(),
            self.stderr.to_string(),
            self.seed.to_string(),
        ]
    }

    pub fn write_csv<W: Write>(rows: &[Estimate], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in rows {
            w.write_record(r.csv_record())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(k/n, sqrt(v(1-v)/n))`.
pub fn binomial_estimate(successes: u64, reps: u64) -> (f64, f64) {
    if reps == 0 {
        return (f64::NAN, f64::NAN);
    }
    let v = successes as f64 / reps as f64;
    (v, (v * (1.0 - v) / reps as f64).sqrt())
}

/// Poisson points of intensity `lambda` in `region`, joined by `f`: the
/// Gilbert rule for indicators, random connections otherwise.
pub fn sample_graph(
    region: &Region,
    lambda: f64,
    f: &ConnectionFunction,
    seed: u64,
    rep: u64,
) -> Result<GeometricGraph> {
    let points = sample_poisson(region, lambda, &RngStream::new(seed, Purpose::Points, rep))?;
    match f.as_indicator() {
        Some(range) => build_gilbert(&points, range),
        None => build_rcm(&points, f, &RngStream::new(seed, Purpose::Edges, rep)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaParams {
    pub lambda: f64,
    pub f: ConnectionFunction,
    pub p: f64,
    pub q: f64,
    pub n: f64,
    pub model: ColouringModel,
    pub reps: u64,
    pub seed: u64,
}

impl ThetaParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("lambda", self.lambda)?;
        check_closed("p", self.p, 0.0, 1.0)?;
        check_closed("q", self.q, 0.0, 1.0)?;
        if !(self.n > 1.0) || !self.n.is_finite() {
            return Err(Error::invalid("n", format!("must be finite and > 1, got {}", self.n)));
        }
        if self.reps == 0 {
            return Err(Error::invalid("reps", "must be at least 1"));
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        Region::Disc { radius: self.n }
    }

    pub fn spec(&self) -> CrossingSpec {
        self.model.crossing(self.n)
    }
}

/// The crossing indicator for replication `rep`. Points, edges and marks
/// depend only on `(lambda, f, n, seed, rep)`, so indicators at different
/// `(p, q)` are coupled and monotone in `p`.
pub fn theta_replication(params: &ThetaParams, rep: u64) -> Result<bool> {
    let g = sample_graph(&params.region(), params.lambda, &params.f, params.seed, rep)?;
    let mut m = MarkState::draw(&g, &RngStream::new(params.seed, Purpose::Site, rep));
    colour_realization(&g, &mut m, params.model, params.p, params.q)?;
    crossing_occurs(&g, &m, &params.spec())
}

/// Monte-Carlo estimate of `θ_n` over `reps` independent replications.
/// Results are independent of the rayon pool size.
pub fn estimate_theta_n(params: &ThetaParams) -> Result<Estimate> {
    params.validate()?;
    let hits = (0..params.reps)
        .into_par_iter()
        .map(|r| theta_replication(params, r).map(u64::from))
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();
    let (value, stderr) = binomial_estimate(hits, params.reps);
    Ok(Estimate {
        model: params.model.name().into(),
        lambda: Some(params.lambda),
        p: Some(params.p),
        q: Some(params.q),
        n: Some(params.n),
        spec: params.spec().describe(),
        reps: params.reps,
        successes: hits,
        value,
        stderr,
        seed: params.seed,
    })
}
