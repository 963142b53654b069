use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::colour_realization;
use super::pivotal::{is_pivotal, PivotMode, PivotalQuery, Realization};
use crate::connfn::ConnectionFunction;
use crate::error::{check_closed, check_positive, Error, Result};
use crate::perc::{crossing_occurs, sample_graph, ColouringModel, MarkState};
use crate::ppgen::{Purpose, Region, RngStream};

/// Replication offset for the pivotality side, so it never shares
/// randomness with the finite-difference side.
const RHS_REP_OFFSET: u64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Derivative {
    P,
    Q,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RussoParams {
    pub lambda: f64,
    pub f: ConnectionFunction,
    pub p: f64,
    pub q: f64,
    pub n: f64,
    pub model: ColouringModel,
    pub wrt: Derivative,
    pub reps: u64,
    pub h: f64,
    pub seed: u64,
}

impl RussoParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("lambda", self.lambda)?;
        check_closed("p", self.p, 0.0, 1.0)?;
        check_closed("q", self.q, 0.0, 1.0)?;
        check_positive("h", self.h)?;
        if self.h > 0.5 {
            return Err(Error::invalid("h", format!("must be at most 0.5, got {}", self.h)));
        }
        if self.reps < 2 {
            return Err(Error::invalid("reps", "need at least 2 replications"));
        }
        self.model.crossing(self.n).validate()?;
        self.mode()?;
        Ok(())
    }

    pub fn mode(&self) -> Result<PivotMode> {
        match (self.model, self.wrt) {
            (ColouringModel::Enhanced, Derivative::P) => Ok(PivotMode::RedVsClosed),
            (ColouringModel::Enhanced, Derivative::Q) => Ok(PivotMode::GreenVsClosed),
            (ColouringModel::Diminished, Derivative::P) => Ok(PivotMode::OpenVsClosed),
            (ColouringModel::Diminished, Derivative::Q) => Ok(PivotMode::KeptVsDiminished),
            (ColouringModel::Plain, _) => Err(Error::ModelMismatch(
                "the derivative check needs the enhanced or diminished model".into(),
            )),
        }
    }

    fn value(&self) -> f64 {
        match self.wrt {
            Derivative::P => self.p,
            Derivative::Q => self.q,
        }
    }

    /// Finite-difference end points, clipped to [0, 1].
    fn stencil(&self, h: f64) -> (f64, f64) {
        let v = self.value();
        ((v - h).max(0.0), (v + h).min(1.0))
    }

    fn at(&self, v: f64) -> (f64, f64) {
        match self.wrt {
            Derivative::P => (v, self.q),
            Derivative::Q => (self.p, v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RussoReport {
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_se: f64,
    pub rhs_se: f64,
    /// Difference quotient at half the step, on the same realizations.
    pub lhs_half: f64,
    /// Discretisation allowance `(4/3)|lhs - lhs_half|`.
    pub bias: f64,
    pub tolerance: f64,
    pub agree: bool,
    pub h: f64,
    pub mode: u8,
    pub params: RussoParams,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Compares a coupled difference quotient of `θ_n` with `λ |B_n|` times the
/// probability that a uniformly placed extra vertex is pivotal.
///
/// Agreement means `|lhs - rhs| <= 3 sqrt(lhs_se² + rhs_se² + bias²)`.
pub fn russo_check(params: &RussoParams) -> Result<RussoReport> {
    params.validate()?;
    let mode = params.mode()?;
    let region = Region::Disc { radius: params.n };
    let spec = params.model.crossing(params.n);
    let (lo, hi) = params.stencil(params.h);
    let (lo2, hi2) = params.stencil(params.h / 2.0);

    let diffs = (0..params.reps)
        .into_par_iter()
        .map(|r| -> Result<(f64, f64)> {
            let g = sample_graph(&region, params.lambda, &params.f, params.seed, r)?;
            let base = MarkState::draw(&g, &RngStream::new(params.seed, Purpose::Site, r));
            let occurs = |v: f64| -> Result<f64> {
                let mut m = base.clone();
                let (p, q) = params.at(v);
                colour_realization(&g, &mut m, params.model, p, q)?;
                Ok(f64::from(u8::from(crossing_occurs(&g, &m, &spec)?)))
            };
            Ok((occurs(hi)? - occurs(lo)?, occurs(hi2)? - occurs(lo2)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (d_h, d_h2): (Vec<f64>, Vec<f64>) = diffs.into_iter().unzip();
    let (m_h, sd_h) = mean_sd(&d_h);
    let (m_h2, _) = mean_sd(&d_h2);
    let reps = params.reps as f64;
    let lhs = m_h / (hi - lo);
    let lhs_se = sd_h / reps.sqrt() / (hi - lo);
    let lhs_half = m_h2 / (hi2 - lo2);

    let (p, q) = (params.p, params.q);
    let pivots = (0..params.reps)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let rep = RHS_REP_OFFSET + r;
            let real = Realization::sample(
                params.lambda,
                &params.f,
                params.n,
                params.model,
                p,
                q,
                params.seed,
                rep,
            )?;
            let x = region.sample_uniform(&mut RngStream::new(params.seed, Purpose::Location, rep).rng());
            Ok(f64::from(u8::from(is_pivotal(&real, &PivotalQuery { x, mode })?)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (m_piv, sd_piv) = mean_sd(&pivots);
    let scale = params.lambda * region.area();
    let rhs = scale * m_piv;
    let rhs_se = scale * sd_piv / reps.sqrt();

    let bias = 4.0 / 3.0 * (lhs - lhs_half).abs();
    let tolerance = 3.0 * (lhs_se.powi(2) + rhs_se.powi(2) + bias.powi(2)).sqrt();
    Ok(RussoReport {
        lhs,
        rhs,
        lhs_se,
        rhs_se,
        lhs_half,
        bias,
        tolerance,
        agree: (lhs - rhs).abs() <= tolerance,
        h: params.h,
        mode: mode.index(),
        params: params.clone(),
    })
}
