use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use super::estimator::{critical_values, CoupledCrossing};
use crate::error::{check_positive, Error, Result};
use crate::perc::{binomial_estimate, Estimate};
use crate::ppgen::{Purpose, RngStream};

pub const BOOTSTRAP_SAMPLES: usize = 200;
const BOOTSTRAP_TAG: u64 = 0xB007;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub value: f64,
    pub theta: f64,
}

/// A pseudo-critical value: the 1/2-crossing of one estimator's coupled
/// crossing curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub parameter: String,
    pub estimator: Value,
    pub value: f64,
    /// Bootstrap standard error over replications.
    pub stderr: f64,
    /// Final interval; the curve is below 1/2 at the left end and at or above
    /// it at the right end.
    pub bracket: [f64; 2],
    pub initial_bracket: [f64; 2],
    pub tol: f64,
    pub reps: u64,
    pub seed: u64,
    pub evaluations: usize,
    pub replication_evaluations: u64,
    /// Reps with no crossing anywhere in the initial bracket.
    pub censored: u64,
    /// Every evaluated point, sorted by value.
    pub curve: Vec<CurvePoint>,
    pub monotone_violations: usize,
}

impl ThresholdResult {
    pub const CSV_HEADER: [&'static str; 10] = [
        "parameter", "value", "stderr", "bracket_lo", "bracket_hi", "tol", "reps", "evaluations",
        "censored", "seed",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.parameter.clone(),
            self.value.to_string(),
            self.stderr.to_string(),
            self.bracket[0].to_string(),
            self.bracket[1].to_string(),
            self.tol.to_string(),
            self.reps.to_string(),
            self.evaluations.to_string(),
            self.censored.to_string(),
            self.seed.to_string(),
        ]
    }

    pub fn write_csv<W: Write>(rows: &[ThresholdResult], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in rows {
            w.write_record(r.csv_record())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Bisects a nondecreasing curve for its 1/2-crossing. Requires
/// `curve(lo) < 1/2 <= curve(hi)`; returns the final interval (width at
/// most `tol`) and every evaluated point.
pub fn bisect_curve<F>(lo: f64, hi: f64, tol: f64, mut curve: F) -> Result<([f64; 2], Vec<CurvePoint>)>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_positive("tol", tol)?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("bracket", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    let (tl, th) = (curve(lo)?, curve(hi)?);
    if !(tl < 0.5 && th >= 0.5) {
        return Err(Error::BracketViolation {
            lo,
            hi,
            lo_value: tl,
            hi_value: th,
        });
    }
    let mut points = vec![CurvePoint { value: lo, theta: tl }, CurvePoint { value: hi, theta: th }];
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let t = curve(mid)?;
        points.push(CurvePoint { value: mid, theta: t });
        if t < 0.5 {
            a = mid;
        } else {
            b = mid;
        }
    }
    points.sort_by(|x, y| x.value.total_cmp(&y.value));
    Ok(([a, b], points))
}

/// Fraction of critical values strictly below `v`.
fn ecdf(sorted: &[f64], v: f64) -> f64 {
    sorted.partition_point(|&c| c < v) as f64 / sorted.len() as f64
}

/// The 1/2-crossing of the empirical distribution of `cs`: the
/// `ceil(n/2)`-th smallest value.
pub(crate) fn half_crossing(cs: &mut [f64]) -> f64 {
    let k = cs.len().div_ceil(2) - 1;
    *cs.select_nth_unstable_by(k, |a, b| a.total_cmp(b)).1
}

/// Bootstrap replicates of the half-crossing, resampling replication
/// indices jointly across `sets` (all of equal length).
pub(crate) fn bootstrap(sets: &[&[f64]], seed: u64) -> Vec<Vec<f64>> {
    let n = sets[0].len();
    let mut rng = RngStream::new(seed, Purpose::Aux(BOOTSTRAP_TAG), 0).rng();
    let mut out = vec![Vec::with_capacity(BOOTSTRAP_SAMPLES); sets.len()];
    let mut buf = vec![0.0; n];
    for _ in 0..BOOTSTRAP_SAMPLES {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        for (s, set) in sets.iter().enumerate() {
            for (b, &i) in buf.iter_mut().zip(&idx) {
                *b = set[i];
            }
            out[s].push(half_crossing(&mut buf));
        }
    }
    out
}

pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    if xs.iter().any(|x| !x.is_finite()) {
        return f64::INFINITY;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Threshold of an estimator together with its per-replication critical
/// values, for paired comparisons.
pub(crate) fn threshold_with_criticals<E: CoupledCrossing + ?Sized>(
    est: &E,
    lo: f64,
    hi: f64,
    reps: u64,
    tol: f64,
    seed: u64,
) -> Result<(ThresholdResult, Vec<f64>)> {
    if reps < 2 {
        return Err(Error::invalid("reps", "need at least 2 replications"));
    }
    let exact = est.critical_value(seed, 0).is_some();
    let rep_tol = tol / 4.0;
    let mut cs = critical_values(est, lo, hi, rep_tol, reps, seed)?;
    cs.sort_by(|a, b| a.total_cmp(b));
    let (bracket, curve) = bisect_curve(lo, hi, tol, |v| Ok(ecdf(&cs, v)))?;
    let evaluations = curve.len();
    let per_rep = if exact {
        evaluations as u64
    } else {
        2 + ((hi - lo) / rep_tol).log2().ceil().max(0.0) as u64
    };
    let boot = bootstrap(&[&cs], seed);
    let censored = cs.iter().filter(|&&c| c >= hi).count() as u64;
    let monotone_violations = curve.windows(2).filter(|w| w[1].theta < w[0].theta).count();
    let result = ThresholdResult {
        parameter: est.parameter().into(),
        estimator: est.describe(),
        value: 0.5 * (bracket[0] + bracket[1]),
        stderr: sample_sd(&boot[0]),
        bracket,
        initial_bracket: [lo, hi],
        tol,
        reps,
        seed,
        evaluations,
        replication_evaluations: reps * per_rep,
        censored,
        curve,
        monotone_violations,
    };
    Ok((result, cs))
}

/// Bisects the coupled crossing curve of `est` on `[lo, hi]` to width
/// `tol`, using replications `0..reps` at every evaluation.
pub fn bisect_threshold<E: CoupledCrossing + ?Sized>(
    est: &E,
    lo: f64,
    hi: f64,
    reps: u64,
    tol: f64,
    seed: u64,
) -> Result<ThresholdResult> {
    threshold_with_criticals(est, lo, hi, reps, tol, seed).map(|r| r.0)
}

/// Crossing-probability estimates along a sorted grid, on shared
/// replications so the curve is monotone wherever the model is.
pub fn sweep_crossing<E: CoupledCrossing + ?Sized>(
    grid: &[f64],
    est: &E,
    reps: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must not be empty"));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("grid", "must be sorted ascending"));
    }
    if reps == 0 {
        return Err(Error::invalid("reps", "must be at least 1"));
    }
    let hits: Vec<u64> = if est.critical_value(seed, 0).is_some() {
        let mut cs = (0..reps)
            .into_par_iter()
            .map(|r| est.critical_value(seed, r).expect("exact"))
            .collect::<Result<Vec<f64>>>()?;
        cs.sort_by(|a, b| a.total_cmp(b));
        grid.iter().map(|&v| cs.partition_point(|&c| c < v) as u64).collect()
    } else {
        grid.iter()
            .map(|&v| {
                (0..reps)
                    .into_par_iter()
                    .map(|r| est.crossing(seed, r, v).map(u64::from))
                    .collect::<Result<Vec<u64>>>()
                    .map(|x| x.into_iter().sum())
            })
            .collect::<Result<_>>()?
    };
    Ok(grid
        .iter()
        .zip(hits)
        .map(|(&v, k)| {
            let (value, stderr) = binomial_estimate(k, reps);
            Estimate {
                reps,
                successes: k,
                value,
                stderr,
                seed,
                ..est.row(v)
            }
        })
        .collect())
}
