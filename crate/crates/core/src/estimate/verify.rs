use std::io::Write;

use serde::{Deserialize, Serialize};

use super::estimator::{BondCrossing, CoupledCrossing, IntensityCrossing, SiteCrossing};
use super::threshold::{bootstrap, sample_sd, threshold_with_criticals, ThresholdResult};
use crate::connfn::{penrose_lower_bound, ConnectionFunction};
use crate::error::{check_positive, Error, Result};
use crate::perc::CrossingSpec;
use crate::ppgen::Region;

/// Mean-degree range bracketing every intensity threshold searched for.
const DEGREE_BRACKET: [f64; 2] = [0.5, 8.0];
const MIN_REPS: u64 = 100;

fn default_side() -> f64 {
    20.0
}

fn default_one() -> f64 {
    1.0
}

/// A finite-size direction experiment on a torus of the given side, with
/// wrapping as the crossing event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Site threshold exceeds bond threshold at intensity `lambda`.
    SiteVsBond {
        lambda: f64,
        f: ConnectionFunction,
        #[serde(default = "default_side")]
        side: f64,
    },
    /// Intensity threshold of `q0·f` exceeds that of `f`.
    Squash {
        f: ConnectionFunction,
        q0: f64,
        #[serde(default = "default_side")]
        side: f64,
    },
    /// Intensity threshold of the `p`-spread is below that of the
    /// `q`-spread for `p < q`; `p = q` checks the two agree.
    Spread {
        f: ConnectionFunction,
        p: f64,
        #[serde(default = "default_one")]
        q: f64,
        #[serde(default = "default_side")]
        side: f64,
    },
    /// Intensity threshold is at least the first-moment lower bound.
    LowerBound {
        f: ConnectionFunction,
        #[serde(default = "default_side")]
        side: f64,
    },
    /// Thresholds of spreads along decreasing `ps` decrease and stay above
    /// the lower bound.
    SpreadLimit {
        f: ConnectionFunction,
        ps: Vec<f64>,
        #[serde(default = "default_side")]
        side: f64,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::SiteVsBond { .. } => "site_vs_bond",
            Experiment::Squash { .. } => "squash",
            Experiment::Spread { .. } => "spread",
            Experiment::LowerBound { .. } => "lower_bound",
            Experiment::SpreadLimit { .. } => "spread_limit",
        }
    }

    fn side(&self) -> f64 {
        match *self {
            Experiment::SiteVsBond { side, .. }
            | Experiment::Squash { side, .. }
            | Experiment::Spread { side, .. }
            | Experiment::LowerBound { side, .. }
            | Experiment::SpreadLimit { side, .. } => side,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("side", self.side())?;
        match self {
            Experiment::SiteVsBond { lambda, .. } => check_positive("lambda", *lambda),
            Experiment::Squash { q0, .. } => {
                if *q0 > 0.0 && *q0 < 1.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("q0", format!("must lie in (0, 1), got {q0}")))
                }
            }
            Experiment::Spread { p, q, .. } => {
                if *p > 0.0 && p <= q && *q <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("p", format!("need 0 < p <= q <= 1, got p={p}, q={q}")))
                }
            }
            Experiment::LowerBound { .. } => Ok(()),
            Experiment::SpreadLimit { ps, .. } => {
                if ps.len() < 2 {
                    return Err(Error::invalid("ps", "need at least two spread parameters"));
                }
                if ps.windows(2).any(|w| !(w[0] > w[1])) || ps.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
                    return Err(Error::invalid("ps", "must be strictly decreasing in (0, 1]"));
                }
                Ok(())
            }
        }
    }
}

/// One named inequality evaluated on the estimates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub difference: f64,
    pub stderr: f64,
    pub margin_in_se: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub experiment: Experiment,
    pub direction_confirmed: bool,
    /// Smallest margin over the checks, in units of the paired standard
    /// error.
    pub margin_in_se: f64,
    pub checks: Vec<Check>,
    pub labels: Vec<String>,
    pub thresholds: Vec<ThresholdResult>,
    pub lower_bound: Option<f64>,
    pub budget: u64,
    pub reps_per_model: u64,
    pub replication_evaluations: u64,
    pub tol: f64,
    pub seed: u64,
}

impl VerifyReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "experiment", "check", "difference", "stderr", "margin_in_se", "passed", "confirmed",
        "seed",
    ];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for c in &self.checks {
            w.write_record([
                self.experiment.name().to_string(),
                c.name.clone(),
                c.difference.to_string(),
                c.stderr.to_string(),
                c.margin_in_se.to_string(),
                c.passed.to_string(),
                self.direction_confirmed.to_string(),
                self.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn margin(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

struct Run {
    labels: Vec<String>,
    results: Vec<ThresholdResult>,
    criticals: Vec<Vec<f64>>,
}

impl Run {
    fn value(&self, i: usize) -> f64 {
        self.results[i].value
    }
}

fn evaluations_per_model(lo: f64, hi: f64, tol: f64) -> u64 {
    2 + ((hi - lo) / tol).log2().ceil().max(0.0) as u64
}

/// Paired comparison `a - b` with a joint bootstrap over replications.
fn paired(run: &Run, a: usize, b: usize, seed: u64, name: String, strict: bool) -> Check {
    let boot = bootstrap(&[&run.criticals[a], &run.criticals[b]], seed);
    let diffs: Vec<f64> = boot[0].iter().zip(&boot[1]).map(|(x, y)| x - y).collect();
    let difference = run.value(a) - run.value(b);
    let stderr = sample_sd(&diffs);
    let m = margin(difference, stderr);
    Check {
        name,
        difference,
        stderr,
        margin_in_se: m,
        passed: if strict { m > 3.0 } else { m.abs() <= 3.0 },
    }
}

/// Runs the paired threshold estimations for `experiment` with common
/// random numbers (same seed and replication indices for every model) and
/// reports the direction of the inequality in standard-error units.
///
/// `budget` bounds the total replication-evaluations across all models.
pub fn verify_inequality(experiment: &Experiment, budget: u64, tol: f64, seed: u64) -> Result<VerifyReport> {
    experiment.validate()?;
    check_positive("tol", tol)?;
    let side = experiment.side();
    let region = Region::Torus { side };
    let spec = CrossingSpec::wrap();

    type Models = (Vec<(String, IntensityCrossing)>, f64, f64);
    let intensity_models = |fs: Vec<(String, ConnectionFunction)>| -> Result<Models> {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (_, f) in &fs {
            lo = lo.min(IntensityCrossing::intensity_for_degree(f, DEGREE_BRACKET[0])?);
            hi = hi.max(IntensityCrossing::intensity_for_degree(f, DEGREE_BRACKET[1])?);
        }
        let models = fs
            .into_iter()
            .map(|(l, f)| Ok((l, IntensityCrossing::new(f, region.clone(), spec, hi)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((models, lo, hi))
    };

    let run_all = |models: Vec<(String, Box<dyn CoupledCrossing>)>, lo: f64, hi: f64| -> Result<(Run, u64)> {
        let per = evaluations_per_model(lo, hi, tol);
        let reps = budget / (models.len() as u64 * per);
        if reps < MIN_REPS {
            return Err(Error::invalid(
                "budget",
                format!(
                    "{budget} gives {reps} replications per model; need at least {MIN_REPS} ({} models, {per} evaluations each)",
                    models.len()
                ),
            ));
        }
        let mut run = Run {
            labels: Vec::new(),
            results: Vec::new(),
            criticals: Vec::new(),
        };
        for (label, est) in models {
            let (r, cs) = threshold_with_criticals(est.as_ref(), lo, hi, reps, tol, seed)?;
            run.labels.push(label);
            run.results.push(r);
            run.criticals.push(cs);
        }
        Ok((run, reps))
    };

    let boxed = |v: Vec<(String, IntensityCrossing)>| -> Vec<(String, Box<dyn CoupledCrossing>)> {
        v.into_iter()
            .map(|(l, e)| (l, Box::new(e) as Box<dyn CoupledCrossing>))
            .collect()
    };

    let lb_checks = |run: &Run, f: &ConnectionFunction| -> Result<(f64, Vec<Check>)> {
        let lb = penrose_lower_bound(f)?;
        let checks = run
            .results
            .iter()
            .zip(&run.labels)
            .map(|(r, l)| {
                let m = margin(r.value - lb, r.stderr);
                Check {
                    name: format!("{l} >= lower_bound"),
                    difference: r.value - lb,
                    stderr: r.stderr,
                    margin_in_se: m,
                    passed: m >= -3.0,
                }
            })
            .collect();
        Ok((lb, checks))
    };

    let (run, reps, checks, lower_bound) = match experiment {
        Experiment::SiteVsBond { lambda, f, .. } => {
            let site = SiteCrossing::new(*lambda, f.clone(), region.clone(), spec)?;
            let bond = BondCrossing::new(*lambda, f.clone(), region.clone(), spec)?;
            let models: Vec<(String, Box<dyn CoupledCrossing>)> =
                vec![("site".into(), Box::new(site)), ("bond".into(), Box::new(bond))];
            let (run, reps) = run_all(models, 0.0, 1.0).map_err(|e| match e {
                Error::BracketViolation { hi_value, .. } if hi_value < 0.5 => Error::Subcritical(format!(
                    "crossing estimate {hi_value} < 1/2 with every vertex present at lambda={lambda}; need lambda above the intensity threshold"
                )),
                e => e,
            })?;
            let c = paired(&run, 0, 1, seed, "site - bond".into(), true);
            (run, reps, vec![c], None)
        }
        Experiment::Squash { f, q0, .. } => {
            let (models, lo, hi) = intensity_models(vec![("squashed".into(), f.squash(*q0)?), ("f".into(), f.clone())])?;
            let (run, reps) = run_all(boxed(models), lo, hi)?;
            let c = paired(&run, 0, 1, seed, "squashed - f".into(), true);
            (run, reps, vec![c], None)
        }
        Experiment::Spread { f, p, q, .. } => {
            let (models, lo, hi) = intensity_models(vec![
                (format!("spread_{q}"), f.spread(*q)?),
                (format!("spread_{p}"), f.spread(*p)?),
            ])?;
            let (run, reps) = run_all(boxed(models), lo, hi)?;
            let strict = p < q;
            let c = paired(&run, 0, 1, seed, format!("spread_{q} - spread_{p}"), strict);
            (run, reps, vec![c], None)
        }
        Experiment::LowerBound { f, .. } => {
            let (models, lo, hi) = intensity_models(vec![("f".into(), f.clone())])?;
            let (run, reps) = run_all(boxed(models), lo, hi)?;
            let (lb, checks) = lb_checks(&run, f)?;
            (run, reps, checks, Some(lb))
        }
        Experiment::SpreadLimit { f, ps, .. } => {
            let fs = ps
                .iter()
                .map(|&p| Ok((format!("spread_{p}"), f.spread(p)?)))
                .collect::<Result<Vec<_>>>()?;
            let (models, lo, hi) = intensity_models(fs)?;
            let (run, reps) = run_all(boxed(models), lo, hi)?;
            let mut checks: Vec<Check> = (1..run.results.len())
                .map(|i| {
                    let mut c = paired(
                        &run,
                        i - 1,
                        i,
                        seed,
                        format!("{} - {}", run.labels[i - 1], run.labels[i]),
                        true,
                    );
                    // Monotonicity of the estimates is the claim here.
                    c.passed = c.difference > 0.0;
                    c
                })
                .collect();
            let (lb, lbc) = lb_checks(&run, f)?;
            checks.extend(lbc);
            (run, reps, checks, Some(lb))
        }
    };

    let replication_evaluations = run.results.iter().map(|r| r.replication_evaluations).sum();
    let margin_in_se = checks
        .iter()
        .map(|c| c.margin_in_se)
        .fold(f64::INFINITY, f64::min);
    let direction_confirmed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        experiment: experiment.clone(),
        direction_confirmed,
        margin_in_se,
        checks,
        labels: run.labels,
        thresholds: run.results,
        lower_bound,
        budget,
        reps_per_model: reps,
        replication_evaluations,
        tol,
        seed,
    })
}
