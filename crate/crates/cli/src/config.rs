//! Experiment configuration: one JSON document per run, individual fields
//! overridable from the command line.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use contperc::enhance::Derivative;
use contperc::estimate::Experiment;
use contperc::{ColouringModel, ConnectionFunction, CrossingSpec, Region};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// Sweep the intensity at fixed connection function.
    Intensity,
    /// Sweep site retention `p` at fixed intensity.
    Site,
    /// Sweep bond retention `p` at fixed intensity.
    Bond,
    /// Sweep `p` in the colouring model's disc crossing.
    Model,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub estimator: EstimatorKind,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub tol: f64,
    /// Torus sides (or disc radii for disc crossings), one threshold each.
    pub windows: Vec<f64>,
    /// If set, report the crossing curve on this grid instead of bisecting.
    pub grid: Option<Vec<f64>>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            estimator: EstimatorKind::Intensity,
            lo: None,
            hi: None,
            tol: 1e-3,
            windows: vec![20.0],
            grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RussoConfig {
    pub wrt: Derivative,
    pub h: f64,
}

impl Default for RussoConfig {
    fn default() -> Self {
        RussoConfig {
            wrt: Derivative::P,
            h: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lambda: f64,
    pub f: ConnectionFunction,
    pub p: f64,
    pub q: f64,
    pub model: ColouringModel,
    /// Radius of the disc window for `theta` and `russo`.
    pub n: f64,
    /// Window for `sample`, `graph` and `couple`; defaults to the disc of
    /// radius `n`.
    pub region: Option<Region>,
    /// Crossing event for `threshold`; defaults to wrapping on a torus.
    pub spec: Option<CrossingSpec>,
    pub reps: u64,
    pub seed: u64,
    /// Total replication-evaluations for `verify`.
    pub budget: u64,
    pub threshold: ThresholdConfig,
    pub verify: Option<Experiment>,
    pub russo: RussoConfig,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lambda: 1.0,
            f: ConnectionFunction::indicator(1.0).expect("unit range"),
            p: 1.0,
            q: 1.0,
            model: ColouringModel::Plain,
            n: 5.0,
            region: None,
            spec: None,
            reps: 1000,
            seed: 0,
            budget: 1_000_000,
            threshold: ThresholdConfig::default(),
            verify: None,
            russo: RussoConfig::default(),
            workers: None,
            output: None,
            format: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses a JSON document; errors carry the line and column.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |m| m.0);
            anyhow::anyhow!("{origin}:{}:{}: {msg}", e.line(), e.column())
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text, &path.display().to_string())
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn region(&self) -> Region {
        self.region.clone().unwrap_or(Region::Disc { radius: self.n })
    }

    /// Hash of everything that influences results; worker count and output
    /// destination are excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        c.output = None;
        c.format = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Checks the fields a subcommand reads, before any simulation starts.
    pub fn validate(&self, command: &str) -> Result<()> {
        let field = |name: &str, ok: bool, why: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                bail!("config field `{name}`: {why}")
            }
        };
        field("lambda", self.lambda > 0.0 && self.lambda.is_finite(), "must be finite and > 0")?;
        field("p", (0.0..=1.0).contains(&self.p), "must lie in [0, 1]")?;
        field("q", (0.0..=1.0).contains(&self.q), "must lie in [0, 1]")?;
        field("reps", self.reps >= 1, "must be at least 1")?;
        if let Some(w) = self.workers {
            field("workers", w >= 1, "must be at least 1")?;
        }
        match command {
            "sample" | "graph" | "couple" => {
                self.region().validate().map_err(|e| anyhow::anyhow!("config field `region`: {e}"))?;
            }
            "theta" => field("n", self.n > 1.0 && self.n.is_finite(), "must be finite and > 1")?,
            "russo" => {
                field("n", self.n > 1.0 && self.n.is_finite(), "must be finite and > 1")?;
                field("russo.h", self.russo.h > 0.0 && self.russo.h <= 0.5, "must lie in (0, 0.5]")?;
                field("reps", self.reps >= 2, "must be at least 2")?;
                field(
                    "model",
                    self.model != ColouringModel::Plain,
                    "russo needs the enhanced or diminished model",
                )?;
            }
            "threshold" => {
                let t = &self.threshold;
                field("threshold.tol", t.tol > 0.0, "must be > 0")?;
                field("threshold.windows", !t.windows.is_empty(), "must not be empty")?;
                field(
                    "threshold.windows",
                    t.windows.iter().all(|w| *w > 0.0 && w.is_finite()),
                    "every window must be finite and > 0",
                )?;
                if let (Some(lo), Some(hi)) = (t.lo, t.hi) {
                    field("threshold.lo", lo < hi, "must be below threshold.hi")?;
                }
                if let Some(g) = &t.grid {
                    field("threshold.grid", !g.is_empty(), "must not be empty")?;
                    field("threshold.grid", g.windows(2).all(|w| w[0] <= w[1]), "must be sorted ascending")?;
                }
                field("reps", self.reps >= 2, "must be at least 2")?;
            }
            "verify" => {
                let e = self
                    .verify
                    .as_ref()
                    .context("config field `verify`: required for the verify subcommand")?;
                e.validate().map_err(|err| anyhow::anyhow!("config field `verify`: {err}"))?;
                field("threshold.tol", self.threshold.tol > 0.0, "must be > 0")?;
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let mut c = ExperimentConfig {
            lambda: 2.5,
            p: 0.3,
            region: Some(Region::Torus { side: 12.0 }),
            spec: Some(CrossingSpec::wrap()),
            verify: Some(Experiment::Squash {
                f: ConnectionFunction::indicator(1.0).unwrap(),
                q0: 0.5,
                side: 20.0,
            }),
            workers: Some(3),
            ..Default::default()
        };
        c.threshold.grid = Some(vec![0.1, 0.2]);
        let back = ExperimentConfig::from_json(&c.to_json(), "mem").unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), c.to_json());
    }

    #[test]
    fn diagnostics_name_the_field_and_line() {
        let err = ExperimentConfig::from_json("{\n  \"lamda\": 2\n}", "cfg.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("cfg.json:2:"), "{msg}");
        assert!(msg.contains("lamda"), "{msg}");
        let c = ExperimentConfig { p: 1.5, ..Default::default() };
        assert!(c.validate("theta").unwrap_err().to_string().contains("`p`"));
    }

    #[test]
    fn hash_ignores_workers_and_output() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { workers: Some(8), output: Some("x.csv".into()), ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig { seed: 1, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
    }
}
