use anyhow::{bail, Result};
use contperc::connfn::mean_degree;
use contperc::enhance::{coupled_site_in_bond, russo_check, RussoParams};
use contperc::estimate::{
    bisect_threshold, sweep_crossing, verify_inequality, BondCrossing, CoupledCrossing,
    IntensityCrossing, ModelCrossing, SiteCrossing, ThresholdResult,
};
use contperc::geograph::{build_gilbert, build_rcm, degree_stats};
use contperc::perc::{estimate_theta_n, ThetaParams};
use contperc::ppgen::sample_poisson;
use contperc::{CrossingSpec, Estimate, Purpose, Region, RngStream};
use serde::Serialize;

use crate::config::{EstimatorKind, ExperimentConfig, Format};
use crate::output::Sink;

pub enum Outcome {
    Success,
    /// `verify` ran but the direction was not confirmed.
    NotConfirmed,
}

pub fn dispatch(command: &str, cfg: &ExperimentConfig) -> Result<Outcome> {
    let sink = Sink::new(cfg);
    match command {
        "sample" => sample(cfg, &sink),
        "graph" => graph(cfg, &sink),
        "theta" => theta(cfg, &sink),
        "threshold" => threshold(cfg, &sink),
        "verify" => return verify(cfg, &sink),
        "russo" => russo(cfg, &sink),
        "couple" => couple(cfg, &sink),
        other => bail!("unknown subcommand {other}"),
    }?;
    Ok(Outcome::Success)
}

fn build_graph(cfg: &ExperimentConfig) -> Result<(contperc::PointSet, contperc::GeometricGraph)> {
    let points = sample_poisson(&cfg.region(), cfg.lambda, &RngStream::new(cfg.seed, Purpose::Points, 0))?;
    let g = match cfg.f.as_indicator() {
        Some(r) => build_gilbert(&points, r)?,
        None => build_rcm(&points, &cfg.f, &RngStream::new(cfg.seed, Purpose::Edges, 0))?,
    };
    Ok((points, g))
}

fn sample(cfg: &ExperimentConfig, sink: &Sink) -> Result<()> {
    let points = sample_poisson(&cfg.region(), cfg.lambda, &RngStream::new(cfg.seed, Purpose::Points, 0))?;
    eprintln!("sampled {} points on {}", points.len(), cfg.region().describe());
    match sink.format() {
        Format::Csv => sink.csv(|w| points.write_csv(w)),
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                region: &'a Region,
                intensity: f64,
                points: &'a [[f64; 2]],
            }
            sink.json(
                "sample",
                &Out {
                    region: &points.region,
                    intensity: points.intensity,
                    points: &points.points,
                },
            )
        }
    }
}

fn graph(cfg: &ExperimentConfig, sink: &Sink) -> Result<()> {
    let (_, g) = build_graph(cfg)?;
    let stats = degree_stats(&g);
    eprintln!(
        "{} vertices, {} edges, mean degree {:.4}, variance {:.4}",
        g.len(),
        g.edge_count(),
        stats.mean,
        stats.variance
    );
    match sink.format() {
        Format::Csv => sink.csv(|w| g.write_edges_csv(w)),
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                vertices: usize,
                points: &'a [[f64; 2]],
                edges: Vec<(usize, usize, f64)>,
                degree: contperc::geograph::DegreeStats,
            }
            sink.json(
                "graph",
                &Out {
                    vertices: g.len(),
                    points: &g.points().points,
                    edges: g.edges().iter().map(|e| (e.u, e.v, e.dist)).collect(),
                    degree: stats,
                },
            )
        }
    }
}

fn theta(cfg: &ExperimentConfig, sink: &Sink) -> Result<()> {
    let params = ThetaParams {
        lambda: cfg.lambda,
        f: cfg.f.clone(),
        p: cfg.p,
        q: cfg.q,
        n: cfg.n,
        model: cfg.model,
        reps: cfg.reps,
        seed: cfg.seed,
    };
    let est = estimate_theta_n(&params)?;
    eprintln!("theta_n = {} ± {}", est.value, est.stderr);
    match sink.format() {
        Format::Csv => sink.csv(|w| Estimate::write_csv(std::slice::from_ref(&est), w)),
        Format::Json => sink.json("theta", &est),
    }
}

fn estimator_for(cfg: &ExperimentConfig, window: f64) -> Result<(Box<dyn CoupledCrossing>, f64, f64)> {
    let t = &cfg.threshold;
    let spec = match cfg.spec {
        Some(CrossingSpec::DiscAnnulus { margin, .. }) => CrossingSpec::DiscAnnulus { n: window, margin },
        Some(s) => s,
        None => CrossingSpec::wrap(),
    };
    let region = match spec {
        CrossingSpec::DiscAnnulus { .. } => Region::Disc { radius: window },
        CrossingSpec::TorusWrap { .. } => Region::Torus { side: window },
    };
    Ok(match t.estimator {
        EstimatorKind::Intensity => {
            let per = mean_degree(1.0, &cfg.f)?;
            let lo = t.lo.unwrap_or(0.5 / per);
            let hi = t.hi.unwrap_or(8.0 / per);
            (Box::new(IntensityCrossing::new(cfg.f.clone(), region, spec, hi)?), lo, hi)
        }
        EstimatorKind::Site => (
            Box::new(SiteCrossing::new(cfg.lambda, cfg.f.clone(), region, spec)?),
            t.lo.unwrap_or(0.0),
            t.hi.unwrap_or(1.0),
        ),
        EstimatorKind::Bond => (
            Box::new(BondCrossing::new(cfg.lambda, cfg.f.clone(), region, spec)?),
            t.lo.unwrap_or(0.0),
            t.hi.unwrap_or(1.0),
        ),
        EstimatorKind::Model => (
            Box::new(ModelCrossing::new(cfg.lambda, cfg.f.clone(), cfg.q, window, cfg.model)?),
            t.lo.unwrap_or(0.0),
            t.hi.unwrap_or(1.0),
        ),
    })
}

fn threshold(cfg: &ExperimentConfig, sink: &Sink) -> Result<()> {
    let t = &cfg.threshold;
    if let Some(grid) = &t.grid {
        let mut rows = Vec::new();
        for &w in &t.windows {
            let (est, _, _) = estimator_for(cfg, w)?;
            eprintln!("sweeping {} points in window {w}", grid.len());
            rows.extend(sweep_crossing(grid, est.as_ref(), cfg.reps, cfg.seed)?);
        }
        return match sink.format() {
            Format::Csv => sink.csv(|w| Estimate::write_csv(&rows, w)),
            Format::Json => sink.json("threshold", &rows),
        };
    }
    let mut results: Vec<ThresholdResult> = Vec::new();
    for &w in &t.windows {
        let (est, lo, hi) = estimator_for(cfg, w)?;
        let r = bisect_threshold(est.as_ref(), lo, hi, cfg.reps, t.tol, cfg.seed)?;
        eprintln!("window {w}: {} = {} ± {}", r.parameter, r.value, r.stderr);
        results.push(r);
    }
    match sink.format() {
        Format::Csv => sink.csv(|out| {
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["window"];
            header.extend(ThresholdResult::CSV_HEADER);
            w.write_record(&header)?;
            for (win, r) in t.windows.iter().zip(&results) {
                let mut row = vec![win.to_string()];
                row.extend(r.csv_record());
                w.write_record(&row)?;
            }
            w.flush()?;
            Ok(())
        }),
        Format::Json => sink.json("threshold", &results),
    }
}

fn verify(cfg: &ExperimentConfig, sink: &Sink) -> Result<Outcome> {
    let e = cfg.verify.as_ref().expect("validated");
    let report = verify_inequality(e, cfg.budget, cfg.threshold.tol, cfg.seed)?;
    eprintln!(
        "{}: direction_confirmed={} margin_in_se={}",
        e.name(),
        report.direction_confirmed,
        report.margin_in_se
    );
    match sink.format() {
        Format::Csv => sink.csv(|w| report.write_csv(w)),
        Format::Json => sink.json("verify", &report),
    }?;
    Ok(if report.direction_confirmed {
        Outcome::Success
    } else {
        Outcome::NotConfirmed
    })
}

fn russo(cfg: &ExperimentConfig, sink: &Sink) -> Result<()> {
    let params = RussoParams {
        lambda: cfg.lambda,
        f: cfg.f.clone(),
        p: cfg.p,
        q: cfg.q,
        n: cfg.n,
        model: cfg.model,
        wrt: cfg.russo.wrt,
        reps: cfg.reps,
        h: cfg.russo.h,
        seed: cfg.seed,
    };
    let r = russo_check(&params)?;
    eprintln!("lhs {} rhs {} tolerance {} agree {}", r.lhs, r.rhs, r.tolerance, r.agree);
    match sink.format() {
        Format::Csv => sink.csv(|out| {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "model", "wrt", "mode", "lambda", "p", "q", "n", "h", "reps", "lhs", "lhs_se", "lhs_half", "bias",
                "rhs", "rhs_se", "tolerance", "agree",
            ])?;
            w.write_record([
                cfg.model.name().to_string(),
                format!("{:?}", cfg.russo.wrt).to_lowercase(),
                r.mode.to_string(),
                cfg.lambda.to_string(),
                cfg.p.to_string(),
                cfg.q.to_string(),
                cfg.n.to_string(),
                r.h.to_string(),
                cfg.reps.to_string(),
                r.lhs.to_string(),
                r.lhs_se.to_string(),
                r.lhs_half.to_string(),
                r.bias.to_string(),
                r.rhs.to_string(),
                r.rhs_se.to_string(),
                r.tolerance.to_string(),
                r.agree.to_string(),
            ])?;
            w.flush()?;
            Ok(())
        }),
        Format::Json => sink.json("russo", &r),
    }
}

fn couple(cfg: &ExperimentConfig, sink: &Sink) -> Result<()> {
    let (_, g) = build_graph(cfg)?;
    let r = coupled_site_in_bond(&g, cfg.p, &RngStream::new(cfg.seed, Purpose::Bond, 0))?;
    eprintln!(
        "{} site clusters, all contained in bond clusters: {}",
        r.clusters.len(),
        r.all_contained
    );
    match sink.format() {
        Format::Csv => sink.csv(|out| {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["variant", "label", "size", "enclosing", "contained"])?;
            let enhanced = r.enhanced.iter().flat_map(|e| e.clusters.iter().map(|c| ("enhanced", c)));
            for (variant, c) in r.clusters.iter().map(|c| ("site", c)).chain(enhanced) {
                w.write_record([
                    variant.to_string(),
                    c.label.to_string(),
                    c.size.to_string(),
                    c.enclosing.map(|v| v.to_string()).unwrap_or_default(),
                    c.enclosing.is_some().to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }),
        Format::Json => sink.json("couple", &r),
    }
}
