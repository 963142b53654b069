//! Artifact emission. Every CSV row carries `config_hash` and `seed`
//! columns; every JSON document carries them as top-level fields.

use std::fs::File;
use std::io::{self, Write};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{ExperimentConfig, Format};

pub struct Sink<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
}

impl<'a> Sink<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Self {
        Sink {
            cfg,
            hash: cfg.hash(),
        }
    }

    pub fn format(&self) -> Format {
        self.cfg.format.unwrap_or(Format::Csv)
    }

    fn write_bytes(&self, bytes: &[u8]) -> Result<()> {
        match &self.cfg.output {
            Some(path) => {
                let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                f.write_all(bytes)?;
                eprintln!("wrote {}", path.display());
            }
            None => io::stdout().lock().write_all(bytes)?,
        }
        Ok(())
    }

    /// Appends the provenance columns to CSV produced by `body`.
    pub fn csv<F>(&self, body: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> contperc::Result<()>,
    {
        let mut raw = Vec::new();
        body(&mut raw)?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(raw.as_slice());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
        // Rows that already record their seed keep it.
        let has_seed = header.iter().any(|h| h == "seed");
        header.push("config_hash".into());
        if !has_seed {
            header.push("seed".into());
        }
        w.write_record(&header)?;
        for rec in rdr.records() {
            let mut row: Vec<String> = rec?.iter().map(String::from).collect();
            row.push(self.hash.clone());
            if !has_seed {
                row.push(self.cfg.seed.to_string());
            }
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("flushing csv: {e}"))?;
        self.write_bytes(&bytes)
    }

    pub fn json<T: Serialize>(&self, command: &str, result: &T) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'b, T> {
            command: &'b str,
            config_hash: &'b str,
            seed: u64,
            config: &'b ExperimentConfig,
            result: &'b T,
        }
        let mut cfg = self.cfg.clone();
        cfg.workers = None;
        cfg.output = None;
        cfg.format = None;
        let doc = Doc {
            command,
            config_hash: &self.hash,
            seed: self.cfg.seed,
            config: &cfg,
            result,
        };
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        self.write_bytes(&bytes)
    }
}
