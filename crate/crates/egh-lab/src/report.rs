//! Self-describing run reports: the command, digests of every input file,
//! structured results, and wall time. Rerunning the echoed command on the
//! same inputs reproduces the report bit-for-bit apart from the wall time.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub threads: usize,
    pub results: serde_json::Value,
    pub verdict_match: bool,
    pub wall_ms: u128,
}

pub struct ReportBuilder {
    started: Instant,
    command: Vec<String>,
    inputs: Vec<InputDigest>,
    seed: u64,
    threads: usize,
}

impl ReportBuilder {
    pub fn new(seed: u64) -> Self {
        Self {
            started: Instant::now(),
            command: std::env::args().collect(),
            inputs: Vec::new(),
            seed,
            threads: thread_cap(),
        }
    }

    pub fn add_input(&mut self, path: &str) -> Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("digesting {path}"))?;
        let mut h = Sha256::new();
        h.update(&bytes);
        self.inputs.push(InputDigest { path: path.to_string(), sha256: hex::encode(h.finalize()) });
        Ok(())
    }

    pub fn finish(self, results: serde_json::Value, verdict_match: bool) -> RunReport {
        RunReport {
            command: self.command,
            inputs: self.inputs,
            seed: self.seed,
            threads: self.threads,
            results,
            verdict_match,
            wall_ms: self.started.elapsed().as_millis(),
        }
    }
}

/// Parallelism cap from `EGH_LAB_THREADS`; defaults to 1.
pub fn thread_cap() -> usize {
    std::env::var("EGH_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(1)
}

/// Writes pretty JSON atomically (temp file + rename).
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        serde_json::to_writer_pretty(&mut f, value)?;
        f.write_all(b"\n")?;
        f.flush()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
