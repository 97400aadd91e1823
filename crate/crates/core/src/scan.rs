//! Monte-Carlo conjecture harness: seeded random states, coincidence
//! maximization at several outcome counts per state, append-only JSONL
//! records with per-record flushing, resumable runs, and summaries that are
//! pure functions of the record stream.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::optimizer::{
    derive_seed, extend_frames, optimize_coincidence_seeded, Classification, OptimizeOptions,
    OptimizerError,
};
use crate::state::{random_density, StateError};

/// Records with a gap above this threshold are conjecture-violation
/// candidates; they are re-run with 10x restarts before being reported.
pub const GAP_THRESHOLD: f64 = 1e-5;

/// Per-n convergence requirement for a record to enter the gap statistics.
pub const CONVERGENCE_RESIDUAL: f64 = 1e-7;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid scan config: {0}")]
    InvalidConfig(String),
    #[error("config hash mismatch: file has {found}, config is {expected}")]
    ConfigMismatch { expected: String, found: String },
    #[error("record file {0} has no header line")]
    MissingHeader(PathBuf),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanConfig {
    pub dims: (usize, usize),
    /// Ginibre rank of the sampled states (full rank by default).
    pub rank: usize,
    pub count: usize,
    /// Outcome counts to compare, ascending; the gap is measured against
    /// the smallest.
    pub ns: Vec<usize>,
    pub optimizer: OptimizeOptions,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub resume: bool,
}

impl ScanConfig {
    pub fn new(dims: (usize, usize), count: usize, seed: u64, out: PathBuf) -> Self {
        let d = dims.0.max(dims.1);
        Self {
            dims,
            rank: dims.0 * dims.1,
            count,
            ns: vec![d, d + 1],
            optimizer: OptimizeOptions::default(),
            seed,
            out,
            resume: false,
        }
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        let d = self.dims.0.max(self.dims.1);
        if self.count == 0 {
            return Err(ScanError::InvalidConfig("count must be >= 1".into()));
        }
        if self.ns.is_empty() {
            return Err(ScanError::InvalidConfig("ns must be nonempty".into()));
        }
        if self.ns.iter().any(|&n| n < d) {
            return Err(ScanError::InvalidConfig(format!(
                "every n must be >= max(d1, d2) = {d}"
            )));
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScanError::InvalidConfig(
                "ns must be strictly ascending".into(),
            ));
        }
        if self.rank == 0 || self.rank > self.dims.0 * self.dims.1 {
            return Err(ScanError::InvalidConfig(format!(
                "rank must lie in 1..={}",
                self.dims.0 * self.dims.1
            )));
        }
        Ok(())
    }

    /// Hash of the physics-relevant fields (everything but the output path
    /// and resume flag); guards resumed runs against config drift.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Best value found at one outcome count.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NResult {
    pub n: usize,
    pub coincidence: f64,
    pub residual: f64,
    pub classification: Classification,
    /// Both discrimination inequalities held at the best pair; recorded so
    /// the empirical frequency of the condition can be read off the stream.
    pub discrimination: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScanRecord {
    pub index: usize,
    pub sub_seed: u64,
    pub results: Vec<NResult>,
    /// `max_n C^(n) - C^(d)`; positive values beyond [`GAP_THRESHOLD`]
    /// contradict the minimal-outcome conjecture.
    pub gap: f64,
    pub wall_ms: f64,
}

impl ScanRecord {
    pub fn converged(&self) -> bool {
        self.results.iter().all(|r| r.converged)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScanSummary {
    pub count: usize,
    pub converged_count: usize,
    pub unconverged_count: usize,
    /// Gap statistics over converged records.
    pub max_gap: f64,
    pub mean_gap: f64,
    pub violation_count: usize,
    pub threshold: f64,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: u32,
    config_hash: String,
    config: serde_json::Value,
}

fn fold_records<'a, I>(records: I, seed: u64, config_hash: String) -> ScanSummary
where
    I: IntoIterator<Item = &'a ScanRecord>,
{
    let mut count = 0;
    let mut converged_count = 0;
    let mut max_gap = f64::NEG_INFINITY;
    let mut gap_sum = 0.0;
    let mut violation_count = 0;
    for record in records {
        count += 1;
        if record.converged() {
            converged_count += 1;
            max_gap = max_gap.max(record.gap);
            gap_sum += record.gap;
            if record.gap > GAP_THRESHOLD {
                violation_count += 1;
            }
        }
    }
    ScanSummary {
        count,
        converged_count,
        unconverged_count: count - converged_count,
        max_gap: if converged_count > 0 { max_gap } else { 0.0 },
        mean_gap: if converged_count > 0 {
            gap_sum / converged_count as f64
        } else {
            0.0
        },
        violation_count,
        threshold: GAP_THRESHOLD,
        seed,
        config_hash,
    }
}

/// Evaluates one sampled state at every configured outcome count. Larger
/// counts are warm-started from the best smaller-count frames (extended by
/// an identity block) so the chain inequality holds numerically.
pub fn scan_state(config: &ScanConfig, index: usize) -> Result<ScanRecord, ScanError> {
    scan_state_with_options(config, index, &config.optimizer)
}

fn scan_state_with_options(
    config: &ScanConfig,
    index: usize,
    optimizer: &OptimizeOptions,
) -> Result<ScanRecord, ScanError> {
    let start = Instant::now();
    let sub_seed = derive_seed(config.seed, index as u64);
    let rho = random_density(config.dims.0, config.dims.1, config.rank, sub_seed)?;
    let mut results = Vec::with_capacity(config.ns.len());
    let mut warm: Option<(crate::linalg::CMatrix, crate::linalg::CMatrix)> = None;
    for &n in &config.ns {
        let options = OptimizeOptions {
            seed: derive_seed(sub_seed, n as u64),
            ..optimizer.clone()
        };
        let starts = match &warm {
            Some((x, y)) => vec![extend_frames(x, y, n)],
            None => vec![],
        };
        let result = optimize_coincidence_seeded(&rho, n, &options, &starts)?;
        results.push(NResult {
            n,
            coincidence: result.coincidence,
            residual: result.extremality_residual,
            classification: result.classification,
            discrimination: result.corollary_local_max,
            converged: result.converged && result.extremality_residual <= CONVERGENCE_RESIDUAL,
        });
        warm = Some((result.frame_x, result.frame_y));
    }
    let base = results[0].coincidence;
    let gap = results
        .iter()
        .map(|r| r.coincidence - base)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ScanRecord {
        index,
        sub_seed,
        results,
        gap,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn read_existing(path: &Path, expected_hash: &str) -> Result<Vec<ScanRecord>, ScanError> {
    let file = File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| ScanError::MissingHeader(path.to_path_buf()))??;
    let header: Header = serde_json::from_str(&header_line)?;
    if header.schema != SCHEMA_VERSION {
        return Err(ScanError::SchemaVersion(header.schema));
    }
    if header.config_hash != expected_hash {
        return Err(ScanError::ConfigMismatch {
            expected: expected_hash.to_string(),
            found: header.config_hash,
        });
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ScanRecord>(&line) {
            Ok(record) => records.push(record),
            Err(err) => {
                eprintln!(
                    "warning: skipping corrupt record at {}:{}: {err}",
                    path.display(),
                    lineno + 2
                );
            }
        }
    }
    Ok(records)
}

/// Runs (or resumes) a scan, appending one JSONL record per state and
/// flushing after each write. Gap candidates above [`GAP_THRESHOLD`] are
/// re-run with 10x restarts before being recorded.
pub fn run_scan(config: &ScanConfig) -> Result<ScanSummary, ScanError> {
    config.validate()?;
    let hash = config.hash();

    let mut records: Vec<ScanRecord> = Vec::new();
    let mut file = if config.resume && config.out.exists() {
        records = read_existing(&config.out, &hash)?;
        OpenOptions::new().append(true).open(&config.out)?
    } else {
        let mut f = File::create(&config.out)?;
        let header = Header {
            schema: SCHEMA_VERSION,
            config_hash: hash.clone(),
            config: serde_json::to_value(config)?,
        };
        serde_json::to_writer(&mut f, &header)?;
        f.write_all(b"\n")?;
        f.flush()?;
        f
    };

    let done: std::collections::BTreeSet<usize> = records.iter().map(|r| r.index).collect();
    let pending: Vec<usize> = (0..config.count).filter(|i| !done.contains(i)).collect();

    let chunk_size = (4 * rayon::current_num_threads()).max(1);
    for chunk in pending.chunks(chunk_size) {
        let mut batch: Vec<ScanRecord> = chunk
            .par_iter()
            .map(|&index| {
                let record = scan_state(config, index)?;
                if record.gap > GAP_THRESHOLD {
                    // Candidate violation: retry harder before reporting.
                    let boosted = OptimizeOptions {
                        restarts: config.optimizer.restarts * 10,
                        ..config.optimizer.clone()
                    };
                    scan_state_with_options(config, index, &boosted)
                } else {
                    Ok(record)
                }
            })
            .collect::<Result<_, ScanError>>()?;
        batch.sort_by_key(|r| r.index);
        for record in batch {
            serde_json::to_writer(&mut file, &record)?;
            file.write_all(b"\n")?;
            file.flush()?;
            records.push(record);
        }
    }
    Ok(fold_records(records.iter(), config.seed, hash))
}

/// Recomputes the summary from a record file; corrupt lines are reported
/// with their line number and skipped.
pub fn summarize(path: &Path) -> Result<ScanSummary, ScanError> {
    let file = File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| ScanError::MissingHeader(path.to_path_buf()))??;
    let header: Header = serde_json::from_str(&header_line)?;
    if header.schema != SCHEMA_VERSION {
        return Err(ScanError::SchemaVersion(header.schema));
    }
    let seed = header
        .config
        .get("seed")
        .and_then(serde_json::Value::as_u64)
        .unwrap_or(0);
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ScanRecord>(&line) {
            Ok(record) => records.push(record),
            Err(err) => {
                eprintln!(
                    "warning: skipping corrupt record at {}:{}: {err}",
                    path.display(),
                    lineno + 2
                );
            }
        }
    }
    Ok(fold_records(records.iter(), seed, header.config_hash))
}
