//! Report structures and writers.
//!
//! `report.json` is fully deterministic for a fixed config, seed and version;
//! wall-clock data (timestamp, per-point runtimes) is isolated in a sibling
//! `timing.json` so reports stay byte-comparable. `series.csv` is the long-
//! format data contract: experiment, h, t, quantity, value.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::rate::RateFit;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub h: f64,
    pub error: f64,
    #[serde(default)]
    pub norms: BTreeMap<String, f64>,
    /// seam-mass wrap diagnostic (meaningful for localized data)
    pub wrap_diag: f64,
    /// set when the point was excluded from the fit, with the reason
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excluded: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// comparison the check applies: "<=", ">=" ...
    pub op: String,
    pub passed: bool,
}

impl CheckLine {
    pub fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, op: "<=".into(), passed: value <= threshold }
    }

    pub fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, op: ">=".into(), passed: value >= threshold }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub artifact_version: String,
    pub experiment: String,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub points: Vec<SweepPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    /// recorded empirical constants, keyed by name
    pub constants: BTreeMap<String, f64>,
    /// arguments attaining recorded constants and other structured extras
    pub details: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<CheckLine>,
    pub degenerate: bool,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: config.experiment.name().to_string(),
            config: config.clone(),
            horizon: None,
            points: Vec::new(),
            fit: None,
            constants: BTreeMap::new(),
            details: BTreeMap::new(),
            checks: Vec::new(),
            degenerate: false,
            passed: false,
            notes: Vec::new(),
        }
    }

    pub fn finalize(&mut self) {
        self.passed = !self.degenerate && self.checks.iter().all(|c| c.passed);
    }

    pub fn write(&self, dir: &Path) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("report_{}.json", self.experiment));
        let mut f = std::fs::File::create(&path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(path)
    }
}

/// One long-format series row.
#[derive(Clone, Debug)]
pub struct SeriesRow {
    pub experiment: String,
    pub h: f64,
    pub t: f64,
    pub quantity: String,
    pub value: f64,
}

pub fn write_series(dir: &Path, rows: &[SeriesRow]) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("series.csv");
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "experiment,h,t,quantity,value")?;
    for r in rows {
        writeln!(f, "{},{},{},{},{}", r.experiment, r.h, r.t, r.quantity, r.value)?;
    }
    Ok(path)
}

/// Appends rows to an existing series file (creating it with a header).
pub fn append_series(dir: &Path, rows: &[SeriesRow]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("series.csv");
    let fresh = !path.exists();
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(&path)?;
    if fresh {
        writeln!(f, "experiment,h,t,quantity,value")?;
    }
    for r in rows {
        writeln!(f, "{},{},{},{},{}", r.experiment, r.h, r.t, r.quantity, r.value)?;
    }
    Ok(())
}

/// Wall-clock data, isolated from the deterministic report.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Timing {
    pub timestamp_unix_s: u64,
    pub wall_s: BTreeMap<String, f64>,
}

impl Timing {
    pub fn now() -> Self {
        let timestamp_unix_s = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self { timestamp_unix_s, wall_s: BTreeMap::new() }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("timing.json"))?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Index linking the reports of a suite run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BundleIndex {
    pub schema_version: u32,
    pub reports: Vec<BundleEntry>,
    pub partial: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BundleEntry {
    pub experiment: String,
    pub path: String,
    pub passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BundleIndex {
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("bundle.json"))?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}
