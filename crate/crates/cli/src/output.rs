use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use membench::device::{DeviceProfile, LevelName};
use membench::report::{emit_csv, emit_json, parse_csv, parse_json, RunRecord, Suite, SCHEMA_VERSION};
use membench::stream::StreamMode;

use crate::config::Settings;

/// Writes `<out>/<stem>.csv` and/or `.json`. Returns the written paths.
pub fn write_records(settings: &Settings, stem: &str, records: &[RunRecord]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&settings.out).with_context(|| format!("cannot create {}", settings.out.display()))?;
    let mut written = Vec::new();
    if settings.format.csv() {
        let p = settings.out.join(format!("{stem}.csv"));
        fs::write(&p, emit_csv(records)?).with_context(|| format!("cannot write {}", p.display()))?;
        written.push(p);
    }
    if settings.format.json() {
        let p = settings.out.join(format!("{stem}.json"));
        fs::write(&p, emit_json(records)?).with_context(|| format!("cannot write {}", p.display()))?;
        written.push(p);
    }
    Ok(written)
}

#[derive(Debug, Default, Serialize)]
pub struct Notes {
    pub skipped: Vec<String>,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub baselines: Vec<BaselineNote>,
}

#[derive(Debug, Serialize)]
pub struct BaselineNote {
    pub threads: usize,
    pub bandwidth_bps: f64,
    pub source: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    command: &'a str,
    timestamp: String,
    device: Option<&'a DeviceProfile>,
    clock_resolution_s: f64,
    settings: &'a Settings,
    notes: &'a Notes,
}

pub fn write_manifest(
    settings: &Settings,
    command: &str,
    device: Option<&DeviceProfile>,
    clock_resolution_s: f64,
    notes: &Notes,
) -> Result<PathBuf> {
    fs::create_dir_all(&settings.out)?;
    let m = Manifest {
        schema_version: SCHEMA_VERSION,
        command,
        timestamp: chrono::Local::now().to_rfc3339(),
        device,
        clock_resolution_s,
        settings,
        notes,
    };
    let p = settings.out.join(format!("{command}.manifest.json"));
    fs::write(&p, serde_json::to_vec_pretty(&m)?)?;
    Ok(p)
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let records = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => parse_csv(&bytes),
        Some("json") => parse_json(&bytes),
        _ => bail!("{}: expected a .csv or .json result file", path.display()),
    }
    .with_context(|| format!("cannot parse {}", path.display()))?;
    Ok(records)
}

/// Best DRAM bandwidth among unscaled STREAM records with `threads` threads.
pub fn baseline_from_records(records: &[RunRecord], threads: usize) -> Option<f64> {
    records
        .iter()
        .filter(|r| r.suite == Suite::Stream && r.threads == threads as u64)
        .filter(|r| matches!(r.stream_key(), Some((_, LevelName::Dram, StreamMode::Threaded))))
        .filter_map(|r| r.baseline_bps)
        .max_by(f64::total_cmp)
}

/// `<out>/stream.csv` or `<out>/stream.json`, whichever exists.
pub fn default_stream_file(out: &Path) -> Option<PathBuf> {
    ["stream.csv", "stream.json"].iter().map(|f| out.join(f)).find(|p| p.is_file())
}
