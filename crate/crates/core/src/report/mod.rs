//! Flat run records, their CSV/JSON serialization and SVG charts.
//!
//! CSV header (fixed):
//!
//! ```text
//! suite,variant,device,n,w,h,c,f,blk,threads,best_s,median_s,bytes_moved,baseline_Bps,utilization,speedup,schema_version
//! ```
//!
//! Parameters that do not apply to a suite are left empty. For `stream`
//! records `variant` is `KIND@LEVEL:mode`, `bytes_moved` is the traffic of
//! one timed sample and `baseline_Bps` is the measured (core-scaled)
//! bandwidth, i.e. the value later used as a utilization baseline.

mod chart;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::LevelName;
use crate::stream::{BandwidthMeasurement, StreamKind, StreamMode};
use crate::timing::TimingStats;

pub use chart::{render_chart, sig3, Bar, BarGroup, ChartMetric, ChartSpec};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str = "suite,variant,device,n,w,h,c,f,blk,threads,best_s,median_s,bytes_moved,baseline_Bps,utilization,speedup,schema_version";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no records to emit")]
    Empty,
    #[error("record {index} ({variant}): {field} is not finite")]
    NonFinite {
        index: usize,
        variant: String,
        field: &'static str,
    },
    #[error("cannot render chart: {0}")]
    Render(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Stream,
    Transpose,
    Blur,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Stream => "stream",
            Suite::Transpose => "transpose",
            Suite::Blur => "blur",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub suite: Suite,
    pub variant: String,
    pub device: String,
    pub n: Option<u64>,
    pub w: Option<u64>,
    pub h: Option<u64>,
    pub c: Option<u64>,
    pub f: Option<u64>,
    pub blk: Option<u64>,
    pub threads: u64,
    pub best_s: f64,
    pub median_s: f64,
    pub bytes_moved: Option<u64>,
    #[serde(rename = "baseline_Bps")]
    pub baseline_bps: Option<f64>,
    pub utilization: Option<f64>,
    pub speedup: Option<f64>,
    pub schema_version: u32,
}

impl RunRecord {
    pub fn new(suite: Suite, variant: impl Into<String>, device: impl Into<String>, threads: usize, timing: &TimingStats) -> Self {
        RunRecord {
            suite,
            variant: variant.into(),
            device: device.into(),
            n: None,
            w: None,
            h: None,
            c: None,
            f: None,
            blk: None,
            threads: threads as u64,
            best_s: timing.best(),
            median_s: timing.median(),
            bytes_moved: None,
            baseline_bps: None,
            utilization: None,
            speedup: None,
            schema_version: SCHEMA_VERSION,
        }
    }

    pub fn from_stream(m: &BandwidthMeasurement, device: &str) -> Self {
        let mut r = RunRecord::new(
            Suite::Stream,
            stream_variant(m.kind, m.level.label, m.mode),
            device,
            m.threads,
            &m.timing,
        );
        r.n = Some(m.n_elems as u64);
        r.bytes_moved = Some(m.kind.bytes_per_iter() * m.n_elems as u64 * m.passes as u64);
        r.baseline_bps = Some(m.best_bandwidth);
        r
    }

    /// `(kind, level, mode)` of a stream record, parsed from its variant label.
    pub fn stream_key(&self) -> Option<(StreamKind, LevelName, StreamMode)> {
        if self.suite != Suite::Stream {
            return None;
        }
        let (kind, rest) = self.variant.split_once('@')?;
        let (level, mode) = rest.split_once(':')?;
        Some((StreamKind::parse(kind)?, LevelName::parse(level)?, StreamMode::parse(mode)?))
    }

    fn check_finite(&self, index: usize) -> Result<(), ReportError> {
        let fields = [
            ("best_s", Some(self.best_s)),
            ("median_s", Some(self.median_s)),
            ("baseline_Bps", self.baseline_bps),
            ("utilization", self.utilization),
            ("speedup", self.speedup),
        ];
        for (field, value) in fields {
            if let Some(v) = value {
                if !v.is_finite() {
                    return Err(ReportError::NonFinite {
                        index,
                        variant: self.variant.clone(),
                        field,
                    });
                }
            }
        }
        Ok(())
    }
}

pub fn stream_variant(kind: StreamKind, level: LevelName, mode: StreamMode) -> String {
    format!("{}@{}:{}", kind, level, mode.as_str())
}

fn validate(records: &[RunRecord]) -> Result<(), ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    records.iter().enumerate().try_for_each(|(i, r)| r.check_finite(i))
}

pub fn emit_csv(records: &[RunRecord]) -> Result<Vec<u8>, ReportError> {
    validate(records)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| ReportError::Render(e.to_string()))
}

pub fn emit_json(records: &[RunRecord]) -> Result<Vec<u8>, ReportError> {
    validate(records)?;
    let mut out = serde_json::to_vec_pretty(records)?;
    out.push(b'\n');
    Ok(out)
}

fn check_schema(records: &[RunRecord]) -> Result<(), ReportError> {
    match records.iter().find(|r| r.schema_version != SCHEMA_VERSION) {
        Some(r) => Err(ReportError::Schema(r.schema_version)),
        None => Ok(()),
    }
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<RunRecord>, ReportError> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let records = rdr.deserialize().collect::<Result<Vec<RunRecord>, _>>()?;
    check_schema(&records)?;
    Ok(records)
}

pub fn parse_json(bytes: &[u8]) -> Result<Vec<RunRecord>, ReportError> {
    let records: Vec<RunRecord> = serde_json::from_slice(bytes)?;
    check_schema(&records)?;
    Ok(records)
}
