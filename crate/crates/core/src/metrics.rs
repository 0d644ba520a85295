//! Speedup over the naive variant and relative memory-bandwidth utilization.
//!
//! Utilization is `(bytes_moved / elapsed) / stream_baseline`. The numerator
//! uses compulsory-traffic models: every datum crosses the DRAM boundary once
//! per logical pass, with no write-allocate or conflict-miss traffic. Values
//! above 1 are kept as-is and flagged; they mean the working set was served
//! from cache or the model undercounts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::LevelName;
use crate::stream::{BandwidthMeasurement, StreamKind};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("no DRAM STREAM measurement with {threads} thread(s) is available as a baseline")]
    NoBaseline { threads: usize },
}

fn positive(what: &'static str, value: f64) -> Result<f64, MetricsError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(MetricsError::NonPositive { what, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Workload {
    Transpose { n: u64 },
    BlurSeparable { w: u64, h: u64, c: u64, f: u64 },
    Stream { kind: StreamKind, n: u64 },
}

/// Modeled DRAM traffic of one run of `workload`, in bytes.
pub fn bytes_moved(workload: Workload) -> u64 {
    match workload {
        // each f64 read once and written once
        Workload::Transpose { n } => 2 * 8 * n * n,
        // two passes, each streams the f32 image in and out once; f does
        // not change compulsory traffic
        Workload::BlurSeparable { w, h, c, .. } => 2 * (2 * w * h * c * 4),
        Workload::Stream { kind, n } => kind.bytes_per_iter() * n,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilizationRecord {
    pub label: String,
    pub elapsed: f64,
    pub bytes_moved: u64,
    pub stream_baseline: f64,
    pub utilization: f64,
    pub overflow: bool,
}

pub fn utilization(
    label: impl Into<String>,
    bytes: u64,
    elapsed: f64,
    baseline: f64,
) -> Result<UtilizationRecord, MetricsError> {
    positive("elapsed time", elapsed)?;
    positive("STREAM baseline", baseline)?;
    if bytes == 0 {
        return Err(MetricsError::NonPositive {
            what: "bytes moved",
            value: 0.0,
        });
    }
    let value = (bytes as f64 / elapsed) / baseline;
    Ok(UtilizationRecord {
        label: label.into(),
        elapsed,
        bytes_moved: bytes,
        stream_baseline: baseline,
        utilization: value,
        overflow: value > 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRecord {
    pub label: String,
    pub t_naive: f64,
    pub t_variant: f64,
    pub speedup: f64,
}

pub fn speedup(label: impl Into<String>, t_naive: f64, t_variant: f64) -> Result<SpeedupRecord, MetricsError> {
    positive("naive time", t_naive)?;
    positive("variant time", t_variant)?;
    Ok(SpeedupRecord {
        label: label.into(),
        t_naive,
        t_variant,
        speedup: t_naive / t_variant,
    })
}

/// The utilization denominator: the best of the four STREAM kernels at DRAM
/// level, measured with the same thread count as the kernel it scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamBaseline {
    pub bandwidth: f64,
    pub kind: StreamKind,
    pub threads: usize,
}

pub fn select_baseline(measurements: &[BandwidthMeasurement], threads: usize) -> Result<StreamBaseline, MetricsError> {
    measurements
        .iter()
        .filter(|m| m.level.label == LevelName::Dram && m.threads == threads && m.scaled_by_cores == 1)
        .max_by(|a, b| a.best_bandwidth.total_cmp(&b.best_bandwidth))
        .map(|m| StreamBaseline {
            bandwidth: m.best_bandwidth,
            kind: m.kind,
            threads,
        })
        .ok_or(MetricsError::NoBaseline { threads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::MemoryLevel;
    use crate::stream::StreamMode;
    use crate::timing::TimingStats;
    use proptest::prelude::*;

    #[test]
    fn reference_models() {
        assert_eq!(bytes_moved(Workload::Transpose { n: 8192 }), 1_073_741_824);
        assert_eq!(
            bytes_moved(Workload::BlurSeparable {
                w: 2544,
                h: 2027,
                c: 3,
                f: 19
            }),
            // 2 * 2 * 2544 * 2027 * 3 * 4
            247_521_024
        );
        assert_eq!(
            bytes_moved(Workload::Stream {
                kind: StreamKind::Copy,
                n: 1000
            }),
            16_000
        );
    }

    #[test]
    fn utilization_values() {
        let r = utilization("x", 1_000_000_000, 1.0, 2e9).unwrap();
        assert_eq!(r.utilization, 0.5);
        assert!(!r.overflow);
        let r = utilization("x", 4_000, 2.0, 2_000.0).unwrap();
        assert_eq!(r.utilization, 1.0);
        assert!(!r.overflow);
        let r = utilization("x", 8_000, 1.0, 2_000.0).unwrap();
        assert_eq!(r.utilization, 4.0);
        assert!(r.overflow);
    }

    #[test]
    fn utilization_rejects_bad_time() {
        assert!(utilization("x", 10, 0.0, 1.0).is_err());
        assert!(utilization("x", 10, -1.0, 1.0).is_err());
        assert!(utilization("x", 10, f64::NAN, 1.0).is_err());
        assert!(utilization("x", 10, 1.0, 0.0).is_err());
    }

    #[test]
    fn speedup_values() {
        assert_eq!(speedup("v", 10.0, 2.0).unwrap().speedup, 5.0);
        assert_eq!(speedup("v", 3.0, 3.0).unwrap().speedup, 1.0);
        assert_eq!(speedup("v", 1.0, 4.0).unwrap().speedup, 0.25);
        assert!(speedup("v", 0.0, 1.0).is_err());
        assert!(speedup("v", 1.0, -1.0).is_err());
    }

    fn meas(kind: StreamKind, label: LevelName, threads: usize, scaled: usize, bw: f64) -> BandwidthMeasurement {
        BandwidthMeasurement {
            kind,
            level: MemoryLevel {
                label,
                capacity: 1 << 30,
                shared: scaled == 1,
            },
            mode: if scaled == 1 {
                StreamMode::Threaded
            } else {
                StreamMode::SequentialScaled
            },
            n_elems: 10,
            threads,
            passes: 1,
            best_bandwidth: bw,
            scaled_by_cores: scaled,
            timing: TimingStats::from_samples(vec![1.0]).unwrap(),
        }
    }

    #[test]
    fn baseline_is_max_of_matching_dram_runs() {
        let ms = vec![
            meas(StreamKind::Copy, LevelName::Dram, 4, 1, 10.0),
            meas(StreamKind::Triad, LevelName::Dram, 4, 1, 12.0),
            meas(StreamKind::Sum, LevelName::Dram, 1, 1, 5.0),
            meas(StreamKind::Copy, LevelName::L1, 1, 4, 400.0),
            meas(StreamKind::Scale, LevelName::L2, 4, 1, 100.0),
        ];
        let b = select_baseline(&ms, 4).unwrap();
        assert_eq!((b.bandwidth, b.kind), (12.0, StreamKind::Triad));
        assert_eq!(select_baseline(&ms, 1).unwrap().bandwidth, 5.0);
        assert_eq!(select_baseline(&ms, 2), Err(MetricsError::NoBaseline { threads: 2 }));
    }

    proptest! {
        #[test]
        fn utilization_is_homogeneous(bytes in 1u64..1 << 40, t in 1e-6f64..100.0, s in 1e3f64..1e12, k in 1u64..64) {
            let a = utilization("a", bytes, t, s).unwrap().utilization;
            let b = utilization("b", bytes * k, t, s * k as f64).unwrap().utilization;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn speedup_antisymmetric(a in 1e-9f64..1e3, b in 1e-9f64..1e3) {
            let p = speedup("", a, b).unwrap().speedup * speedup("", b, a).unwrap().speedup;
            prop_assert!((p - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn models_are_monotone(n in 1u64..100_000, w in 1u64..5000, h in 1u64..5000, c in 1u64..4) {
            let tr = |n| bytes_moved(Workload::Transpose { n });
            prop_assert!(tr(n + 1) > tr(n));
            let blur = |w, h, c| bytes_moved(Workload::BlurSeparable { w, h, c, f: 3 });
            prop_assert!(blur(w + 1, h, c) > blur(w, h, c));
            prop_assert!(blur(w, h + 1, c) > blur(w, h, c));
            prop_assert!(blur(w, h, c + 1) > blur(w, h, c));
            for kind in StreamKind::ALL {
                let st = |n| bytes_moved(Workload::Stream { kind, n });
                prop_assert!(st(n + 1) > st(n));
            }
        }
    }
}
