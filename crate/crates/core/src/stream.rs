//! STREAM COPY/SCALE/SUM/TRIAD kernels and the memory-hierarchy sweep.
//!
//! Each level of a [`DeviceProfile`] is exercised with arrays sized so the
//! working set lives in that level: at least 4x the next-faster level and at
//! most half of the target level. Shared levels run with every core; private
//! levels run on one core and the result is multiplied by the core count.

use std::alloc::{self, Layout};
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Barrier;
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{DeviceProfile, LevelName, MemoryLevel};
use crate::parallel::static_ranges;
use crate::timing::{measure, RepetitionPolicy, TimingError, TimingStats};

const ELEM_BYTES: u64 = std::mem::size_of::<f64>() as u64;

/// Minimum traffic per timed sample. Small (L1-sized) arrays are swept
/// several times per sample so a sample is well above clock resolution.
pub const MIN_BYTES_PER_SAMPLE: u64 = 4 << 20;

/// Working-set cap used for DRAM when the profile declares no caches.
pub const DRAM_ONLY_WORKING_SET: u64 = 64 << 20;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("{kind} verification failed at index {index}: got {got}, expected {expected}")]
    Verification {
        kind: StreamKind,
        index: usize,
        got: f64,
        expected: f64,
    },
    #[error("cannot allocate {bytes} bytes for STREAM arrays")]
    Allocation { bytes: u64 },
    #[error("no array size fits {level}: working set must be >= {lower} B (4x {faster}) and <= {upper} B (half of {level})")]
    Sizing {
        level: LevelName,
        faster: String,
        lower: u64,
        upper: u64,
    },
    #[error("level {0} is not part of the device profile")]
    UnknownLevel(LevelName),
    #[error("invalid STREAM parameters: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Timing(#[from] TimingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StreamKind {
    Copy,
    Scale,
    Sum,
    Triad,
}

impl StreamKind {
    pub const ALL: [StreamKind; 4] = [StreamKind::Copy, StreamKind::Scale, StreamKind::Sum, StreamKind::Triad];

    pub fn bytes_per_iter(self) -> u64 {
        match self {
            StreamKind::Copy | StreamKind::Scale => 16,
            StreamKind::Sum | StreamKind::Triad => 24,
        }
    }

    pub fn flops_per_iter(self) -> u64 {
        match self {
            StreamKind::Copy => 0,
            StreamKind::Scale | StreamKind::Sum => 1,
            StreamKind::Triad => 2,
        }
    }

    /// Arrays the kernel touches.
    pub fn arrays(self) -> u64 {
        self.bytes_per_iter() / ELEM_BYTES
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StreamKind::Copy => "COPY",
            StreamKind::Scale => "SCALE",
            StreamKind::Sum => "SUM",
            StreamKind::Triad => "TRIAD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// The value `a[i]` must hold after the kernel ran.
    #[inline]
    pub fn expected(self, b: f64, c: f64, d: f64) -> f64 {
        match self {
            StreamKind::Copy => b,
            StreamKind::Scale => d * b,
            StreamKind::Sum => b + c,
            StreamKind::Triad => b + d * c,
        }
    }

    #[inline]
    fn apply(self, a: &mut [f64], b: &[f64], c: &[f64], d: f64) {
        match self {
            StreamKind::Copy => a.copy_from_slice(b),
            StreamKind::Scale => {
                for (x, &y) in a.iter_mut().zip(b) {
                    *x = d * y;
                }
            }
            StreamKind::Sum => {
                for ((x, &y), &z) in a.iter_mut().zip(b).zip(c) {
                    *x = y + z;
                }
            }
            StreamKind::Triad => {
                for ((x, &y), &z) in a.iter_mut().zip(b).zip(c) {
                    *x = y + d * z;
                }
            }
        }
    }
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Initial values of the STREAM arrays. All distinct and nonzero so the
/// verification can tell which array a value came from, and chosen so every
/// kernel result is exactly representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamInit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Default for StreamInit {
    fn default() -> Self {
        StreamInit {
            a: 1.0,
            b: 2.0,
            c: 0.5,
            d: 3.0,
        }
    }
}

/// The `a`, `b`, `c` vectors and the scalar `d`.
#[derive(Debug)]
pub struct StreamArrays {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
}

impl StreamArrays {
    /// Allocates zeroed arrays; pages are not touched until initialization.
    pub fn allocate(n: usize, d: f64) -> Result<Self, StreamError> {
        if n == 0 {
            return Err(StreamError::Invalid("array length must be at least 1"));
        }
        Ok(StreamArrays {
            a: zeroed_vec(n)?,
            b: zeroed_vec(n)?,
            c: zeroed_vec(n)?,
            d,
        })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Checks every `a[i]` against the kernel's defining formula.
    pub fn verify(&self, kind: StreamKind) -> Result<(), StreamError> {
        for (i, ((&a, &b), &c)) in self.a.iter().zip(&self.b).zip(&self.c).enumerate() {
            let expected = kind.expected(b, c, self.d);
            if a != expected {
                return Err(StreamError::Verification {
                    kind,
                    index: i,
                    got: a,
                    expected,
                });
            }
        }
        Ok(())
    }
}

fn zeroed_vec(n: usize) -> Result<Vec<f64>, StreamError> {
    let bytes = n as u64 * ELEM_BYTES;
    let layout = Layout::array::<f64>(n).map_err(|_| StreamError::Allocation { bytes })?;
    // SAFETY: layout has nonzero size (n >= 1); all-zero bits are a valid f64;
    // the pointer comes from the global allocator with the layout Vec expects.
    unsafe {
        let ptr = alloc::alloc_zeroed(layout) as *mut f64;
        if ptr.is_null() {
            return Err(StreamError::Allocation { bytes });
        }
        Ok(Vec::from_raw_parts(ptr, n, n))
    }
}

/// Raw outcome of one timed STREAM kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRun {
    pub kind: StreamKind,
    pub n_elems: usize,
    pub threads: usize,
    /// Full sweeps over the arrays per timed sample.
    pub passes: usize,
    pub timing: TimingStats,
    /// Bytes per second from the best sample.
    pub bandwidth: f64,
}

impl StreamRun {
    pub fn bytes_per_sample(&self) -> u64 {
        self.kind.bytes_per_iter() * self.n_elems as u64 * self.passes as u64
    }
}

pub fn passes_for(kind: StreamKind, n: usize) -> usize {
    let per_pass = kind.bytes_per_iter() * n as u64;
    MIN_BYTES_PER_SAMPLE.div_ceil(per_pass.max(1)).max(1) as usize
}

/// Runs one STREAM kernel with the default array initialization.
pub fn run_stream_test(
    kind: StreamKind,
    n_elems: usize,
    threads: usize,
    policy: &RepetitionPolicy,
) -> Result<StreamRun, StreamError> {
    run_stream_test_with(kind, n_elems, threads, policy, StreamInit::default()).map(|(run, _)| run)
}

/// Runs one STREAM kernel and returns the arrays it left behind, already
/// verified against the defining formula.
pub fn run_stream_test_with(
    kind: StreamKind,
    n_elems: usize,
    threads: usize,
    policy: &RepetitionPolicy,
    init: StreamInit,
) -> Result<(StreamRun, StreamArrays), StreamError> {
    if threads == 0 {
        return Err(StreamError::Invalid("threads must be at least 1"));
    }
    policy.validate()?;
    let mut arrays = StreamArrays::allocate(n_elems, init.d)?;
    let passes = passes_for(kind, n_elems);
    let timing = if threads == 1 {
        run_sequential(kind, &mut arrays, init, passes, policy)?
    } else {
        run_threaded(kind, &mut arrays, init, threads, passes, policy)?
    };
    arrays.verify(kind)?;
    let bytes = kind.bytes_per_iter() as f64 * n_elems as f64 * passes as f64;
    let run = StreamRun {
        kind,
        n_elems,
        threads,
        passes,
        bandwidth: bytes / timing.best(),
        timing,
    };
    Ok((run, arrays))
}

fn fill(a: &mut [f64], b: &mut [f64], c: &mut [f64], init: StreamInit) {
    a.fill(init.a);
    b.fill(init.b);
    c.fill(init.c);
}

fn run_sequential(
    kind: StreamKind,
    arrays: &mut StreamArrays,
    init: StreamInit,
    passes: usize,
    policy: &RepetitionPolicy,
) -> Result<TimingStats, StreamError> {
    let StreamArrays { a, b, c, d } = arrays;
    fill(a, b, c, init);
    let d = *d;
    let stats = measure(
        || {
            for _ in 0..passes {
                kind.apply(a, b, c, d);
                std::hint::black_box(&mut *a);
            }
        },
        policy,
    )?;
    Ok(stats)
}

/// A persistent worker team, one contiguous chunk per worker. The main thread
/// reads the clock, releases the team through a barrier and stops the clock
/// after a second barrier that every worker reaches when done.
fn run_threaded(
    kind: StreamKind,
    arrays: &mut StreamArrays,
    init: StreamInit,
    threads: usize,
    passes: usize,
    policy: &RepetitionPolicy,
) -> Result<TimingStats, StreamError> {
    let d = arrays.d;
    let ranges = static_ranges(arrays.len(), threads);
    let barrier = Barrier::new(threads + 1);
    let done = AtomicBool::new(false);

    thread::scope(|s| {
        let (mut a_rest, mut b_rest, mut c_rest) = (&mut arrays.a[..], &mut arrays.b[..], &mut arrays.c[..]);
        for r in &ranges {
            let (a, at) = std::mem::take(&mut a_rest).split_at_mut(r.len());
            let (b, bt) = std::mem::take(&mut b_rest).split_at_mut(r.len());
            let (c, ct) = std::mem::take(&mut c_rest).split_at_mut(r.len());
            a_rest = at;
            b_rest = bt;
            c_rest = ct;
            let barrier = &barrier;
            let done = &done;
            s.spawn(move || {
                // first touch from the thread that will stream the chunk
                fill(a, b, c, init);
                barrier.wait();
                loop {
                    barrier.wait();
                    if done.load(Ordering::Acquire) {
                        break;
                    }
                    for _ in 0..passes {
                        kind.apply(a, b, c, d);
                        std::hint::black_box(&mut *a);
                    }
                    barrier.wait();
                }
            });
        }
        barrier.wait();
        let stats = measure(
            || {
                barrier.wait();
                barrier.wait();
            },
            policy,
        );
        done.store(true, Ordering::Release);
        barrier.wait();
        stats
    })
    .map_err(StreamError::from)
}

/// Element count whose working set places the kernel in `level`.
pub fn size_for_level(level: LevelName, device: &DeviceProfile, kind: StreamKind) -> Result<usize, StreamError> {
    let target = device.level(level).ok_or(StreamError::UnknownLevel(level))?;
    let per_elem = kind.arrays() * ELEM_BYTES;
    let upper = target.capacity / 2;
    let (faster, lower) = if level.is_cache() {
        match device.faster_than(level) {
            Some(f) => (f.label.to_string(), 4 * f.capacity),
            None => ("nothing".to_string(), 0),
        }
    } else {
        match device.largest_cache() {
            Some(f) => (f.label.to_string(), 4 * f.capacity),
            None => ("nothing".to_string(), 0),
        }
    };
    let n_min = lower.div_ceil(per_elem).max(1);
    let n_max = upper / per_elem;
    if n_min > n_max {
        return Err(StreamError::Sizing {
            level,
            faster,
            lower,
            upper,
        });
    }
    let n = if !level.is_cache() {
        if device.largest_cache().is_some() {
            n_min
        } else {
            n_max.min(DRAM_ONLY_WORKING_SET / per_elem).max(1)
        }
    } else {
        n_max
    };
    Ok(n as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamMode {
    Threaded,
    SequentialScaled,
}

impl StreamMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StreamMode::Threaded => "threaded",
            StreamMode::SequentialScaled => "sequential_scaled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "threaded" => Some(StreamMode::Threaded),
            "sequential_scaled" => Some(StreamMode::SequentialScaled),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthMeasurement {
    pub kind: StreamKind,
    pub level: MemoryLevel,
    pub mode: StreamMode,
    pub n_elems: usize,
    pub threads: usize,
    pub passes: usize,
    /// Bytes per second, multiplied by `scaled_by_cores`.
    pub best_bandwidth: f64,
    pub scaled_by_cores: usize,
    pub timing: TimingStats,
}

impl BandwidthMeasurement {
    pub fn from_run(run: StreamRun, level: MemoryLevel, mode: StreamMode, cores: usize) -> Self {
        let scaled_by_cores = match mode {
            StreamMode::Threaded => 1,
            StreamMode::SequentialScaled => cores,
        };
        BandwidthMeasurement {
            kind: run.kind,
            level,
            mode,
            n_elems: run.n_elems,
            threads: run.threads,
            passes: run.passes,
            best_bandwidth: run.bandwidth * scaled_by_cores as f64,
            scaled_by_cores,
            timing: run.timing,
        }
    }
}

/// Runs `kind` against `level` using the sweep's threading rule.
pub fn measure_level(
    device: &DeviceProfile,
    level: LevelName,
    kind: StreamKind,
    policy: &RepetitionPolicy,
) -> Result<BandwidthMeasurement, StreamError> {
    let lvl = *device.level(level).ok_or(StreamError::UnknownLevel(level))?;
    let n = size_for_level(level, device, kind)?;
    let (threads, mode) = if lvl.shared {
        (device.core_count, StreamMode::Threaded)
    } else {
        (1, StreamMode::SequentialScaled)
    };
    let run = run_stream_test(kind, n, threads, policy)?;
    Ok(BandwidthMeasurement::from_run(run, lvl, mode, device.core_count))
}

/// Single-core DRAM measurement, the baseline for sequential kernels.
pub fn measure_dram_single_core(
    device: &DeviceProfile,
    kind: StreamKind,
    policy: &RepetitionPolicy,
) -> Result<BandwidthMeasurement, StreamError> {
    let lvl = *device.dram().ok_or(StreamError::UnknownLevel(LevelName::Dram))?;
    let n = size_for_level(LevelName::Dram, device, kind)?;
    let run = run_stream_test(kind, n, 1, policy)?;
    Ok(BandwidthMeasurement::from_run(run, lvl, StreamMode::Threaded, 1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepFailure {
    pub level: LevelName,
    pub kind: StreamKind,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub measurements: Vec<BandwidthMeasurement>,
    pub failures: Vec<SweepFailure>,
    /// Soft-property violations worth showing to the user.
    pub warnings: Vec<String>,
}

impl SweepReport {
    pub fn failed_levels(&self) -> Vec<LevelName> {
        let mut v: Vec<LevelName> = self.failures.iter().map(|f| f.level).collect();
        v.dedup();
        v
    }
}

/// Measures all four kernels on every level of `device`. A failing level is
/// recorded and the sweep moves on.
pub fn run_hierarchy_sweep(device: &DeviceProfile, policy: &RepetitionPolicy) -> SweepReport {
    let mut report = SweepReport::default();
    for lvl in &device.levels {
        for kind in StreamKind::ALL {
            match measure_level(device, lvl.label, kind, policy) {
                Ok(m) => report.measurements.push(m),
                Err(e) => report.failures.push(SweepFailure {
                    level: lvl.label,
                    kind,
                    error: e.to_string(),
                }),
            }
        }
        let find = |k| {
            report
                .measurements
                .iter()
                .find(|m| m.level.label == lvl.label && m.kind == k)
        };
        if let (Some(copy), Some(scale)) = (find(StreamKind::Copy), find(StreamKind::Scale)) {
            let ratio = copy.best_bandwidth / scale.best_bandwidth;
            if !(0.8..=1.25).contains(&ratio) {
                report.warnings.push(format!(
                    "{}: COPY and SCALE bandwidths differ by more than 25% ({:.3e} vs {:.3e} B/s); machine may not be quiet",
                    lvl.label, copy.best_bandwidth, scale.best_bandwidth
                ));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    const KB: u64 = 1024;
    const MB: u64 = 1024 * 1024;

    fn lvl(label: LevelName, capacity: u64, shared: bool) -> MemoryLevel {
        MemoryLevel {
            label,
            capacity,
            shared,
        }
    }

    fn quick() -> RepetitionPolicy {
        RepetitionPolicy::new(1, 3).unwrap()
    }

    #[test]
    fn constants_table() {
        let table: Vec<_> = StreamKind::ALL
            .iter()
            .map(|k| (k.as_str(), k.bytes_per_iter(), k.flops_per_iter()))
            .collect();
        assert_eq!(
            table,
            vec![("COPY", 16, 0), ("SCALE", 16, 1), ("SUM", 24, 1), ("TRIAD", 24, 2)]
        );
    }

    #[test]
    fn triad_with_reference_inputs() {
        let init = StreamInit {
            a: 0.25,
            b: 1.0,
            c: 2.0,
            d: 3.0,
        };
        for threads in [1, 3] {
            let (_, arrays) = run_stream_test_with(StreamKind::Triad, 1000, threads, &quick(), init).unwrap();
            assert!(arrays.a.iter().all(|&x| x == 7.0));
        }
    }

    #[test]
    fn bandwidth_uses_best_sample() {
        let run = run_stream_test(StreamKind::Sum, 10_000, 1, &quick()).unwrap();
        let expected = 24.0 * 10_000.0 * run.passes as f64 / run.timing.best();
        assert_eq!(run.bandwidth, expected);
        assert_eq!(run.bytes_per_sample(), 24 * 10_000 * run.passes as u64);
    }

    #[test]
    fn sum_bandwidth_formula() {
        // 24 * 1e6 bytes in 1 ms
        let bytes = StreamKind::Sum.bytes_per_iter() as f64 * 1e6;
        assert_eq!(bytes / 1e-3, 2.4e10);
    }

    #[test]
    fn verification_catches_corruption() {
        let (_, mut arrays) = run_stream_test_with(StreamKind::Copy, 64, 1, &quick(), StreamInit::default()).unwrap();
        arrays.a[17] = 0.0;
        match arrays.verify(StreamKind::Copy) {
            Err(StreamError::Verification { index, .. }) => assert_eq!(index, 17),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn more_threads_than_elements() {
        let run = run_stream_test(StreamKind::Scale, 3, 8, &quick()).unwrap();
        assert!(run.bandwidth > 0.0);
    }

    #[test]
    fn zero_threads_or_elements_rejected() {
        assert!(run_stream_test(StreamKind::Copy, 10, 0, &quick()).is_err());
        assert!(run_stream_test(StreamKind::Copy, 0, 1, &quick()).is_err());
    }

    #[test]
    fn l1_sizing_without_faster_level() {
        let dev = DeviceProfile::new(
            "d",
            1,
            vec![lvl(LevelName::L1, 32 * KB, false), lvl(LevelName::Dram, 1 << 30, true)],
        )
        .unwrap();
        assert_eq!(size_for_level(LevelName::L1, &dev, StreamKind::Copy).unwrap(), 1024);
    }

    #[test]
    fn dram_sizing_beats_largest_cache() {
        let dev = DeviceProfile::new(
            "xeon",
            10,
            vec![
                lvl(LevelName::L1, 48 * KB, false),
                lvl(LevelName::L2, 1280 * KB, false),
                lvl(LevelName::L3, 15 * MB, true),
                lvl(LevelName::Dram, 32 << 30, true),
            ],
        )
        .unwrap();
        assert_eq!(size_for_level(LevelName::Dram, &dev, StreamKind::Triad).unwrap(), 2_621_440);
    }

    #[test]
    fn adjacent_levels_too_close() {
        // L1 > L2/8: 4*L1 > L2/2
        let dev = DeviceProfile::new(
            "sf",
            2,
            vec![
                lvl(LevelName::L1, 32 * KB, false),
                lvl(LevelName::L2, 128 * KB, true),
                lvl(LevelName::Dram, 1 << 30, true),
            ],
        )
        .unwrap();
        let err = size_for_level(LevelName::L2, &dev, StreamKind::Copy).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("L2") && msg.contains("L1"), "{msg}");
    }

    #[test]
    fn unknown_level() {
        let dev = DeviceProfile::new("d", 1, vec![lvl(LevelName::Dram, 1 << 20, true)]).unwrap();
        assert!(matches!(
            size_for_level(LevelName::L2, &dev, StreamKind::Copy),
            Err(StreamError::UnknownLevel(LevelName::L2))
        ));
    }

    #[test]
    fn sizing_bounds_hold() {
        let dev = DeviceProfile::new(
            "pi",
            4,
            vec![
                lvl(LevelName::L1, 32 * KB, false),
                lvl(LevelName::L2, MB, true),
                lvl(LevelName::Dram, 4 << 30, true),
            ],
        )
        .unwrap();
        for kind in StreamKind::ALL {
            let ws = |level| size_for_level(level, &dev, kind).unwrap() as u64 * kind.arrays() * 8;
            assert!(ws(LevelName::L1) <= 16 * KB);
            assert!(ws(LevelName::L2) >= 128 * KB && ws(LevelName::L2) <= 512 * KB);
            assert!(ws(LevelName::Dram) >= 4 * MB);
        }
    }

    #[test]
    fn sweep_per_core_and_shared() {
        let dev = DeviceProfile::new(
            "d",
            4,
            vec![lvl(LevelName::L1, 32 * KB, false), lvl(LevelName::Dram, 8 * MB, true)],
        )
        .unwrap();
        let report = run_hierarchy_sweep(&dev, &quick());
        assert!(report.failures.is_empty());
        assert_eq!(report.measurements.len(), 8);
        for m in &report.measurements {
            assert!(m.best_bandwidth > 0.0);
            match m.level.label {
                LevelName::L1 => {
                    assert_eq!(m.mode, StreamMode::SequentialScaled);
                    assert_eq!(m.scaled_by_cores, 4);
                    assert_eq!(m.threads, 1);
                }
                _ => {
                    assert_eq!(m.mode, StreamMode::Threaded);
                    assert_eq!(m.scaled_by_cores, 1);
                    assert_eq!(m.threads, 4);
                }
            }
        }
    }

    #[test]
    fn sweep_dram_only() {
        let dev = DeviceProfile::new("d", 2, vec![lvl(LevelName::Dram, 4 * MB, true)]).unwrap();
        let report = run_hierarchy_sweep(&dev, &quick());
        assert_eq!(report.measurements.len(), 4);
        assert!(report.measurements.iter().all(|m| m.mode == StreamMode::Threaded));
    }

    #[test]
    fn sweep_keeps_going_past_bad_level() {
        let dev = DeviceProfile::new(
            "sf",
            2,
            vec![
                lvl(LevelName::L1, 32 * KB, false),
                lvl(LevelName::L2, 128 * KB, true),
                lvl(LevelName::Dram, 16 * MB, true),
            ],
        )
        .unwrap();
        let report = run_hierarchy_sweep(&dev, &quick());
        assert_eq!(report.failed_levels(), vec![LevelName::L2]);
        assert_eq!(report.failures.len(), 4);
        let ok: Vec<_> = report.measurements.iter().map(|m| m.level.label).collect();
        assert_eq!(ok.iter().filter(|l| **l == LevelName::L1).count(), 4);
        assert_eq!(ok.iter().filter(|l| **l == LevelName::Dram).count(), 4);
    }
}
