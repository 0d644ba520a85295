//! Monotonic timing and the warm-up / repetition policy shared by every kernel.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coarsest clock granularity the harness accepts.
pub const MAX_CLOCK_RESOLUTION: Duration = Duration::from_micros(1);

#[derive(Debug, Error, PartialEq)]
pub enum TimingError {
    #[error("invalid repetition policy: {0}")]
    InvalidPolicy(&'static str),
    #[error("no timed samples were collected")]
    NoSamples,
    #[error("clock resolution {0:?} is coarser than the required {MAX_CLOCK_RESOLUTION:?}")]
    CoarseClock(Duration),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionPolicy {
    pub warmup_runs: usize,
    pub measured_runs: usize,
    /// Optional cap on total measured wall time, in seconds.
    pub time_budget: Option<f64>,
}

impl Default for RepetitionPolicy {
    fn default() -> Self {
        RepetitionPolicy {
            warmup_runs: 2,
            measured_runs: 10,
            time_budget: None,
        }
    }
}

impl RepetitionPolicy {
    pub fn new(warmup_runs: usize, measured_runs: usize) -> Result<Self, TimingError> {
        let policy = RepetitionPolicy {
            warmup_runs,
            measured_runs,
            time_budget: None,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn with_budget(mut self, seconds: f64) -> Result<Self, TimingError> {
        self.time_budget = Some(seconds);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), TimingError> {
        if self.measured_runs == 0 {
            return Err(TimingError::InvalidPolicy("measured_runs must be at least 1"));
        }
        if let Some(budget) = self.time_budget {
            if !(budget > 0.0 && budget.is_finite()) {
                return Err(TimingError::InvalidPolicy("time_budget must be positive"));
            }
        }
        Ok(())
    }
}

/// Summary over the timed samples of one measurement, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    samples: Vec<f64>,
    best: f64,
    worst: f64,
    median: f64,
}

impl TimingStats {
    /// Builds stats from raw samples. Non-positive samples are clamped to the
    /// smallest positive double so that `best > 0` always holds.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self, TimingError> {
        if samples.is_empty() {
            return Err(TimingError::NoSamples);
        }
        let samples: Vec<f64> = samples
            .into_iter()
            .map(|s| if s > 0.0 { s } else { f64::MIN_POSITIVE })
            .collect();
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        // lower-middle for even counts
        let median = sorted[(sorted.len() - 1) / 2];
        Ok(TimingStats {
            best: sorted[0],
            worst: sorted[sorted.len() - 1],
            median,
            samples,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn worst(&self) -> f64 {
        self.worst
    }

    pub fn median(&self) -> f64 {
        self.median
    }
}

/// Runs `work` `policy.warmup_runs` times untimed, then up to
/// `policy.measured_runs` times timed. With a time budget the loop stops early
/// once the budget is spent, as long as one sample exists.
pub fn measure<F: FnMut()>(mut work: F, policy: &RepetitionPolicy) -> Result<TimingStats, TimingError> {
    policy.validate()?;
    for _ in 0..policy.warmup_runs {
        work();
    }
    let mut samples = Vec::with_capacity(policy.measured_runs);
    let budget_start = Instant::now();
    for _ in 0..policy.measured_runs {
        let start = Instant::now();
        work();
        samples.push(start.elapsed().as_secs_f64());
        if let Some(budget) = policy.time_budget {
            if budget_start.elapsed().as_secs_f64() > budget {
                break;
            }
        }
    }
    TimingStats::from_samples(samples)
}

/// Smallest observable nonzero step of the monotonic clock.
pub fn clock_resolution() -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..64 {
        let t0 = Instant::now();
        let mut t1 = Instant::now();
        while t1 == t0 {
            t1 = Instant::now();
        }
        best = best.min(t1 - t0);
    }
    best
}

/// Fails when the platform clock cannot resolve at least one microsecond.
pub fn check_clock() -> Result<Duration, TimingError> {
    let res = clock_resolution();
    if res > MAX_CLOCK_RESOLUTION {
        Err(TimingError::CoarseClock(res))
    } else {
        Ok(res)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_measured_runs_rejected() {
        assert_eq!(
            RepetitionPolicy::new(0, 0),
            Err(TimingError::InvalidPolicy("measured_runs must be at least 1"))
        );
        let bad = RepetitionPolicy {
            warmup_runs: 0,
            measured_runs: 0,
            time_budget: None,
        };
        assert!(measure(|| {}, &bad).is_err());
    }

    #[test]
    fn non_positive_budget_rejected() {
        let p = RepetitionPolicy::new(0, 3).unwrap();
        assert!(p.with_budget(0.0).is_err());
        assert!(p.with_budget(-1.0).is_err());
        assert!(p.with_budget(0.5).is_ok());
    }

    #[test]
    fn empty_samples_is_an_error() {
        assert_eq!(TimingStats::from_samples(vec![]), Err(TimingError::NoSamples));
    }

    #[test]
    fn sleep_best_is_close_to_duration() {
        let policy = RepetitionPolicy::new(0, 5).unwrap();
        let stats = measure(|| std::thread::sleep(Duration::from_millis(10)), &policy).unwrap();
        assert_eq!(stats.samples().len(), 5);
        assert!(stats.best() >= 0.010);
        assert!(stats.best() < 0.050, "best {}", stats.best());
    }

    #[test]
    fn warmup_runs_are_not_sampled() {
        let mut calls = 0;
        let policy = RepetitionPolicy::new(3, 4).unwrap();
        let stats = measure(|| calls += 1, &policy).unwrap();
        assert_eq!(calls, 7);
        assert_eq!(stats.samples().len(), 4);
    }

    #[test]
    fn budget_stops_early_after_one_sample() {
        let mut calls = 0;
        let policy = RepetitionPolicy::new(0, 1000).unwrap().with_budget(0.001).unwrap();
        let stats = measure(
            || {
                calls += 1;
                std::thread::sleep(Duration::from_millis(2));
            },
            &policy,
        )
        .unwrap();
        assert_eq!(stats.samples().len(), 1);
        assert_eq!(calls, 1);
    }

    #[test]
    fn decreasing_durations_give_last_sample_as_best() {
        // Work that gets faster each call, recording its own durations.
        let mut remaining = 6u64;
        let mut own = Vec::new();
        let policy = RepetitionPolicy::new(0, 5).unwrap();
        let stats = measure(
            || {
                let t = Instant::now();
                std::thread::sleep(Duration::from_millis(remaining * 3));
                remaining -= 1;
                own.push(t.elapsed().as_secs_f64());
            },
            &policy,
        )
        .unwrap();
        let last = *stats.samples().last().unwrap();
        assert_eq!(stats.best(), last);
        let own_min = own.iter().cloned().fold(f64::MAX, f64::min);
        assert_eq!(own.last().copied(), Some(own_min));
    }

    #[test]
    fn median_uses_lower_middle() {
        let s = TimingStats::from_samples(vec![4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median(), 2.0);
        let s = TimingStats::from_samples(vec![5.0, 1.0, 3.0]).unwrap();
        assert_eq!(s.median(), 3.0);
    }

    #[test]
    fn monotonic_clock() {
        let mut prev = Instant::now();
        for _ in 0..10_000 {
            let now = Instant::now();
            assert!(now >= prev);
            prev = now;
        }
    }

    #[test]
    fn host_clock_is_fine_enough() {
        assert!(check_clock().is_ok(), "resolution {:?}", clock_resolution());
    }

    proptest! {
        #[test]
        fn stats_ordering(samples in prop::collection::vec(1e-9f64..10.0, 1..50)) {
            let s = TimingStats::from_samples(samples.clone()).unwrap();
            prop_assert!(s.best() <= s.median() && s.median() <= s.worst());
            prop_assert!(s.best() > 0.0);
            let min = samples.iter().cloned().fold(f64::MAX, f64::min);
            let max = samples.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert_eq!(s.best(), min);
            prop_assert_eq!(s.worst(), max);
        }
    }
}
