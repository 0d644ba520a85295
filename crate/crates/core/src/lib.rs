//! Benchmarks for memory-bound kernels.
//!
//! * [`stream`]: COPY/SCALE/SUM/TRIAD bandwidth per memory level.
//! * [`transpose`]: in-place square matrix transposition, five variants.
//! * [`blur`]: Gaussian blur, five variants, plus PPM I/O.
//! * [`metrics`]: speedup over naive and relative bandwidth utilization.
//! * [`report`]: CSV/JSON records and SVG bar charts.

pub mod blur;
pub mod device;
pub mod metrics;
mod parallel;
pub mod report;
pub mod stream;
pub mod timing;
pub mod transpose;

pub use parallel::static_ranges;
