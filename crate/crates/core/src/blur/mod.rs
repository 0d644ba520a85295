//! Gaussian blur over interleaved `f32` images, from a direct 2D convolution
//! to separable, row-streaming and threaded passes.
//!
//! All variants share one border policy: only pixels at least `middle`
//! away from every edge are filtered; the border keeps the input values.

mod kernel;
pub mod ppm;
mod synth;
mod variants;

use std::fmt;

use thiserror::Error;

pub use kernel::{default_sigma, make_gaussian_kernel, Gaussian1DKernel, Gaussian2DKernel};
pub use synth::{synth_image, Pattern};
pub use variants::{
    blur_naive, blur_parallel, blur_separable, blur_separable_mem, blur_unit_stride, BlurRunner, BlurVariant,
};

#[derive(Debug, Error)]
pub enum BlurError {
    #[error("invalid blur parameter: {0}")]
    Parameter(String),
    #[error("malformed PPM at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("i/o error on {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Interleaved row-major image: value `(i, j, ch)` lives at
/// `data[(i * w + j) * c + ch]`.
#[derive(Clone, PartialEq)]
pub struct Image {
    w: usize,
    h: usize,
    c: usize,
    data: Vec<f32>,
}

impl fmt::Debug for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Image({}x{}x{})", self.w, self.h, self.c)
    }
}

impl Image {
    pub fn new(w: usize, h: usize, c: usize, data: Vec<f32>) -> Result<Self, BlurError> {
        if w == 0 || h == 0 {
            return Err(BlurError::Parameter(format!("image must be non-empty, got {w}x{h}")));
        }
        if c != 1 && c != 3 {
            return Err(BlurError::Parameter(format!("channel count must be 1 or 3, got {c}")));
        }
        if data.len() != w * h * c {
            return Err(BlurError::Parameter(format!(
                "data length {} does not match {w}x{h}x{c}",
                data.len()
            )));
        }
        Ok(Image { w, h, c, data })
    }

    pub fn filled(w: usize, h: usize, c: usize, value: f32) -> Result<Self, BlurError> {
        Self::new(w, h, c, vec![value; w * h * c])
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn channels(&self) -> usize {
        self.c
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    /// Floats per image row.
    pub fn stride(&self) -> usize {
        self.w * self.c
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, ch: usize) -> f32 {
        self.data[(i * self.w + j) * self.c + ch]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.w == other.w && self.h == other.h && self.c == other.c
    }

    /// Largest absolute difference over pixels at least `margin` away from
    /// every edge. `None` when shapes differ, NaN if either side has one.
    pub fn max_abs_diff_interior(&self, other: &Image, margin: usize) -> Option<f32> {
        if !self.same_shape(other) {
            return None;
        }
        let mut worst = 0.0f32;
        for i in margin..self.h.saturating_sub(margin) {
            for j in margin..self.w.saturating_sub(margin) {
                for ch in 0..self.c {
                    let d = (self.at(i, j, ch) - other.at(i, j, ch)).abs();
                    if d.is_nan() {
                        return Some(f32::NAN);
                    }
                    worst = worst.max(d);
                }
            }
        }
        Some(worst)
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}
