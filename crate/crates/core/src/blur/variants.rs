use std::fmt;
use std::thread;

use serde::{Deserialize, Serialize};

use super::{BlurError, Gaussian1DKernel, Gaussian2DKernel, Image};
use crate::parallel::static_ranges;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlurVariant {
    Naive,
    UnitStride,
    Kernels1D,
    Memory,
    Parallel,
}

impl BlurVariant {
    pub const ALL: [BlurVariant; 5] = [
        BlurVariant::Naive,
        BlurVariant::UnitStride,
        BlurVariant::Kernels1D,
        BlurVariant::Memory,
        BlurVariant::Parallel,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BlurVariant::Naive => "Naive",
            BlurVariant::UnitStride => "Unit-stride",
            BlurVariant::Kernels1D => "1D_kernels",
            BlurVariant::Memory => "Memory",
            BlurVariant::Parallel => "Parallel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = |x: &str| x.to_ascii_lowercase().replace(['-', '_'], "");
        let s = norm(s);
        Self::ALL.into_iter().find(|v| norm(v.label()) == s)
    }

    pub fn is_parallel(self) -> bool {
        self == BlurVariant::Parallel
    }

    /// Variants that run the two 1D passes.
    pub fn is_separable(self) -> bool {
        matches!(self, BlurVariant::Kernels1D | BlurVariant::Memory | BlurVariant::Parallel)
    }
}

impl fmt::Display for BlurVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn check_size(img: &Image, f: usize) -> Result<(), BlurError> {
    if f > img.w.min(img.h) {
        return Err(BlurError::Parameter(format!(
            "filter size {f} exceeds image {}x{}",
            img.w, img.h
        )));
    }
    Ok(())
}

/// Copies every pixel closer than `m` to an edge from `src` into `dst`.
fn copy_border(src: &Image, dst: &mut [f32], m: usize) {
    let (w, h, c) = (src.w, src.h, src.c);
    let wc = w * c;
    let top = m * wc;
    dst[..top].copy_from_slice(&src.data[..top]);
    let bottom = (h - m) * wc;
    dst[bottom..].copy_from_slice(&src.data[bottom..]);
    let edge = m * c;
    for i in m..h - m {
        let row = i * wc;
        dst[row..row + edge].copy_from_slice(&src.data[row..row + edge]);
        dst[row + wc - edge..row + wc].copy_from_slice(&src.data[row + wc - edge..row + wc]);
    }
}

/// Direct 2D convolution. Output pixels are visited column by column
/// (`j` outer, `i` inner), so consecutive outputs are a full image row apart.
fn naive_into(src: &Image, k: &Gaussian2DKernel, dst: &mut [f32]) {
    let (w, h, c) = (src.w, src.h, src.c);
    let f = k.size();
    let m = k.middle();
    let kw = k.weights();
    let s = &src.data;
    for j in m..w - m {
        for i in m..h - m {
            for ch in 0..c {
                let mut acc = 0.0f32;
                for ky in 0..f {
                    let row = (i + ky - m) * w;
                    for kx in 0..f {
                        acc += s[(row + j + kx - m) * c + ch] * kw[ky * f + kx];
                    }
                }
                dst[(i * w + j) * c + ch] = acc;
            }
        }
    }
}

/// Same sums as `naive_into`, reordered so the innermost loop streams a
/// contiguous row of the image into a row accumulator.
fn unit_stride_into(src: &Image, k: &Gaussian2DKernel, dst: &mut [f32], acc: &mut Vec<f32>) {
    let (w, h, c) = (src.w, src.h, src.c);
    let f = k.size();
    let m = k.middle();
    let wc = w * c;
    let len = (w - 2 * m) * c;
    acc.clear();
    acc.resize(len, 0.0);
    for i in m..h - m {
        acc.fill(0.0);
        for ky in 0..f {
            let row = (i + ky - m) * wc;
            for kx in 0..f {
                let wgt = k.at(ky, kx);
                let s = &src.data[row + kx * c..row + kx * c + len];
                for (a, &v) in acc.iter_mut().zip(s) {
                    *a += v * wgt;
                }
            }
        }
        dst[i * wc + m * c..i * wc + m * c + len].copy_from_slice(acc);
    }
}

/// Vertical then horizontal 1D pass, one output value at a time.
fn separable_into(src: &Image, k: &Gaussian1DKernel, dst: &mut [f32], tmp: &mut [f32]) {
    let (w, h, c) = (src.w, src.h, src.c);
    let f = k.size();
    let m = k.middle();
    let kw = k.weights();
    let s = &src.data;
    for i in m..h - m {
        for j in 0..w {
            for ch in 0..c {
                let mut acc = 0.0f32;
                for t in 0..f {
                    acc += s[((i + t - m) * w + j) * c + ch] * kw[t];
                }
                tmp[(i * w + j) * c + ch] = acc;
            }
        }
    }
    for i in m..h - m {
        for j in m..w - m {
            for ch in 0..c {
                let mut acc = 0.0f32;
                for t in 0..f {
                    acc += tmp[(i * w + j + t - m) * c + ch] * kw[t];
                }
                dst[(i * w + j) * c + ch] = acc;
            }
        }
    }
}

/// Vertical pass over output rows `first..first + rows.len() / wc`: for each
/// tap, the whole source row is streamed and accumulated into the tmp row.
fn vertical_rows(src: &Image, k: &Gaussian1DKernel, tmp_rows: &mut [f32], first: usize) {
    let wc = src.stride();
    let m = k.middle();
    for (r, out) in tmp_rows.chunks_exact_mut(wc).enumerate() {
        let i = first + r;
        out.fill(0.0);
        for (t, &wgt) in k.weights().iter().enumerate() {
            let s = &src.data[(i + t - m) * wc..(i + t - m + 1) * wc];
            for (o, &v) in out.iter_mut().zip(s) {
                *o += v * wgt;
            }
        }
    }
}

/// Horizontal pass over full rows of `tmp`, writing only the interior
/// columns of the matching `dst_rows`.
fn horizontal_rows(tmp_rows: &[f32], k: &Gaussian1DKernel, dst_rows: &mut [f32], wc: usize, c: usize) {
    let m = k.middle();
    let len = wc - 2 * m * c;
    for (t_row, d_row) in tmp_rows.chunks_exact(wc).zip(dst_rows.chunks_exact_mut(wc)) {
        let out = &mut d_row[m * c..m * c + len];
        out.fill(0.0);
        for (t, &wgt) in k.weights().iter().enumerate() {
            let s = &t_row[t * c..t * c + len];
            for (o, &v) in out.iter_mut().zip(s) {
                *o += v * wgt;
            }
        }
    }
}

fn separable_mem_into(src: &Image, k: &Gaussian1DKernel, dst: &mut [f32], tmp: &mut [f32]) {
    let wc = src.stride();
    let m = k.middle();
    let rows = m * wc..(src.h - m) * wc;
    vertical_rows(src, k, &mut tmp[rows.clone()], m);
    horizontal_rows(&tmp[rows.clone()], k, &mut dst[rows], wc, src.c);
}

/// Interior rows of each pass statically split over `threads` workers; the
/// scope join between passes is the barrier.
fn parallel_into(src: &Image, k: &Gaussian1DKernel, dst: &mut [f32], tmp: &mut [f32], threads: usize) {
    if threads <= 1 {
        separable_mem_into(src, k, dst, tmp);
        return;
    }
    let wc = src.stride();
    let m = k.middle();
    let interior = src.h - 2 * m;
    let ranges = static_ranges(interior, threads);

    thread::scope(|s| {
        let mut rest = &mut tmp[m * wc..(src.h - m) * wc];
        for r in &ranges {
            let (mine, tail) = std::mem::take(&mut rest).split_at_mut(r.len() * wc);
            rest = tail;
            let first = m + r.start;
            s.spawn(move || vertical_rows(src, k, mine, first));
        }
    });
    let tmp = &*tmp;
    thread::scope(|s| {
        let mut rest = &mut dst[m * wc..(src.h - m) * wc];
        for r in &ranges {
            let (mine, tail) = std::mem::take(&mut rest).split_at_mut(r.len() * wc);
            rest = tail;
            let t_rows = &tmp[(m + r.start) * wc..(m + r.end) * wc];
            s.spawn(move || horizontal_rows(t_rows, k, mine, wc, src.c));
        }
    });
}

/// Kernels plus reusable output and scratch buffers, so repeated timed runs
/// do not allocate.
#[derive(Debug, Clone)]
pub struct BlurRunner {
    k1: Gaussian1DKernel,
    k2: Gaussian2DKernel,
    out: Vec<f32>,
    tmp: Vec<f32>,
    acc: Vec<f32>,
}

impl BlurRunner {
    pub fn new(k1: Gaussian1DKernel) -> Self {
        let k2 = k1.outer();
        BlurRunner {
            k1,
            k2,
            out: Vec::new(),
            tmp: Vec::new(),
            acc: Vec::new(),
        }
    }

    pub fn kernel(&self) -> &Gaussian1DKernel {
        &self.k1
    }

    /// Blurs `img` with `variant` into the internal output buffer.
    pub fn run(&mut self, variant: BlurVariant, img: &Image, threads: usize) -> Result<(), BlurError> {
        check_size(img, self.k1.size())?;
        if threads == 0 {
            return Err(BlurError::Parameter("threads must be at least 1".into()));
        }
        let len = img.data.len();
        if self.out.len() != len {
            self.out = vec![0.0; len];
        }
        if variant.is_separable() && self.tmp.len() != len {
            self.tmp = vec![0.0; len];
        }
        let m = self.k1.middle();
        copy_border(img, &mut self.out, m);
        match variant {
            BlurVariant::Naive => naive_into(img, &self.k2, &mut self.out),
            BlurVariant::UnitStride => unit_stride_into(img, &self.k2, &mut self.out, &mut self.acc),
            BlurVariant::Kernels1D => separable_into(img, &self.k1, &mut self.out, &mut self.tmp),
            BlurVariant::Memory => separable_mem_into(img, &self.k1, &mut self.out, &mut self.tmp),
            BlurVariant::Parallel => parallel_into(img, &self.k1, &mut self.out, &mut self.tmp, threads),
        }
        Ok(())
    }

    pub fn output(&self) -> &[f32] {
        &self.out
    }

    /// Copies the last output into a fresh image shaped like `like`.
    pub fn output_image(&self, like: &Image) -> Image {
        Image {
            w: like.w,
            h: like.h,
            c: like.c,
            data: self.out.clone(),
        }
    }
}

fn one_shot(variant: BlurVariant, img: &Image, k1: Gaussian1DKernel, threads: usize) -> Result<Image, BlurError> {
    let mut runner = BlurRunner::new(k1);
    runner.run(variant, img, threads)?;
    Ok(Image {
        w: img.w,
        h: img.h,
        c: img.c,
        data: runner.out,
    })
}

pub fn blur_naive(img: &Image, k: &Gaussian2DKernel) -> Result<Image, BlurError> {
    check_size(img, k.size())?;
    let mut out = vec![0.0; img.data.len()];
    copy_border(img, &mut out, k.middle());
    naive_into(img, k, &mut out);
    Ok(Image {
        w: img.w,
        h: img.h,
        c: img.c,
        data: out,
    })
}

pub fn blur_unit_stride(img: &Image, k: &Gaussian2DKernel) -> Result<Image, BlurError> {
    check_size(img, k.size())?;
    let mut out = vec![0.0; img.data.len()];
    copy_border(img, &mut out, k.middle());
    unit_stride_into(img, k, &mut out, &mut Vec::new());
    Ok(Image {
        w: img.w,
        h: img.h,
        c: img.c,
        data: out,
    })
}

pub fn blur_separable(img: &Image, k: &Gaussian1DKernel) -> Result<Image, BlurError> {
    one_shot(BlurVariant::Kernels1D, img, k.clone(), 1)
}

pub fn blur_separable_mem(img: &Image, k: &Gaussian1DKernel) -> Result<Image, BlurError> {
    one_shot(BlurVariant::Memory, img, k.clone(), 1)
}

pub fn blur_parallel(img: &Image, k: &Gaussian1DKernel, threads: usize) -> Result<Image, BlurError> {
    one_shot(BlurVariant::Parallel, img, k.clone(), threads)
}
