//! In-place transposition of square row-major `f64` matrices.
//!
//! Five variants of increasing sophistication:
//!
//! | variant            | traversal                                        | scheduling          |
//! |--------------------|--------------------------------------------------|---------------------|
//! | `naive`            | upper triangle, row by row                       | single thread       |
//! | `parallel`         | upper triangle, row by row                       | static row ranges   |
//! | `blocked`          | block pairs `(ib, jb)`, `jb >= ib`, element swap | static block rows   |
//! | `manual_blocked`   | block pairs staged through per-worker scratch    | static block rows   |
//! | `dynamic`          | as `manual_blocked`                              | atomic counter      |
//!
//! Every variant only swaps `(i, j)` with `(j, i)`, so results are bit-exact
//! and the transform is an involution. The mirror pair of a block is always
//! handled by the worker that owns the smaller block-row index.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::DeviceProfile;
use crate::parallel::{static_ranges, SharedMut};

#[derive(Debug, Error, PartialEq)]
pub enum TransposeError {
    #[error("matrix side must be at least 1")]
    EmptyMatrix,
    #[error("data length {len} does not match {n}x{n}")]
    Shape { n: usize, len: usize },
    #[error("block size {blk} outside 1..={n}")]
    BlockSize { blk: usize, n: usize },
    #[error("thread count must be at least 1")]
    Threads,
    #[error("cannot allocate a {n}x{n} matrix")]
    Allocation { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self, TransposeError> {
        if n == 0 {
            return Err(TransposeError::EmptyMatrix);
        }
        if data.len() != n * n {
            return Err(TransposeError::Shape { n, len: data.len() });
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, TransposeError> {
        if n == 0 {
            return Err(TransposeError::EmptyMatrix);
        }
        let mut data = Vec::new();
        data.try_reserve_exact(n * n)
            .map_err(|_| TransposeError::Allocation { n })?;
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Ok(SquareMatrix { n, data })
    }

    /// Element `(i, j)` holds `i * n + j`, exactly representable up to n = 2^26.
    /// Lets a transposed result be checked without a second matrix.
    pub fn indexed(n: usize) -> Result<Self, TransposeError> {
        Self::from_fn(n, |i, j| (i * n + j) as f64)
    }

    pub fn identity(n: usize) -> Result<Self, TransposeError> {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn bytes(&self) -> u64 {
        (self.data.len() * std::mem::size_of::<f64>()) as u64
    }

    /// True iff this matrix is the transpose of `SquareMatrix::indexed(n)`.
    pub fn is_indexed_transpose(&self) -> bool {
        let n = self.n;
        self.data
            .iter()
            .enumerate()
            .all(|(k, &v)| v == ((k % n) * n + k / n) as f64)
    }

    /// True iff this matrix equals `SquareMatrix::indexed(n)`.
    pub fn is_indexed(&self) -> bool {
        self.data.iter().enumerate().all(|(k, &v)| v == k as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    blk_size: usize,
}

impl BlockSpec {
    pub fn new(blk_size: usize, n: usize) -> Result<Self, TransposeError> {
        if blk_size == 0 || blk_size > n {
            return Err(TransposeError::BlockSize { blk: blk_size, n });
        }
        Ok(BlockSpec { blk_size })
    }

    /// Block side clamped into `1..=n`.
    pub fn clamped(blk_size: usize, n: usize) -> Self {
        BlockSpec {
            blk_size: blk_size.clamp(1, n.max(1)),
        }
    }

    pub fn size(self) -> usize {
        self.blk_size
    }

    /// Largest power of two such that a tile and its mirror
    /// (`2 * blk^2 * 8` bytes) fit in half of the smallest data cache.
    pub fn auto_size(device: &DeviceProfile) -> usize {
        let cap = device.smallest_cache().map(|l| l.capacity).unwrap_or(32 * 1024);
        let budget = cap / 2;
        let mut blk = 1usize;
        while 2 * ((2 * blk) as u64).pow(2) * 8 <= budget {
            blk *= 2;
        }
        blk
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransposeVariant {
    Naive,
    Parallel,
    Blocking,
    ManualBlocking,
    Dynamic,
}

impl TransposeVariant {
    pub const ALL: [TransposeVariant; 5] = [
        TransposeVariant::Naive,
        TransposeVariant::Parallel,
        TransposeVariant::Blocking,
        TransposeVariant::ManualBlocking,
        TransposeVariant::Dynamic,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TransposeVariant::Naive => "Naive",
            TransposeVariant::Parallel => "Parallel",
            TransposeVariant::Blocking => "Blocking",
            TransposeVariant::ManualBlocking => "Manual_blocking",
            TransposeVariant::Dynamic => "Dynamic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.to_ascii_lowercase();
        Self::ALL.into_iter().find(|v| {
            let l = v.label().to_ascii_lowercase();
            l == s || l.replace('_', "-") == s || l.replace('_', "") == s
        })
    }

    pub fn is_parallel(self) -> bool {
        self != TransposeVariant::Naive
    }

    /// Runs this variant on `mat` in place.
    pub fn run(self, mat: &mut SquareMatrix, blk: BlockSpec, threads: usize) -> Result<(), TransposeError> {
        match self {
            TransposeVariant::Naive => {
                transpose_naive(mat);
                Ok(())
            }
            TransposeVariant::Parallel => transpose_parallel(mat, threads),
            TransposeVariant::Blocking => transpose_blocked(mat, blk, threads),
            TransposeVariant::ManualBlocking => transpose_manual_blocked(mat, blk, threads),
            TransposeVariant::Dynamic => transpose_dynamic(mat, blk, threads),
        }
    }
}

impl fmt::Display for TransposeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Out-of-place reference transpose. Never used on timed paths.
pub fn oracle_transpose(mat: &SquareMatrix) -> SquareMatrix {
    let n = mat.n;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = mat.data[i * n + j];
        }
    }
    SquareMatrix { n, data: out }
}

pub fn transpose_naive(mat: &mut SquareMatrix) {
    let n = mat.n;
    let data = &mut mat.data;
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn check(mat: &SquareMatrix, blk: Option<BlockSpec>, threads: usize) -> Result<(), TransposeError> {
    if threads == 0 {
        return Err(TransposeError::Threads);
    }
    if let Some(b) = blk {
        if b.blk_size == 0 || b.blk_size > mat.n {
            return Err(TransposeError::BlockSize { blk: b.blk_size, n: mat.n });
        }
    }
    Ok(())
}

/// Upper-triangle rows split into contiguous static ranges.
pub fn transpose_parallel(mat: &mut SquareMatrix, threads: usize) -> Result<(), TransposeError> {
    check(mat, None, threads)?;
    if threads == 1 {
        transpose_naive(mat);
        return Ok(());
    }
    let n = mat.n;
    let shared = SharedMut::new(&mut mat.data);
    thread::scope(|s| {
        for rows in static_ranges(n, threads) {
            s.spawn(move || {
                for i in rows {
                    for j in i + 1..n {
                        // SAFETY: (i, j) with j > i belongs to row i's owner only.
                        unsafe { shared.swap(i * n + j, j * n + i) };
                    }
                }
            });
        }
    });
    Ok(())
}

/// Swaps every strictly-upper element of block `(ib, jb)` with its mirror.
#[inline]
fn swap_block(shared: &SharedMut<f64>, n: usize, bs: usize, ib: usize, jb: usize) {
    let i_end = (ib + bs).min(n);
    let j_end = (jb + bs).min(n);
    for i in ib..i_end {
        for j in jb.max(i + 1)..j_end {
            // SAFETY: the caller owns block row `ib`, which covers both
            // (i, j) and (j, i) for jb >= ib.
            unsafe { shared.swap(i * n + j, j * n + i) };
        }
    }
}

fn block_starts(n: usize, bs: usize) -> Vec<usize> {
    (0..n).step_by(bs).collect()
}

/// Block-tiled traversal: block rows statically split over workers, each
/// block row walks `jb` from the diagonal block rightwards.
pub fn transpose_blocked(mat: &mut SquareMatrix, blk: BlockSpec, threads: usize) -> Result<(), TransposeError> {
    check(mat, Some(blk), threads)?;
    let n = mat.n;
    let bs = blk.blk_size;
    let starts = block_starts(n, bs);
    let shared = SharedMut::new(&mut mat.data);
    let work = |rows: std::ops::Range<usize>| {
        for &ib in &starts[rows] {
            for jb in (ib..n).step_by(bs) {
                swap_block(&shared, n, bs, ib, jb);
            }
        }
    };
    if threads == 1 {
        work(0..starts.len());
    } else {
        thread::scope(|s| {
            for rows in static_ranges(starts.len(), threads) {
                s.spawn(move || work(rows));
            }
        });
    }
    Ok(())
}

/// Per-worker staging buffers for the manual-blocking variants.
struct Scratch {
    block: Vec<f64>,
    tile: Vec<f64>,
}

impl Scratch {
    fn new(bs: usize) -> Self {
        Scratch {
            block: vec![0.0; bs * bs],
            tile: vec![0.0; bs * bs],
        }
    }
}

/// Transposes the `rows x cols` row-major `src` into `dst` (`cols x rows`).
#[inline]
fn transpose_into(src: &[f64], rows: usize, cols: usize, dst: &mut [f64]) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// One block row of the manual-blocking algorithm. Off-diagonal block
/// `A = (ib, jb)` is loaded row by row into scratch, transposed there,
/// exchanged row by row with its mirror `B = (jb, ib)`, and `B` (now in
/// scratch) is transposed and stored back into `A`. Matrix traffic is
/// contiguous along rows throughout.
fn manual_block_row(shared: &SharedMut<f64>, n: usize, bs: usize, ib: usize, scratch: &mut Scratch) {
    let i_end = (ib + bs).min(n);
    let bi = i_end - ib;
    // diagonal block in place
    for i in ib..i_end {
        for j in i + 1..i_end {
            // SAFETY: the diagonal block belongs to this block row only.
            unsafe { shared.swap(i * n + j, j * n + i) };
        }
    }
    for jb in (ib + bs..n).step_by(bs) {
        let j_end = (jb + bs).min(n);
        let bj = j_end - jb;
        let block = &mut scratch.block[..bi * bj];
        let tile = &mut scratch.tile[..bi * bj];

        // SAFETY (all raw accesses below): rows ib..i_end x cols jb..j_end
        // and rows jb..j_end x cols ib..i_end are owned by block row ib.
        for r in 0..bi {
            let row = unsafe { shared.slice_mut((ib + r) * n + jb, bj) };
            block[r * bj..(r + 1) * bj].copy_from_slice(row);
        }
        // A^T: bj x bi
        transpose_into(block, bi, bj, tile);
        for r in 0..bj {
            let row = unsafe { shared.slice_mut((jb + r) * n + ib, bi) };
            row.swap_with_slice(&mut tile[r * bi..(r + 1) * bi]);
        }
        // tile holds B (bj x bi); B^T is bi x bj
        transpose_into(tile, bj, bi, block);
        for r in 0..bi {
            let row = unsafe { shared.slice_mut((ib + r) * n + jb, bj) };
            row.copy_from_slice(&block[r * bj..(r + 1) * bj]);
        }
    }
}

/// Blocks staged through a scratch tile; block rows statically partitioned.
pub fn transpose_manual_blocked(mat: &mut SquareMatrix, blk: BlockSpec, threads: usize) -> Result<(), TransposeError> {
    check(mat, Some(blk), threads)?;
    let n = mat.n;
    let bs = blk.blk_size;
    let starts = block_starts(n, bs);
    let shared = SharedMut::new(&mut mat.data);
    let work = |rows: std::ops::Range<usize>| {
        let mut scratch = Scratch::new(bs);
        for &ib in &starts[rows] {
            manual_block_row(&shared, n, bs, ib, &mut scratch);
        }
    };
    if threads == 1 {
        work(0..starts.len());
    } else {
        thread::scope(|s| {
            for rows in static_ranges(starts.len(), threads) {
                s.spawn(move || work(rows));
            }
        });
    }
    Ok(())
}

/// As [`transpose_manual_blocked`], but workers claim block rows one at a
/// time from a shared counter, balancing the triangular workload.
pub fn transpose_dynamic(mat: &mut SquareMatrix, blk: BlockSpec, threads: usize) -> Result<(), TransposeError> {
    check(mat, Some(blk), threads)?;
    let n = mat.n;
    let bs = blk.blk_size;
    let starts = block_starts(n, bs);
    let next = AtomicUsize::new(0);
    let shared = SharedMut::new(&mut mat.data);
    let work = || {
        let mut scratch = Scratch::new(bs);
        loop {
            let k = next.fetch_add(1, Ordering::Relaxed);
            let Some(&ib) = starts.get(k) else { break };
            manual_block_row(&shared, n, bs, ib, &mut scratch);
        }
    };
    if threads == 1 {
        work();
    } else {
        thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(work);
            }
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{LevelName, MemoryLevel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> SquareMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SquareMatrix::from_fn(n, |_, _| rng.gen::<f64>()).unwrap()
    }

    fn m2() -> SquareMatrix {
        SquareMatrix::from_vec(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn two_by_two_by_hand() {
        let mut m = m2();
        transpose_naive(&mut m);
        assert_eq!(m.data(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(oracle_transpose(&m2()).data(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn oracle_one_by_one_and_involution() {
        let one = SquareMatrix::from_vec(1, vec![5.0]).unwrap();
        assert_eq!(oracle_transpose(&one), one);
        let r = random(9, 3);
        assert_eq!(oracle_transpose(&oracle_transpose(&r)), r);
    }

    #[test]
    fn identity_unchanged() {
        for v in TransposeVariant::ALL {
            let mut m = SquareMatrix::identity(13).unwrap();
            v.run(&mut m, BlockSpec::new(4, 13).unwrap(), 2).unwrap();
            assert_eq!(m, SquareMatrix::identity(13).unwrap(), "{v}");
        }
    }

    #[test]
    fn constant_matrix_unchanged() {
        let mut m = SquareMatrix::from_fn(12, |_, _| 2.5).unwrap();
        transpose_manual_blocked(&mut m, BlockSpec::new(5, 12).unwrap(), 2).unwrap();
        assert!(m.data().iter().all(|&x| x == 2.5));
    }

    #[test]
    fn random_seven_naive() {
        let r = random(7, 1);
        let mut m = r.clone();
        transpose_naive(&mut m);
        assert_eq!(m, oracle_transpose(&r));
    }

    #[test]
    fn parallel_cases() {
        let r = random(64, 2);
        let mut a = r.clone();
        transpose_parallel(&mut a, 4).unwrap();
        assert_eq!(a, oracle_transpose(&r));

        let mut one = r.clone();
        let mut naive = r.clone();
        transpose_parallel(&mut one, 1).unwrap();
        transpose_naive(&mut naive);
        assert_eq!(one.data(), naive.data());

        let r5 = random(5, 9);
        let mut many = r5.clone();
        transpose_parallel(&mut many, 16).unwrap();
        assert_eq!(many, oracle_transpose(&r5));
    }

    #[test]
    fn blocked_cases() {
        for (n, b) in [(8, 4), (10, 4), (9, 9)] {
            let r = random(n, n as u64);
            let mut m = r.clone();
            transpose_blocked(&mut m, BlockSpec::new(b, n).unwrap(), 2).unwrap();
            assert_eq!(m, oracle_transpose(&r), "n={n} blk={b}");
        }
    }

    #[test]
    fn manual_blocked_cases() {
        for (n, b) in [(8, 4), (12, 5)] {
            let r = random(n, 7 + n as u64);
            let mut m = r.clone();
            transpose_manual_blocked(&mut m, BlockSpec::new(b, n).unwrap(), 3).unwrap();
            assert_eq!(m, oracle_transpose(&r), "n={n} blk={b}");
        }
    }

    #[test]
    fn dynamic_cases() {
        let r = random(16, 4);
        let mut d = r.clone();
        transpose_dynamic(&mut d, BlockSpec::new(4, 16).unwrap(), 3).unwrap();
        assert_eq!(d, oracle_transpose(&r));

        let r = random(29, 5);
        let mut d = r.clone();
        let mut mb = r.clone();
        transpose_dynamic(&mut d, BlockSpec::new(6, 29).unwrap(), 1).unwrap();
        transpose_manual_blocked(&mut mb, BlockSpec::new(6, 29).unwrap(), 1).unwrap();
        assert_eq!(d, mb);
    }

    #[test]
    fn indexed_helpers() {
        let mut m = SquareMatrix::indexed(6).unwrap();
        assert!(m.is_indexed());
        transpose_naive(&mut m);
        assert!(m.is_indexed_transpose());
        assert!(!m.is_indexed());
    }

    #[test]
    fn invalid_arguments() {
        assert_eq!(SquareMatrix::from_vec(0, vec![]), Err(TransposeError::EmptyMatrix));
        assert_eq!(
            SquareMatrix::from_vec(2, vec![1.0; 3]),
            Err(TransposeError::Shape { n: 2, len: 3 })
        );
        assert!(BlockSpec::new(0, 4).is_err());
        assert!(BlockSpec::new(5, 4).is_err());
        let mut m = m2();
        assert_eq!(transpose_parallel(&mut m, 0), Err(TransposeError::Threads));
    }

    #[test]
    fn auto_block_size() {
        let dev = |l1| {
            DeviceProfile::new(
                "d",
                1,
                vec![
                    MemoryLevel {
                        label: LevelName::L1,
                        capacity: l1,
                        shared: false,
                    },
                    MemoryLevel {
                        label: LevelName::Dram,
                        capacity: 1 << 30,
                        shared: true,
                    },
                ],
            )
            .unwrap()
        };
        assert_eq!(BlockSpec::auto_size(&dev(32 * 1024)), 32);
        assert_eq!(BlockSpec::auto_size(&dev(48 * 1024)), 32);
        assert_eq!(BlockSpec::auto_size(&dev(128 * 1024)), 64);
        for l1 in [1024u64, 32 * 1024, 48 * 1024, 1 << 20] {
            let b = BlockSpec::auto_size(&dev(l1)) as u64;
            assert!(2 * b * b * 8 <= l1 / 2 || b == 1);
        }
    }
}
