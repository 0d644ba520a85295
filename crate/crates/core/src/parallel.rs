//! Work partitioning shared by the threaded kernels.

use std::ops::Range;

/// Splits `0..len` into `parts` contiguous ranges whose lengths differ by at
/// most one. Trailing ranges are empty when `parts > len`.
pub fn static_ranges(len: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.max(1);
    let base = len / parts;
    let extra = len % parts;
    let mut start = 0;
    (0..parts)
        .map(|p| {
            let size = base + usize::from(p < extra);
            let r = start..start + size;
            start += size;
            r
        })
        .collect()
}

/// Raw pointer to a buffer that several workers mutate at provably disjoint
/// indices.
#[derive(Clone, Copy)]
pub(crate) struct SharedMut<T> {
    ptr: *mut T,
    len: usize,
}

// SAFETY: callers guarantee that no two threads access the same index.
unsafe impl<T: Send> Send for SharedMut<T> {}
unsafe impl<T: Send> Sync for SharedMut<T> {}

impl<T: Copy> SharedMut<T> {
    pub(crate) fn new(data: &mut [T]) -> Self {
        SharedMut {
            ptr: data.as_mut_ptr(),
            len: data.len(),
        }
    }

    /// # Safety
    /// No other thread may access `a` or `b` concurrently.
    #[inline(always)]
    pub(crate) unsafe fn swap(&self, a: usize, b: usize) {
        debug_assert!(a < self.len && b < self.len);
        std::ptr::swap(self.ptr.add(a), self.ptr.add(b));
    }

    /// # Safety
    /// `start..start + len` must be in bounds and exclusively owned by the caller.
    #[inline(always)]
    pub(crate) unsafe fn slice_mut<'a>(&self, start: usize, len: usize) -> &'a mut [T] {
        debug_assert!(start + len <= self.len);
        std::slice::from_raw_parts_mut(self.ptr.add(start), len)
    }
}
