//! Fixed-shape pairwise summation.
//!
//! The slice is split at `len / 2` recursively down to leaves of at most
//! [`LEAF`] elements, which are summed left to right. The tree depends only on
//! the length, so the sequential and parallel variants return bit-identical
//! results for any thread count.

use std::ops::Add;

const LEAF: usize = 32;
const PARALLEL_CUTOFF: usize = 2048;

pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    if xs.len() <= LEAF {
        return xs.iter().fold(T::default(), |acc, &x| acc + x);
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// Same tree as [`pairwise_sum`], with subtrees above the cutoff evaluated on
/// the rayon pool.
pub fn par_pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Default + Add<Output = T> + Send + Sync,
{
    if xs.len() <= PARALLEL_CUTOFF {
        return pairwise_sum(xs);
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    let (a, b) = rayon::join(|| par_pairwise_sum(lo), || par_pairwise_sum(hi));
    a + b
}
