//! Deterministic reductions and parallel node evaluation.
//!
//! Parallel loops collect per-node values in node order and reduce them
//! sequentially with pairwise summation, so results do not depend on the
//! number of worker threads.

use std::ops::Add;

use rayon::prelude::*;

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().fold(T::default(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Evaluates `f` on every item in parallel, preserving order.
pub fn par_map<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync,
{
    items.par_iter().map(&f).collect()
}

/// Column-wise pairwise sum of a row-major table with `width` columns.
pub fn pairwise_sum_columns<T>(rows: &[T], width: usize) -> Vec<T>
where
    T: Copy + Add<Output = T> + Default,
{
    if width == 0 {
        return Vec::new();
    }
    let count = rows.len() / width;
    let mut column = Vec::with_capacity(count);
    (0..width)
        .map(|c| {
            column.clear();
            column.extend((0..count).map(|r| rows[r * width + c]));
            pairwise_sum(&column)
        })
        .collect()
}
