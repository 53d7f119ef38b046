//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the maps below run on the rayon pool unless
//! parallelism was switched off at runtime. Results are collected in input
//! order either way, so output never depends on the schedule.

use std::sync::atomic::{AtomicBool, Ordering};

use nalgebra::DMatrix;

use crate::linalg::{CMat, C64};

static ENABLED: AtomicBool = AtomicBool::new(true);

/// Toggle the parallel path at runtime. Has no effect without the feature.
pub fn set_enabled(on: bool) {
    ENABLED.store(on, Ordering::SeqCst);
}

pub fn enabled() -> bool {
    cfg!(feature = "parallel") && ENABLED.load(Ordering::SeqCst)
}

/// Order-preserving map over a slice.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if enabled() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Order-preserving map over `0..n`.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if enabled() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Build a real matrix column by column.
pub fn assemble_columns<F>(nrows: usize, ncols: usize, col: F) -> DMatrix<f64>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    let cols = map_range(ncols, col);
    let mut m = DMatrix::zeros(nrows, ncols);
    for (j, c) in cols.iter().enumerate() {
        debug_assert_eq!(c.len(), nrows);
        for (i, v) in c.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    m
}

const BLOCK: usize = 16;

/// Complex matrix product split over column blocks of `b`.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let n = b.ncols();
    if !enabled() || n < 2 * BLOCK || a.nrows() * a.ncols() < 4096 {
        return a * b;
    }
    let starts: Vec<usize> = (0..n).step_by(BLOCK).collect();
    let blocks = map(&starts, |&s| {
        let w = BLOCK.min(n - s);
        a * b.columns(s, w)
    });
    let mut out = CMat::zeros(a.nrows(), n);
    for (s, blk) in starts.iter().zip(blocks.iter()) {
        out.columns_mut(*s, blk.ncols()).copy_from(blk);
    }
    out
}

/// Sum of products `Σ a_k b_k`, the workhorse of operator assembly.
pub fn sum_products(pairs: &[(&CMat, &CMat)]) -> CMat {
    let prods = map(pairs, |(a, b)| matmul(a, b));
    let mut it = prods.into_iter();
    let mut acc = it.next().expect("empty product list");
    for p in it {
        acc += p;
    }
    acc
}

pub fn zero_like(rows: usize, cols: usize) -> CMat {
    CMat::from_element(rows, cols, C64::new(0.0, 0.0))
}
