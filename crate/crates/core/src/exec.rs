//! Execution strategy for the embarrassingly parallel loops.
//!
//! Every task writes its own output slot, so the result never depends on
//! how the work was scheduled.

use alloc::vec;
use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Calls `f(i, row)` for every `row_len`-sized chunk of `out`.
    fn fill_rows(&self, out: &mut [f64], row_len: usize, f: &(dyn Fn(usize, &mut [f64]) + Sync));

    /// `[f(0), f(1), ..., f(n-1)]`.
    fn map(&self, n: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        let mut out = vec![0.0; n];
        self.fill_rows(&mut out, 1, &|i, row| row[0] = f(i));
        out
    }
}

/// Runs everything on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn fill_rows(&self, out: &mut [f64], row_len: usize, f: &(dyn Fn(usize, &mut [f64]) + Sync)) {
        if row_len == 0 {
            return;
        }
        for (i, row) in out.chunks_mut(row_len).enumerate() {
            f(i, row);
        }
    }
}
