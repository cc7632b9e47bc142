//! Rayon-backed executor. Each task owns its output rows, so results match
//! the sequential executor bit for bit.

use czk_core::exec::Executor;
use rayon::prelude::*;

use crate::error::{config, Result};

pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// A pool with `threads` workers; 0 picks the rayon default.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| config(format!("thread pool: {e}")))?;
        Ok(Pool { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn fill_rows(&self, out: &mut [f64], row_len: usize, f: &(dyn Fn(usize, &mut [f64]) + Sync)) {
        if row_len == 0 {
            return;
        }
        self.pool.install(|| out.par_chunks_mut(row_len).enumerate().for_each(|(i, row)| f(i, row)));
    }
}
