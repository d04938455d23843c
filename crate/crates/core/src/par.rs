//! Reductions with a fixed association order.
//!
//! Rayon's adaptive splitting makes `sum` depend on scheduling. Summing fixed
//! chunks and then the chunk totals in order gives the same bits on every run
//! and for every thread count.

use rayon::prelude::*;

const CHUNK: usize = 4096;

pub(crate) trait DeterministicSum: IndexedParallelIterator + Sized {
    fn det_sum(self) -> f64
    where
        Self: IndexedParallelIterator<Item = f64>,
    {
        let parts: Vec<f64> = self.fold_chunks(CHUNK, || 0.0, |a, b| a + b).collect();
        parts.iter().sum()
    }

    fn det_sum_pair(self) -> (f64, f64)
    where
        Self: IndexedParallelIterator<Item = (f64, f64)>,
    {
        let parts: Vec<(f64, f64)> = self
            .fold_chunks(CHUNK, || (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
            .collect();
        parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    }
}

impl<I: IndexedParallelIterator> DeterministicSum for I {}
