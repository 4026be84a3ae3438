//! Compensated (Neumaier) summation.
//!
//! Chunked reductions are combined in a fixed order, so results do not
//! depend on the number of worker threads.

use crate::par;

/// Running Neumaier sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: NeumaierSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

const CHUNK: usize = 4096;

/// Compensated sum of `term(i)` for `i in 0..len`.
pub fn compensated_sum<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks: Vec<usize> = (0..len.div_ceil(CHUNK)).collect();
    let partials: Vec<NeumaierSum> = par::map(&chunks, |&c| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(len);
        (start..end).map(&term).collect::<NeumaierSum>()
    });
    let mut total = NeumaierSum::new();
    for p in partials {
        total.merge(p);
    }
    total.value()
}
