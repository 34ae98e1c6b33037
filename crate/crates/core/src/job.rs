//! Chunked computations with mergeable tallies.
//!
//! A [`Job`] splits its work into `chunks()` pieces. Each chunk is a pure
//! function of the job and its index (sampled chunks derive their own RNG
//! from the index), so running chunks sequentially here or in parallel
//! elsewhere yields the same report.

pub trait Tally: Default {
    fn merge(&mut self, other: Self);
}

pub trait Job: Sync {
    type Tally: Tally + Send;
    type Output;

    fn chunks(&self) -> u64;
    fn run_chunk(&self, index: u64) -> Self::Tally;
    fn finish(&self, tally: Self::Tally) -> Self::Output;
}

/// Executes jobs. Implementations may run chunks in any order or in
/// parallel but must merge tallies in chunk index order.
pub trait Runner {
    fn run<J: Job>(&self, job: &J) -> J::Output;
}

/// Runs chunks one after another on the current thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Runner for Sequential {
    fn run<J: Job>(&self, job: &J) -> J::Output {
        run_sequential(job)
    }
}

pub fn run_sequential<J: Job>(job: &J) -> J::Output {
    let mut total = J::Tally::default();
    for i in 0..job.chunks() {
        total.merge(job.run_chunk(i));
    }
    job.finish(total)
}

/// Number of chunks needed to cover `items` at `chunk_size` per chunk.
pub fn chunk_count(items: u64, chunk_size: u64) -> u64 {
    items.div_ceil(chunk_size)
}

/// Half-open item range covered by chunk `index`.
pub fn chunk_range(items: u64, chunk_size: u64, index: u64) -> core::ops::Range<u64> {
    let start = index * chunk_size;
    start..(start + chunk_size).min(items)
}

impl Tally for u64 {
    fn merge(&mut self, other: Self) {
        *self += other;
    }
}

impl<A: Tally, B: Tally> Tally for (A, B) {
    fn merge(&mut self, other: Self) {
        self.0.merge(other.0);
        self.1.merge(other.1);
    }
}

/// Concatenation. Runners merge chunk tallies in index order, so the result
/// is in item order.
impl<T: Send> Tally for alloc::vec::Vec<T> {
    fn merge(&mut self, mut other: Self) {
        self.append(&mut other);
    }
}

/// Element-wise sum of count vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counts(pub alloc::vec::Vec<u64>);

impl Counts {
    pub fn zeros(len: usize) -> Self {
        Self(alloc::vec![0; len])
    }
}

impl Tally for Counts {
    fn merge(&mut self, other: Self) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}
