//! Parallel execution of core jobs on a rayon pool.

use forrlab_core::job::{Job, Runner, Tally};
use rayon::prelude::*;

/// Environment variable consulted when no thread count is given.
pub const THREADS_ENV: &str = "FORRLAB_THREADS";

/// Runs the chunks of a job on a dedicated pool and merges the tallies in
/// chunk order, so reports match [`forrlab_core::job::Sequential`].
pub struct Parallel {
    pool: rayon::ThreadPool,
}

impl Parallel {
    /// `threads = None` (or `Some(0)`) uses the available parallelism.
    pub fn new(threads: Option<usize>) -> Result<Self, rayon::ThreadPoolBuildError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads.filter(|t| *t > 0) {
            builder = builder.num_threads(t);
        }
        Ok(Self {
            pool: builder.build()?,
        })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Runner for Parallel {
    fn run<J: Job>(&self, job: &J) -> J::Output {
        let tallies: Vec<J::Tally> = self
            .pool
            .install(|| (0..job.chunks()).into_par_iter().map(|i| job.run_chunk(i)).collect());
        let mut total = J::Tally::default();
        for t in tallies {
            total.merge(t);
        }
        job.finish(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use forrlab_core::job::Sequential;
    use forrlab_core::rorrelation::{HaarMaxJob, L1ConcentrationJob, SearchMode};
    use forrlab_core::verifier::ConditionalJob;

    #[test]
    fn parallel_matches_sequential() {
        let par = Parallel::new(Some(4)).unwrap();
        assert_eq!(par.threads(), 4);
        let job = L1ConcentrationJob::new(16, 5_000, 3).unwrap();
        assert_eq!(par.run(&job), Sequential.run(&job));
        let job = HaarMaxJob::new(8, 12, SearchMode::Exhaustive, 4).unwrap();
        assert_eq!(par.run(&job), Sequential.run(&job));
        let job = ConditionalJob::new(6, 1, 3, 9_000, 5).unwrap();
        assert_eq!(par.run(&job), Sequential.run(&job));
    }
}
