//! File formats, a parallel job runner and the `forrlab` command line on
//! top of [`forrlab_core`].

pub mod cli;
pub mod formats;
pub mod report;
pub mod runner;

pub use runner::Parallel;
