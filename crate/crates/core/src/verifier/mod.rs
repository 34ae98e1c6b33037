//! Exhaustive and sampled checks of the facts behind the lower bound.
//!
//! Every check returns a [`LemmaReport`] carrying the expected value, what
//! was observed, the raw counts and a pass flag. Exhaustive modes compare
//! exact integers or rationals. Sampled modes use a 3σ binomial band or a
//! chi-square test at significance 0.001, as stated in each report.

mod conditional;
mod extremality;
mod matrices;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use conditional::{default_query_shape, verify_conditional_uniformity, ConditionalJob};
pub use extremality::{verify_extremality, ExtremalityJob};
pub use matrices::{
    default_collision_pairs, verify_collision_lemma, verify_marginal_uniformity,
    verify_pairwise_collisions, verify_row_rank_fraction, verify_total_variation,
};

use crate::error::{invalid, Result};
use crate::instances::{HFamily, Variant};
use crate::job::Runner;

/// Failure dumps kept per report.
pub const MAX_DUMPS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lemma {
    Extremality,
    MarginalUniformity,
    TotalVariation,
    RowRankFraction,
    Collision,
    PairwiseCollisions,
    ConditionalUniformity,
}

impl Lemma {
    pub const ALL: [Lemma; 7] = [
        Lemma::Extremality,
        Lemma::MarginalUniformity,
        Lemma::TotalVariation,
        Lemma::RowRankFraction,
        Lemma::Collision,
        Lemma::PairwiseCollisions,
        Lemma::ConditionalUniformity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::Extremality => "extremality",
            Lemma::MarginalUniformity => "marginal",
            Lemma::TotalVariation => "tvd",
            Lemma::RowRankFraction => "rank",
            Lemma::Collision => "collision",
            Lemma::PairwiseCollisions => "pairwise",
            Lemma::ConditionalUniformity => "conditional",
        }
    }

    /// Whether the check can run exhaustively at arity `n`.
    pub fn exhaustive_supported(self, n: usize) -> bool {
        match self {
            Lemma::Extremality => n == 2,
            Lemma::MarginalUniformity | Lemma::TotalVariation => n == 2 || n == 4,
            Lemma::RowRankFraction => n <= 6,
            Lemma::Collision | Lemma::PairwiseCollisions => n <= 4,
            Lemma::ConditionalUniformity => false,
        }
    }

    /// Whether a sampled run exists.
    pub fn sampling_supported(self) -> bool {
        !matches!(self, Lemma::MarginalUniformity | Lemma::TotalVariation)
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Lemma {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| invalid(alloc::format!("unknown lemma {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { samples: u64 },
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub n: usize,
    pub mode: Mode,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    /// Named raw counts behind `observed`.
    pub counts: Vec<(String, u64)>,
    /// Dumps of failing cases, at most [`MAX_DUMPS`].
    pub failures: Vec<String>,
}

impl LemmaReport {
    pub fn count(&self, name: &str) -> Option<u64> {
        self.counts.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

pub(crate) fn push_dump(dumps: &mut Vec<String>, dump: String) {
    if dumps.len() < MAX_DUMPS {
        dumps.push(dump);
    }
}

pub(crate) fn merge_dumps(dumps: &mut Vec<String>, other: Vec<String>) {
    for d in other {
        push_dump(dumps, d);
    }
}

/// Checks run by [`verify_all`]: exhaustive where the arity allows it when
/// `exhaustive` is set, sampled with `samples` draws otherwise. Checks that
/// exist only in exhaustive form are skipped at arities they do not cover.
pub fn verify_all<R: Runner>(
    runner: &R,
    n: usize,
    exhaustive: bool,
    samples: u64,
    seed: u64,
) -> Result<Vec<LemmaReport>> {
    let mut reports = Vec::new();
    for lemma in Lemma::ALL {
        if let Some(report) = verify_lemma(runner, lemma, n, exhaustive, samples, seed)? {
            reports.push(report);
        }
    }
    Ok(reports)
}

/// Runs one check with default parameters; `None` if the check has no mode
/// applicable at this arity.
pub fn verify_lemma<R: Runner>(
    runner: &R,
    lemma: Lemma,
    n: usize,
    exhaustive: bool,
    samples: u64,
    seed: u64,
) -> Result<Option<LemmaReport>> {
    let mode = if exhaustive && lemma.exhaustive_supported(n) {
        Mode::Exhaustive
    } else if lemma.sampling_supported() {
        Mode::Sampled { samples }
    } else if lemma.exhaustive_supported(n) {
        Mode::Exhaustive
    } else {
        return Ok(None);
    };
    let sub = crate::seed::derive_seed(seed, lemma.name(), n as u64);
    let report = match lemma {
        Lemma::Extremality => {
            let family = if n / 2 <= 20 {
                HFamily::ExplicitTable
            } else {
                HFamily::UniformLazy
            };
            verify_extremality(runner, n, Variant::Standard, family, mode, sub)?
        }
        Lemma::MarginalUniformity => verify_marginal_uniformity(runner, n)?,
        Lemma::TotalVariation => verify_total_variation(runner, n)?,
        Lemma::RowRankFraction => verify_row_rank_fraction(runner, n, mode, sub)?,
        Lemma::Collision => {
            let pairs = default_collision_pairs(n, 10, sub)?;
            verify_collision_lemma(runner, n, &pairs, mode, sub)?
        }
        Lemma::PairwiseCollisions => verify_pairwise_collisions(runner, n, mode, sub)?,
        Lemma::ConditionalUniformity => {
            let (k, ell) = default_query_shape(n);
            verify_conditional_uniformity(runner, n, k, ell, samples, sub)?
        }
    };
    Ok(Some(report))
}
