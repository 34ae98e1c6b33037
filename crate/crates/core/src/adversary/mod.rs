//! Classical query adversaries and Monte-Carlo advantage estimation.
//!
//! A strategy sees only a [`QueryAccess`]: the arity, its budget, and point
//! queries to `f` and `g`. The instance parameters stay hidden. Trials are
//! run in yes/no pairs: pair `k` draws one parameter set and one strategy
//! seed, and its two trials differ only in the label. Each trial is still
//! distributed exactly as a fresh draw from its label's distribution.

mod strategies;

use alloc::string::{String, ToString};
use alloc::sync::Arc;

pub use strategies::{
    builtin_strategies, strategy_by_name, CollisionHunter, FullRead, OriginProbe, RandomCorrelator,
    FULL_READ_MAX_ARITY,
};

use crate::boolfun::Sign;
use crate::error::{invalid, Error, Result};
use crate::f2linalg::BitVector;
use crate::instances::{sample_params, HFamily, Label, Oracle, Variant};
use crate::job::{chunk_count, chunk_range, Job, Tally};
use crate::seed::rng_for;
use crate::stats::hoeffding_half_width;
use crate::Rng;

/// Confidence level of the reported interval is `1 - CI_ALPHA`.
pub const CI_ALPHA: f64 = 0.01;

const PAIRS_PER_CHUNK: u64 = 128;

/// What a strategy may do with an instance.
pub trait QueryAccess {
    fn arity(&self) -> usize;
    fn budget(&self) -> u64;
    fn used(&self) -> u64;
    fn query_f(&mut self, x: &BitVector) -> Result<Sign>;
    fn query_g(&mut self, y: &BitVector) -> Result<Sign>;

    fn remaining(&self) -> u64 {
        self.budget().saturating_sub(self.used())
    }
}

/// An oracle behind a hard query budget. Queries past the budget fail with
/// [`Error::BudgetExceeded`] and are not answered.
pub struct BudgetedOracle<'a> {
    oracle: &'a mut Oracle,
    budget: u64,
}

impl<'a> BudgetedOracle<'a> {
    pub fn new(oracle: &'a mut Oracle, budget: u64) -> Self {
        Self { oracle, budget }
    }

    fn charge(&self) -> Result<()> {
        if self.oracle.total_queries() >= self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        Ok(())
    }
}

impl QueryAccess for BudgetedOracle<'_> {
    fn arity(&self) -> usize {
        self.oracle.n()
    }

    fn budget(&self) -> u64 {
        self.budget
    }

    fn used(&self) -> u64 {
        self.oracle.total_queries()
    }

    fn query_f(&mut self, x: &BitVector) -> Result<Sign> {
        self.charge()?;
        self.oracle.query_f(x)
    }

    fn query_g(&mut self, y: &BitVector) -> Result<Sign> {
        self.charge()?;
        self.oracle.query_g(y)
    }
}

/// A (randomised) decision procedure. Given the same RNG state it must make
/// the same queries and return the same verdict.
pub trait Strategy: Send + Sync {
    fn name(&self) -> &str;
    fn decide(&self, access: &mut dyn QueryAccess, rng: &mut Rng) -> Result<Label>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub variant: Variant,
    pub family: HFamily,
    pub budget: u64,
    pub trials: u64,
    /// Record yes-instances as "no" and vice versa.
    pub swap_labels: bool,
}

impl ExperimentConfig {
    pub fn new(n: usize, variant: Variant, family: HFamily, budget: u64, trials: u64) -> Self {
        Self {
            n,
            variant,
            family,
            budget,
            trials,
            swap_labels: false,
        }
    }
}

/// `floor(2^{n/4} / (6 sqrt(n)))`, the depth below which query paths avoid
/// h-input collisions with probability at least 9/10.
pub fn barrier_budget(n: usize) -> u64 {
    let v = libm::exp2(n as f64 / 4.0) / (6.0 * libm::sqrt(n as f64));
    libm::floor(v) as u64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AdvantageTally {
    pub yes_trials: u64,
    pub yes_said_yes: u64,
    pub no_trials: u64,
    pub no_said_yes: u64,
    /// Trials stopped for exceeding the budget.
    pub aborted: u64,
    /// Trials that failed for any other reason.
    pub failed: u64,
    pub max_queries: u64,
}

impl Tally for AdvantageTally {
    fn merge(&mut self, o: Self) {
        self.yes_trials += o.yes_trials;
        self.yes_said_yes += o.yes_said_yes;
        self.no_trials += o.no_trials;
        self.no_said_yes += o.no_said_yes;
        self.aborted += o.aborted;
        self.failed += o.failed;
        self.max_queries = self.max_queries.max(o.max_queries);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdvantageReport {
    pub strategy: String,
    pub n: usize,
    pub variant: Variant,
    pub family: HFamily,
    pub budget: u64,
    pub trials: u64,
    pub p_yes: f64,
    pub p_no: f64,
    /// `p_yes - p_no`.
    pub advantage: f64,
    /// `2 * sqrt(ln(2 / 0.01) / (2 * trials))`.
    pub ci: f64,
    pub aborted: u64,
    pub failed: u64,
    pub max_queries: u64,
}

pub struct AdvantageJob<'a> {
    strategy: &'a dyn Strategy,
    config: ExperimentConfig,
    seed: u64,
}

impl<'a> AdvantageJob<'a> {
    pub fn new(strategy: &'a dyn Strategy, config: ExperimentConfig, seed: u64) -> Result<Self> {
        if config.trials == 0 {
            return Err(invalid("at least one trial is required"));
        }
        // Surface configuration errors once instead of per trial.
        sample_params(config.n, config.variant, config.family, Label::Yes, &mut rng_for(seed, "adv-check", 0))?;
        Ok(Self {
            strategy,
            config,
            seed,
        })
    }

    fn pairs(&self) -> u64 {
        self.config.trials.div_ceil(2)
    }

    fn run_pair(&self, pair: u64, tally: &mut AdvantageTally) {
        let cfg = &self.config;
        let params = match sample_params(
            cfg.n,
            cfg.variant,
            cfg.family,
            Label::Yes,
            &mut rng_for(self.seed, "adv-instance", pair),
        ) {
            Ok(p) => p,
            Err(_) => {
                tally.failed += 2;
                return;
            }
        };
        for (slot, recorded) in [(0u64, Label::Yes), (1, Label::No)] {
            if 2 * pair + slot >= cfg.trials {
                break;
            }
            let actual = if cfg.swap_labels { recorded.flipped() } else { recorded };
            let mut oracle = Oracle::new(Arc::new(params.with_label(actual)));
            let mut access = BudgetedOracle::new(&mut oracle, cfg.budget);
            let verdict = self
                .strategy
                .decide(&mut access, &mut rng_for(self.seed, "adv-strategy", pair));
            tally.max_queries = tally.max_queries.max(oracle.total_queries());
            match verdict {
                Ok(guess) => {
                    let said_yes = u64::from(guess == Label::Yes);
                    match recorded {
                        Label::Yes => {
                            tally.yes_trials += 1;
                            tally.yes_said_yes += said_yes;
                        }
                        Label::No => {
                            tally.no_trials += 1;
                            tally.no_said_yes += said_yes;
                        }
                    }
                }
                Err(Error::BudgetExceeded { .. }) => tally.aborted += 1,
                Err(_) => tally.failed += 1,
            }
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Job for AdvantageJob<'_> {
    type Tally = AdvantageTally;
    type Output = AdvantageReport;

    fn chunks(&self) -> u64 {
        chunk_count(self.pairs(), PAIRS_PER_CHUNK)
    }

    fn run_chunk(&self, index: u64) -> AdvantageTally {
        let mut tally = AdvantageTally::default();
        for pair in chunk_range(self.pairs(), PAIRS_PER_CHUNK, index) {
            self.run_pair(pair, &mut tally);
        }
        tally
    }

    fn finish(&self, t: AdvantageTally) -> AdvantageReport {
        let p_yes = ratio(t.yes_said_yes, t.yes_trials);
        let p_no = ratio(t.no_said_yes, t.no_trials);
        AdvantageReport {
            strategy: self.strategy.name().to_string(),
            n: self.config.n,
            variant: self.config.variant,
            family: self.config.family,
            budget: self.config.budget,
            trials: self.config.trials,
            p_yes,
            p_no,
            advantage: p_yes - p_no,
            ci: 2.0 * hoeffding_half_width(self.config.trials, CI_ALPHA),
            aborted: t.aborted,
            failed: t.failed,
            max_queries: t.max_queries,
        }
    }
}

/// Runs the experiment on the current thread.
pub fn run_experiment(
    strategy: &dyn Strategy,
    config: ExperimentConfig,
    seed: u64,
) -> Result<AdvantageReport> {
    Ok(crate::job::run_sequential(&AdvantageJob::new(strategy, config, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    struct Greedy;

    impl Strategy for Greedy {
        fn name(&self) -> &str {
            "greedy"
        }

        fn decide(&self, access: &mut dyn QueryAccess, _rng: &mut Rng) -> Result<Label> {
            let zero = BitVector::zeros(access.arity());
            loop {
                access.query_f(&zero)?;
            }
        }
    }

    fn cfg(n: usize, variant: Variant, budget: u64, trials: u64) -> ExperimentConfig {
        ExperimentConfig::new(n, variant, HFamily::UniformLazy, budget, trials)
    }

    #[test]
    fn barrier_budgets() {
        assert_eq!(barrier_budget(16), 0);
        assert_eq!(barrier_budget(20), 1);
        assert_eq!(barrier_budget(40), 26);
    }

    #[test]
    fn builtin_names() {
        let names: Vec<String> = builtin_strategies().iter().map(|s| s.name().to_string()).collect();
        assert_eq!(names, ["origin-probe", "random-correlator", "collision-hunter", "full-read"]);
        assert!(strategy_by_name("full-read").is_some());
        assert!(strategy_by_name("psychic").is_none());
    }

    #[test]
    fn origin_probe_breaks_naive_variant() {
        let r = run_experiment(&OriginProbe, cfg(8, Variant::Naive, 2, 10_000), 1).unwrap();
        assert_eq!(r.advantage, 1.0);
        assert_eq!((r.p_yes, r.p_no), (1.0, 0.0));
        assert_eq!(r.max_queries, 2);
    }

    #[test]
    fn origin_probe_fails_on_standard_variant() {
        let r = run_experiment(&OriginProbe, cfg(16, Variant::Standard, 2, 10_000), 2).unwrap();
        assert!(r.advantage.abs() <= r.ci + 2.0 * 2f64.powi(-8), "{r:?}");
    }

    #[test]
    fn full_read_decides_exactly() {
        let r = run_experiment(&FullRead, cfg(8, Variant::Standard, 512, 2_000), 3).unwrap();
        assert_eq!(r.advantage, 1.0);
        assert_eq!(r.max_queries, 512);
        // One query short of the tables: it must guess.
        let r = run_experiment(&FullRead, cfg(8, Variant::Standard, 511, 2_000), 3).unwrap();
        assert!(r.advantage.abs() <= r.ci);
        assert_eq!(r.max_queries, 0);
    }

    #[test]
    fn random_correlator_regimes() {
        let small = run_experiment(&RandomCorrelator, cfg(4, Variant::Standard, 32, 10_000), 4).unwrap();
        assert!(small.advantage > 0.5, "{small:?}");
        let large = run_experiment(&RandomCorrelator, cfg(16, Variant::Standard, 64, 10_000), 5).unwrap();
        assert!(large.advantage.abs() < 0.05, "{large:?}");
    }

    #[test]
    fn budget_violations_abort_trials() {
        let r = run_experiment(&Greedy, cfg(6, Variant::Standard, 5, 10), 6).unwrap();
        assert_eq!(r.aborted, 10);
        assert_eq!(r.max_queries, 5);
        assert_eq!(r.failed, 0);
    }

    #[test]
    fn swapping_labels_negates_advantage() {
        for strategy in builtin_strategies() {
            let base = cfg(6, Variant::Standard, 24, 2_000);
            let swapped = ExperimentConfig {
                swap_labels: true,
                ..base
            };
            let a = run_experiment(strategy.as_ref(), base, 7).unwrap();
            let b = run_experiment(strategy.as_ref(), swapped, 7).unwrap();
            assert_eq!(a.advantage, -b.advantage, "{}", strategy.name());
            assert_eq!(a.p_yes, b.p_no);
        }
    }

    #[test]
    fn queries_stay_within_budget() {
        for strategy in builtin_strategies() {
            for budget in [0u64, 1, 2, 3, 7, 40] {
                let r = run_experiment(strategy.as_ref(), cfg(4, Variant::Standard, budget, 50), 8).unwrap();
                assert!(r.max_queries <= budget);
                assert_eq!(r.aborted + r.failed, 0);
            }
        }
    }

    #[test]
    fn odd_trial_counts_and_config_errors() {
        let r = run_experiment(&OriginProbe, cfg(4, Variant::Naive, 2, 1), 9).unwrap();
        assert_eq!(r.p_yes, 1.0);
        assert_eq!(r.p_no, 0.0);
        assert!(run_experiment(&OriginProbe, cfg(5, Variant::Naive, 2, 10), 9).is_err());
        assert!(run_experiment(&OriginProbe, cfg(4, Variant::Naive, 2, 0), 9).is_err());
    }

    #[test]
    fn report_ci_formula() {
        let r = run_experiment(&OriginProbe, cfg(4, Variant::Standard, 0, 10_000), 10).unwrap();
        let expect = (200f64.ln() / 20_000.0).sqrt() * 2.0;
        assert!((r.ci - expect).abs() < 1e-15);
    }
}
