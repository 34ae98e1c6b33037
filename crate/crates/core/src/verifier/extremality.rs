use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{merge_dumps, push_dump, LemmaReport, Lemma, Mode};
use crate::boolfun::{dual_from_bent, forrelation, is_bent, Dyadic, TruthTable};
use crate::error::{invalid, Result};
use crate::f2linalg::{BitMatrix, BitVector, HardMatrices};
use crate::instances::{sample_params, HFamily, HFunction, HardParams, Label, Variant};
use crate::job::{chunk_count, chunk_range, Job, Runner, Tally};
use crate::seed::rng_for;

const SAMPLES_PER_CHUNK: u64 = 64;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtremalityTally {
    instances: u64,
    forr_failures: u64,
    bent_checked: u64,
    bent_failures: u64,
    dumps: Vec<String>,
}

impl Tally for ExtremalityTally {
    fn merge(&mut self, o: Self) {
        self.instances += o.instances;
        self.forr_failures += o.forr_failures;
        self.bent_checked += o.bent_checked;
        self.bent_failures += o.bent_failures;
        merge_dumps(&mut self.dumps, o.dumps);
    }
}

/// Forrelation of both labels of every checked parameter setting, plus
/// bentness of `f` and `g = dual(f)` on yes instances.
pub struct ExtremalityJob {
    n: usize,
    variant: Variant,
    family: HFamily,
    mode: Mode,
    seed: u64,
    /// All `(A, a, h)` settings in exhaustive mode.
    settings: Vec<(HardMatrices, HFunction)>,
}

fn expected_forr(n: usize, variant: Variant, label: Label) -> Dyadic {
    match (variant, label) {
        (_, Label::Yes) => Dyadic::ONE,
        (Variant::Sketch, Label::No) => Dyadic::new(1, (n / 2) as u32),
        (_, Label::No) => -Dyadic::ONE,
    }
}

/// Every `(A, a, h)` at `n = 2`: 6 matrices, 4 shifts, 4 tables for `h`.
fn all_settings_n2() -> Result<Vec<(HardMatrices, HFunction)>> {
    let mut out = Vec::new();
    for index in 0..16u64 {
        let a = BitMatrix::from_index(2, 2, index);
        if a.rank() < 2 {
            continue;
        }
        for shift in 0..4u64 {
            let m = HardMatrices::from_parts(a.clone(), BitVector::from_u64(2, shift))?;
            for table in 0..4u64 {
                let h = TruthTable::from_words(1, alloc::vec![table])?;
                out.push((m.clone(), HFunction::Table(h)));
            }
        }
    }
    Ok(out)
}

impl ExtremalityJob {
    pub fn new(n: usize, variant: Variant, family: HFamily, mode: Mode, seed: u64) -> Result<Self> {
        let settings = match mode {
            Mode::Exhaustive if n == 2 => all_settings_n2()?,
            Mode::Exhaustive => return Err(invalid("exhaustive extremality is only available at n = 2")),
            Mode::Sampled { samples: 0 } => return Err(invalid("at least one sample is required")),
            Mode::Sampled { .. } => {
                // Fail early on bad arity or family.
                sample_params(n, variant, family, Label::Yes, &mut rng_for(seed, "extremality-check", 0))?;
                Vec::new()
            }
        };
        Ok(Self {
            n,
            variant,
            family,
            mode,
            seed,
            settings,
        })
    }

    fn items(&self) -> u64 {
        match self.mode {
            Mode::Exhaustive => self.settings.len() as u64,
            Mode::Sampled { samples } => samples,
        }
    }

    fn check(&self, params: &HardParams, tally: &mut ExtremalityTally) {
        for label in [Label::Yes, Label::No] {
            let p = params.with_label(label);
            tally.instances += 1;
            let outcome = p.materialize().and_then(|(f, g)| Ok((forrelation(&f, &g)?, f, g)));
            let (value, f, g) = match outcome {
                Ok(v) => v,
                Err(e) => {
                    tally.forr_failures += 1;
                    push_dump(&mut tally.dumps, format!("{e}: {p:?}"));
                    continue;
                }
            };
            let want = expected_forr(self.n, self.variant, label);
            if value != want {
                tally.forr_failures += 1;
                push_dump(&mut tally.dumps, format!("forr = {value}, expected {want}: {p:?}"));
            }
            if label == Label::Yes {
                tally.bent_checked += 1;
                let dual_ok = dual_from_bent(&f).map(|d| d == g).unwrap_or(false);
                if !is_bent(&f) || !dual_ok {
                    tally.bent_failures += 1;
                    push_dump(&mut tally.dumps, format!("f not bent or g not its dual: {p:?}"));
                }
            }
        }
    }
}

impl Job for ExtremalityJob {
    type Tally = ExtremalityTally;
    type Output = LemmaReport;

    fn chunks(&self) -> u64 {
        chunk_count(self.items(), SAMPLES_PER_CHUNK)
    }

    fn run_chunk(&self, index: u64) -> ExtremalityTally {
        let mut tally = ExtremalityTally::default();
        let range = chunk_range(self.items(), SAMPLES_PER_CHUNK, index);
        match self.mode {
            Mode::Exhaustive => {
                for i in range {
                    let (m, h) = &self.settings[i as usize];
                    match HardParams::new(m.clone(), h.clone(), self.variant, Label::Yes) {
                        Ok(p) => self.check(&p, &mut tally),
                        Err(e) => {
                            tally.forr_failures += 1;
                            push_dump(&mut tally.dumps, e.to_string());
                        }
                    }
                }
            }
            Mode::Sampled { .. } => {
                let mut rng = rng_for(self.seed, "extremality", index);
                for _ in range {
                    match sample_params(self.n, self.variant, self.family, Label::Yes, &mut rng) {
                        Ok(p) => self.check(&p, &mut tally),
                        Err(e) => {
                            tally.forr_failures += 1;
                            push_dump(&mut tally.dumps, e.to_string());
                        }
                    }
                }
            }
        }
        tally
    }

    fn finish(&self, t: ExtremalityTally) -> LemmaReport {
        let no_value = expected_forr(self.n, self.variant, Label::No);
        LemmaReport {
            lemma: Lemma::Extremality,
            n: self.n,
            mode: self.mode,
            expected: format!(
                "{} variant: forr = 1 on yes, {no_value} on no; yes-side f bent with g its dual",
                self.variant
            ),
            observed: format!(
                "{} instances, {} forrelation mismatches, {} bentness failures",
                t.instances, t.forr_failures, t.bent_failures
            ),
            pass: t.instances > 0 && t.forr_failures == 0 && t.bent_failures == 0,
            counts: alloc::vec![
                ("settings".to_string(), self.items()),
                ("instances".to_string(), t.instances),
                ("forr_failures".to_string(), t.forr_failures),
                ("bent_checked".to_string(), t.bent_checked),
                ("bent_failures".to_string(), t.bent_failures),
            ],
            failures: t.dumps,
        }
    }
}

pub fn verify_extremality<R: Runner>(
    runner: &R,
    n: usize,
    variant: Variant,
    family: HFamily,
    mode: Mode,
    seed: u64,
) -> Result<LemmaReport> {
    Ok(runner.run(&ExtremalityJob::new(n, variant, family, mode, seed)?))
}
