//! The `forrlab` command line.
//!
//! Every subcommand is deterministic given `--seed`. Machine-readable
//! output goes to stdout, a human summary to stderr. Exit status is 0 when
//! all checks pass, 1 when a check fails and 2 on usage or input errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use forrlab_core::adversary::{barrier_budget, builtin_strategies, strategy_by_name, AdvantageJob, ExperimentConfig};
use forrlab_core::boolfun::{forrelation, TruthTable, DEFAULT_ARITY_CAP};
use forrlab_core::instances::{sample_params, HFamily, Label, Variant};
use forrlab_core::job::Runner;
use forrlab_core::quantum::{accept_probability, sample_outcome, simulate_circuit, Measurement, STATE_VECTOR_MAX_ARITY};
use forrlab_core::rorrelation::{
    expected_l1_ratio, max_over_g, rorr, sample_haar_orthogonal, HaarMaxJob, L1ConcentrationJob, OrthogonalMatrix,
    SearchMode, DEFAULT_RESTARTS,
};
use forrlab_core::seed::rng_for;
use forrlab_core::verifier::{
    default_collision_pairs, verify_all, verify_collision_lemma, verify_conditional_uniformity, verify_extremality,
    verify_marginal_uniformity, verify_pairwise_collisions, verify_row_rank_fraction, verify_total_variation, Lemma,
    LemmaReport, Mode,
};
use serde_json::{json, Map, Value};

use crate::formats::{self, read_instance, read_table, InstanceFile};
use crate::report::{self, envelope};
use crate::runner::{Parallel, THREADS_ENV};

#[derive(Debug, Parser)]
#[command(name = "forrlab", version, about = "Extremal Forrelation instances, checks and experiments")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an instance and write its parameters as JSON.
    Gen(GenArgs),
    /// Print the Forrelation of an instance or of two truth tables.
    Eval(EvalArgs),
    /// Run the one-query quantum algorithm.
    Qsim(QsimArgs),
    /// Estimate the advantage of classical query strategies.
    Adv(AdvArgs),
    /// Check the structural lemmas.
    Verify(VerifyArgs),
    /// Forrelation with arbitrary orthogonal matrices.
    #[command(subcommand)]
    Rorr(RorrCommand),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "standard")]
    pub variant: Variant,
    /// uniform, table, poly:<d> or prf.
    #[arg(long, default_value = "uniform")]
    pub family: HFamily,
    #[arg(long, default_value = "yes")]
    pub label: Label,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write f.tt and g.tt into this directory.
    #[arg(long)]
    pub tables: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FunctionSource {
    /// Instance JSON written by `gen`.
    #[arg(long, conflicts_with_all = ["f", "g"], required_unless_present_all = ["f", "g"])]
    pub instance: Option<PathBuf>,
    /// Truth-table file for f.
    #[arg(long, requires = "g")]
    pub f: Option<PathBuf>,
    /// Truth-table file for g.
    #[arg(long, requires = "f")]
    pub g: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub source: FunctionSource,
}

#[derive(Debug, Args)]
pub struct QsimArgs {
    #[command(flatten)]
    pub source: FunctionSource,
    /// Circuit runs to sample.
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct AdvArgs {
    /// Strategy name, or `all`.
    #[arg(long, default_value = "all")]
    pub strategy: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "standard")]
    pub variant: Variant,
    #[arg(long, default_value = "uniform")]
    pub family: HFamily,
    /// Query budget; defaults to floor(2^{n/4} / (6 sqrt n)).
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record yes-instances as no and vice versa.
    #[arg(long)]
    pub swap_labels: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
    /// Fail if some |advantage| exceeds this plus the confidence width.
    #[arg(long)]
    pub max_advantage: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// extremality, marginal, tvd, rank, collision, pairwise, conditional or all.
    #[arg(long, default_value = "all")]
    pub lemma: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Variant for the extremality check.
    #[arg(long, default_value = "standard")]
    pub variant: Variant,
    /// h family for the extremality check.
    #[arg(long, default_value = "table")]
    pub family: HFamily,
    /// Queries to f in the conditional-uniformity check.
    #[arg(long)]
    pub k: Option<usize>,
    /// Total queries in the conditional-uniformity check.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Number of (x, y) pairs for the collision check.
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SearchKind {
    Exhaustive,
    Local,
}

#[derive(Debug, Subcommand)]
pub enum RorrCommand {
    /// Maximum Rorrelation over sign vectors for Haar-random matrices.
    Max {
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        draws: u64,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: SearchKind,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// l1 norms of uniform unit vectors.
    L1 {
        #[arg(long, default_value_t = 256)]
        dim: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a Haar-random orthogonal matrix as CSV.
    Sample {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rorrelation of two truth tables and the best g for f.
    Eval {
        /// CSV matrix; the normalised Hadamard matrix if omitted.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] forrlab_core::Error),
    #[error(transparent)]
    Format(#[from] formats::FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code().clamp(0, 2) as u8;
        }
    };
    match run(cli, out, err) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let runner = Parallel::new(cli.threads).map_err(|e| usage(e.to_string()))?;
    match cli.command {
        Command::Gen(a) => gen(a, out, err),
        Command::Eval(a) => eval(a, out),
        Command::Qsim(a) => qsim(a, out, err),
        Command::Adv(a) => adv(a, &runner, out, err),
        Command::Verify(a) => verify(a, &runner, out, err),
        Command::Rorr(c) => rorr_cmd(c, &runner, out, err),
    }
}

fn print_json(out: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable"))?;
    Ok(())
}

fn gen(a: GenArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let params = sample_params(a.n, a.variant, a.family, a.label, &mut rng_for(a.seed, "gen", 0))?;
    let text = InstanceFile::from_params(&params).to_json();
    match &a.out {
        Some(path) => fs::write(path, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    if let Some(dir) = &a.tables {
        if a.n > DEFAULT_ARITY_CAP {
            return Err(usage(format!("--tables needs n <= {DEFAULT_ARITY_CAP}")));
        }
        let (f, g) = params.materialize()?;
        fs::create_dir_all(dir)?;
        formats::write_table(&dir.join("f.tt"), &f)?;
        formats::write_table(&dir.join("g.tt"), &g)?;
    }
    writeln!(
        err,
        "{} {} instance, n = {}, h family {}, seed {}",
        a.variant, a.label, a.n, a.family, a.seed
    )?;
    Ok(Outcome::Pass)
}

fn load_pair(source: &FunctionSource) -> Result<(TruthTable, TruthTable), CliError> {
    match (&source.instance, &source.f, &source.g) {
        (Some(path), _, _) => {
            let params = read_instance(path)?;
            Ok(params.materialize()?)
        }
        (None, Some(f), Some(g)) => {
            let (f, g) = (read_table(f)?, read_table(g)?);
            if f.arity() != g.arity() {
                return Err(usage(format!("f has arity {} but g has arity {}", f.arity(), g.arity())));
            }
            Ok((f, g))
        }
        _ => Err(usage("give --instance or both --f and --g")),
    }
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let (f, g) = load_pair(&a.source)?;
    let value = forrelation(&f, &g)?;
    writeln!(out, "{value} ({:?})", value.to_f64())?;
    Ok(Outcome::Pass)
}

fn qsim(a: QsimArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let (f, g) = load_pair(&a.source)?;
    let p = accept_probability(&f, &g)?;
    let simulated = if f.arity() <= STATE_VECTOR_MAX_ARITY {
        Some(simulate_circuit(&f, &g)?)
    } else {
        None
    };
    let agrees = simulated.map_or(true, |s| (s - p.to_f64()).abs() <= 1e-12);
    let mut rng = rng_for(a.seed, "qsim", 0);
    let mut accepts = 0u64;
    for _ in 0..a.shots {
        if sample_outcome(&f, &g, &mut rng)?.sampled == Some(Measurement::Accept) {
            accepts += 1;
        }
    }
    let mut body = Map::new();
    body.insert("n".into(), json!(f.arity()));
    body.insert("accept_prob".into(), json!(p.to_f64()));
    body.insert("accept_prob_exact".into(), json!(p.to_string()));
    body.insert("state_vector".into(), json!(simulated));
    body.insert("shots".into(), json!(a.shots));
    body.insert("accepts".into(), json!(accepts));
    body.insert("pass".into(), json!(agrees));
    print_json(out, &envelope("qsim", body))?;
    writeln!(err, "accept probability {p} ({:?})", p.to_f64())?;
    if !agrees {
        writeln!(err, "state-vector simulation disagrees with the closed form")?;
    }
    Ok(Outcome::from_pass(agrees))
}

fn adv<R: Runner>(a: AdvArgs, runner: &R, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let strategies = if a.strategy == "all" {
        builtin_strategies()
    } else {
        vec![strategy_by_name(&a.strategy).ok_or_else(|| usage(format!("unknown strategy {:?}", a.strategy)))?]
    };
    let budget = a.d.unwrap_or_else(|| barrier_budget(a.n));
    let config = ExperimentConfig {
        swap_labels: a.swap_labels,
        ..ExperimentConfig::new(a.n, a.variant, a.family, budget, a.trials)
    };
    let mut reports = Vec::new();
    for s in &strategies {
        reports.push(runner.run(&AdvantageJob::new(s.as_ref(), config, a.seed)?));
    }
    let mut pass = true;
    for r in &reports {
        let within = a.max_advantage.map_or(true, |m| r.advantage.abs() <= m + r.ci);
        let ok = within && r.aborted == 0 && r.failed == 0;
        pass &= ok;
        writeln!(
            err,
            "{} {}: advantage {:.4} (ci {:.4}), D = {}, {} trials, {} aborted{}",
            if ok { "PASS" } else { "FAIL" },
            r.strategy,
            r.advantage,
            r.ci,
            r.budget,
            r.trials,
            r.aborted,
            if within { "" } else { ", above the advantage limit" }
        )?;
    }
    match a.format {
        OutputFormat::Json => {
            let mut body = Map::new();
            body.insert("reports".into(), reports.iter().map(report::advantage_json).collect());
            body.insert("pass".into(), json!(pass));
            print_json(out, &envelope("adv", body))?;
        }
        OutputFormat::Csv => {
            writeln!(out, "{}", report::ADVANTAGE_CSV_HEADER)?;
            for r in &reports {
                writeln!(out, "{}", report::advantage_csv_row(r))?;
            }
        }
    }
    Ok(Outcome::from_pass(pass))
}

fn verify_one<R: Runner>(a: &VerifyArgs, lemma: Lemma, runner: &R) -> Result<LemmaReport, CliError> {
    let mode = if a.exhaustive {
        if !lemma.exhaustive_supported(a.n) {
            return Err(usage(format!("{lemma} has no exhaustive mode at n = {}", a.n)));
        }
        Mode::Exhaustive
    } else if lemma.sampling_supported() {
        Mode::Sampled { samples: a.samples }
    } else if lemma.exhaustive_supported(a.n) {
        Mode::Exhaustive
    } else {
        return Err(usage(format!("{lemma} needs n = 2 or n = 4")));
    };
    let seed = forrlab_core::seed::derive_seed(a.seed, lemma.name(), a.n as u64);
    Ok(match lemma {
        Lemma::Extremality => verify_extremality(runner, a.n, a.variant, a.family, mode, seed)?,
        Lemma::MarginalUniformity => verify_marginal_uniformity(runner, a.n)?,
        Lemma::TotalVariation => verify_total_variation(runner, a.n)?,
        Lemma::RowRankFraction => verify_row_rank_fraction(runner, a.n, mode, seed)?,
        Lemma::Collision => {
            let pairs = default_collision_pairs(a.n, a.pairs, seed)?;
            verify_collision_lemma(runner, a.n, &pairs, mode, seed)?
        }
        Lemma::PairwiseCollisions => verify_pairwise_collisions(runner, a.n, mode, seed)?,
        Lemma::ConditionalUniformity => {
            let (dk, dell) = forrlab_core::verifier::default_query_shape(a.n);
            let ell = a.ell.unwrap_or(dell);
            let k = a.k.unwrap_or(if a.ell.is_some() { ell / 2 } else { dk });
            verify_conditional_uniformity(runner, a.n, k, ell, a.samples, seed)?
        }
    })
}

fn verify<R: Runner>(a: VerifyArgs, runner: &R, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let reports = if a.lemma == "all" {
        verify_all(runner, a.n, a.exhaustive, a.samples, a.seed)?
    } else {
        let lemma: Lemma = a.lemma.parse().map_err(|_| usage(format!("unknown lemma {:?}", a.lemma)))?;
        vec![verify_one(&a, lemma, runner)?]
    };
    let pass = reports.iter().all(|r| r.pass);
    for r in &reports {
        writeln!(
            err,
            "{} {} n={} {}: {} (expected {})",
            if r.pass { "PASS" } else { "FAIL" },
            r.lemma,
            r.n,
            r.mode.name(),
            r.observed,
            r.expected
        )?;
        for f in &r.failures {
            writeln!(err, "  {f}")?;
        }
    }
    let mut body = Map::new();
    body.insert("reports".into(), reports.iter().map(report::lemma_json).collect());
    body.insert("pass".into(), json!(pass));
    print_json(out, &envelope("verify", body))?;
    Ok(Outcome::from_pass(pass))
}

fn rorr_cmd<R: Runner>(c: RorrCommand, runner: &R, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome, CliError> {
    match c {
        RorrCommand::Max {
            dim,
            draws,
            mode,
            restarts,
            seed,
        } => {
            let mode = match mode {
                SearchKind::Exhaustive => SearchMode::Exhaustive,
                SearchKind::Local => SearchMode::LocalSearch { restarts },
            };
            let r = runner.run(&HaarMaxJob::new(dim, draws, mode, seed)?);
            let bounded = r.values.iter().all(|v| *v <= 1.0 + 1e-9);
            // Exhaustive maxima are exact, and a Haar draw never reaches 1.
            let pass = bounded && (mode != SearchMode::Exhaustive || r.values.iter().all(|v| *v < 1.0));
            let mut body = match report::haar_max_json(&r) {
                Value::Object(m) => m,
                _ => unreachable!(),
            };
            body.insert("pass".into(), json!(pass));
            print_json(out, &envelope("rorr-max", body))?;
            writeln!(
                err,
                "{} N = {dim}: largest maximum {:.6}, mean {:.6} over {draws} draws",
                if pass { "PASS" } else { "FAIL" },
                r.largest,
                r.mean
            )?;
            Ok(Outcome::from_pass(pass))
        }
        RorrCommand::L1 { dim, samples, seed } => {
            let r = runner.run(&L1ConcentrationJob::new(dim, samples, seed)?);
            let expected = expected_l1_ratio(dim);
            let pass = r.exceedances == 0;
            let mut body = match report::l1_json(&r, expected) {
                Value::Object(m) => m,
                _ => unreachable!(),
            };
            body.insert("pass".into(), json!(pass));
            print_json(out, &envelope("rorr-l1", body))?;
            writeln!(
                err,
                "{} N = {dim}: mean {:.5} (expected {expected:.5}), max {:.5}, {} of {samples} at or above {}",
                if pass { "PASS" } else { "FAIL" },
                r.mean,
                r.max,
                r.exceedances,
                r.threshold
            )?;
            Ok(Outcome::from_pass(pass))
        }
        RorrCommand::Sample { dim, seed, out: path } => {
            let u = sample_haar_orthogonal(dim, &mut rng_for(seed, "rorr-sample", 0))?;
            let text = formats::real_matrix_to_csv(dim, u.data());
            match path {
                Some(p) => fs::write(p, text)?,
                None => out.write_all(text.as_bytes())?,
            }
            writeln!(err, "N = {dim}, orthogonality error {:.2e}", u.orthogonality_error())?;
            Ok(Outcome::Pass)
        }
        RorrCommand::Eval { matrix, f, g } => {
            let (f, g) = (read_table(&f)?, read_table(&g)?);
            let u = match matrix {
                Some(path) => {
                    let (dim, data) = formats::real_matrix_from_csv(&fs::read_to_string(path)?)?;
                    OrthogonalMatrix::new(dim, data)?
                }
                None => OrthogonalMatrix::normalized_hadamard(f.arity()),
            };
            let value = rorr(&u, &f, &g)?;
            let (best_g, best) = max_over_g(&u, &f)?;
            let mut body = Map::new();
            body.insert("rorr".into(), json!(value));
            body.insert("max_over_g".into(), json!(best));
            body.insert(
                "best_g".into(),
                json!(formats::bits_to_hex(best_g.words(), best_g.len())),
            );
            print_json(out, &envelope("rorr-eval", body))?;
            writeln!(err, "rorr = {value:.12}, best over g = {best:.12}")?;
            Ok(Outcome::Pass)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    fn run_args(args: &[&str]) -> (u8, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with(std::iter::once("forrlab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["gen"]).0, 2);
        assert_eq!(run_args(&["gen", "--n", "3"]).0, 2);
        assert_eq!(run_args(&["gen", "--n", "4", "--family", "poly:9"]).0, 2);
        assert_eq!(run_args(&["adv", "--n", "4", "--strategy", "psychic"]).0, 2);
        assert_eq!(run_args(&["verify", "--n", "8", "--lemma", "extremality", "--exhaustive"]).0, 2);
        assert_eq!(run_args(&["verify", "--n", "8", "--lemma", "nonsense"]).0, 2);
        assert_eq!(run_args(&["eval"]).0, 2);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run_args(&["--help"]).0, 0);
    }

    #[test]
    fn adversary_limit_failure_exits_1() {
        let (code, out, _) = run_args(&[
            "adv", "--n", "8", "--variant", "naive", "--d", "2", "--trials", "200", "--strategy", "origin-probe",
            "--max-advantage", "0.1",
        ]);
        assert_eq!(code, 1);
        assert!(out.contains("\"pass\": false"));
    }
}
