//! JSON and CSV renderings of the core reports.

use forrlab_core::adversary::AdvantageReport;
use forrlab_core::rorrelation::{HaarMaxReport, L1Report, SearchMode};
use forrlab_core::verifier::{LemmaReport, Mode};
use serde_json::{json, Map, Value};

use crate::formats::SCHEMA_VERSION;

pub const ADVANTAGE_CSV_HEADER: &str = "strategy,n,variant,family,D,trials,p_yes,p_no,advantage,ci";

pub fn advantage_json(r: &AdvantageReport) -> Value {
    json!({
        "strategy": r.strategy,
        "n": r.n,
        "variant": r.variant.to_string(),
        "family": r.family.to_string(),
        "D": r.budget,
        "trials": r.trials,
        "p_yes": r.p_yes,
        "p_no": r.p_no,
        "advantage": r.advantage,
        "ci": r.ci,
        "aborted": r.aborted,
        "failed": r.failed,
        "max_queries": r.max_queries,
    })
}

pub fn advantage_csv_row(r: &AdvantageReport) -> String {
    format!(
        "{},{},{},{},{},{},{:?},{:?},{:?},{:?}",
        r.strategy, r.n, r.variant, r.family, r.budget, r.trials, r.p_yes, r.p_no, r.advantage, r.ci
    )
}

pub fn lemma_json(r: &LemmaReport) -> Value {
    let counts: Map<String, Value> = r.counts.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let samples = match r.mode {
        Mode::Exhaustive => Value::Null,
        Mode::Sampled { samples } => json!(samples),
    };
    json!({
        "lemma": r.lemma.name(),
        "n": r.n,
        "mode": r.mode.name(),
        "samples": samples,
        "expected": r.expected,
        "observed": r.observed,
        "pass": r.pass,
        "counts": counts,
        "failures": r.failures,
    })
}

pub fn l1_json(r: &L1Report, expected_mean: f64) -> Value {
    json!({
        "dim": r.dim,
        "samples": r.samples,
        "mean": r.mean,
        "expected_mean": expected_mean,
        "min": r.min,
        "max": r.max,
        "threshold": r.threshold,
        "exceedances": r.exceedances,
        "histogram": r.histogram,
    })
}

pub fn haar_max_json(r: &HaarMaxReport) -> Value {
    let (mode, restarts) = match r.mode {
        SearchMode::Exhaustive => ("exhaustive", Value::Null),
        SearchMode::LocalSearch { restarts } => ("local-search", json!(restarts)),
    };
    json!({
        "dim": r.dim,
        "mode": mode,
        "restarts": restarts,
        "draws": r.values.len(),
        "largest": r.largest,
        "mean": r.mean,
        "values": r.values,
    })
}

/// Wraps a payload with the schema version.
pub fn envelope(kind: &str, mut body: Map<String, Value>) -> Value {
    body.insert("schema_version".into(), json!(SCHEMA_VERSION));
    body.insert("kind".into(), json!(kind));
    Value::Object(body)
}
