//! Deterministic check suites over the simulator, the capacity engine, the
//! bound evaluators and the PoSW implementation. Each suite returns a
//! [`SuiteOutcome`]; the same seed always gives the same outcome.

mod capacity;
mod oracle;
mod posw;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::report::{wilson, Wilson};

pub use capacity::{
    bounds_suite, calculus_instances, calculus_suite, classical_instances, classical_suite, prmg_capacity_suite,
    recognized_capacity_suite, ClassicalInstance,
};
pub use oracle::{connection_suite, fidelity_suite, gap_suite, grover_circuit, grover_suite, purification_suite, random_circuit};
pub use posw::{
    completeness_suite, exhaustive_databases, extract_suite, forgery_suite, leaves_suite, newpath_suite, random_database,
    soundness_suite, RandomDb,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub seed: Option<u64>,
    pub checks: u64,
    pub failures: u64,
    pub skipped: u64,
    pub wilson: Wilson,
    pub passed: bool,
    pub metrics: Map<String, Value>,
    /// The first few failing cases.
    pub notes: Vec<String>,
}

const MAX_NOTES: usize = 8;

/// Accumulates pass/fail counts for one suite.
#[derive(Debug, Default)]
pub(crate) struct Tally {
    checks: u64,
    failures: u64,
    skipped: u64,
    metrics: Map<String, Value>,
    notes: Vec<String>,
}

impl Tally {
    pub(crate) fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.notes.len() < MAX_NOTES {
                self.notes.push(describe());
            }
        }
    }

    pub(crate) fn skip(&mut self) {
        self.skipped += 1;
    }

    pub(crate) fn metric(&mut self, name: &str, value: impl Serialize) {
        self.metrics.insert(name.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    /// Keeps the largest value seen under `name`.
    pub(crate) fn max_metric(&mut self, name: &str, value: f64) {
        let cur = self.metrics.get(name).and_then(Value::as_f64).unwrap_or(f64::NEG_INFINITY);
        if value > cur {
            self.metric(name, value);
        }
    }

    pub(crate) fn finish(self, suite: &str, seed: Option<u64>) -> SuiteOutcome {
        SuiteOutcome {
            suite: suite.to_string(),
            seed,
            checks: self.checks,
            failures: self.failures,
            skipped: self.skipped,
            wilson: wilson(self.checks - self.failures, self.checks),
            passed: self.failures == 0 && self.checks > 0,
            metrics: self.metrics,
            notes: self.notes,
        }
    }
}

/// |p̂ − p| ≤ z·√(p(1 − p)/N).
pub fn within_sigma(successes: u64, trials: u64, p: f64, z: f64) -> bool {
    let n = trials as f64;
    let phat = successes as f64 / n;
    (phat - p).abs() <= z * (p * (1.0 - p) / n).sqrt() + 1e-15
}

/// Suite names accepted by [`run_suite`], with default trial counts.
pub const SUITES: &[(&str, Option<u64>)] = &[
    ("fidelity", None),
    ("connection", None),
    ("purification", Some(100)),
    ("gap", Some(50)),
    ("grover", None),
    ("prmg-capacity", None),
    ("recognized-capacity", None),
    ("calculus", None),
    ("classical", None),
    ("bounds", None),
    ("posw-completeness", None),
    ("posw-soundness", Some(100_000)),
    ("extract", Some(10_000)),
    ("leaves", Some(10_000)),
    ("newpath", Some(10_000)),
    ("forgery", Some(100_000)),
];

/// Runs one suite; `trials` overrides the default count of randomized
/// suites and is ignored by exhaustive ones.
pub fn run_suite(name: &str, trials: Option<u64>, seed: u64) -> Result<SuiteOutcome> {
    let default = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Parameter(format!("unknown suite '{name}'")))?
        .1;
    let n = trials.or(default).unwrap_or(0);
    match name {
        "fidelity" => fidelity_suite(),
        "connection" => connection_suite(),
        "purification" => purification_suite(n, seed),
        "gap" => gap_suite(n, seed),
        "grover" => grover_suite(),
        "prmg-capacity" => prmg_capacity_suite(),
        "recognized-capacity" => recognized_capacity_suite(),
        "calculus" => calculus_suite(),
        "classical" => classical_suite(),
        "bounds" => bounds_suite(),
        "posw-completeness" => completeness_suite(),
        "posw-soundness" => soundness_suite(n, seed),
        "extract" => extract_suite(n, seed),
        "leaves" => leaves_suite(n, seed),
        "newpath" => newpath_suite(n, seed),
        "forgery" => forgery_suite(n, seed),
        _ => unreachable!("checked against SUITES"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_window() {
        assert!(within_sigma(0, 100_000, 0.0, 3.0));
        assert!(!within_sigma(1, 100_000, 0.0, 3.0));
        assert!(within_sigma(2520, 10_000, 0.25, 3.0));
        assert!(!within_sigma(2700, 10_000, 0.25, 3.0));
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", None, 0).is_err());
    }
}
