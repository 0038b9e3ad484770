//! Verification reports.

use std::collections::BTreeMap;

use serde::Serialize;

/// Outcome of one lemma run. Serialized with sorted maps and no timing
/// unless requested, so equal inputs give byte-identical output.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VerificationReport {
    pub lemma: String,
    pub caps: BTreeMap<String, u64>,
    pub seed: u64,
    pub checked: u64,
    pub hypothesis_stats: BTreeMap<String, u64>,
    pub counterexamples: Vec<serde_json::Value>,
    /// False when the time budget ran out before the sweep finished.
    pub exhaustive: bool,
    pub verdict: Verdict,
    pub elapsed_ms: Option<u64>,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Passed,
    Failed,
    /// Nothing found, but the sweep is partial or empty.
    Incomplete,
}

impl VerificationReport {
    pub fn new(lemma: &str, caps: BTreeMap<String, u64>, seed: u64) -> Self {
        VerificationReport {
            lemma: lemma.into(),
            caps,
            seed,
            checked: 0,
            hypothesis_stats: BTreeMap::new(),
            counterexamples: Vec::new(),
            exhaustive: true,
            verdict: Verdict::Incomplete,
            elapsed_ms: None,
        }
    }

    pub fn bump(&mut self, key: &str, by: u64) {
        *self.hypothesis_stats.entry(key.to_string()).or_default() += by;
    }

    pub fn stat(&self, key: &str) -> u64 {
        self.hypothesis_stats.get(key).copied().unwrap_or(0)
    }

    /// Sorts the counterexamples and settles the verdict.
    pub fn finish(&mut self) {
        self.counterexamples.sort_by_key(|v| v.to_string());
        self.verdict = if !self.counterexamples.is_empty() {
            Verdict::Failed
        } else if self.exhaustive && self.checked > 0 {
            Verdict::Passed
        } else {
            Verdict::Incomplete
        };
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Passed
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}
