//! Warnings and run manifests.
//!
//! Every stage that can degrade gracefully (lenient parse skips, lemmas
//! without occurrences, non-converged clusterings, dropped lemmas) reports
//! through a [`Diagnostics`] sink instead of logging and forgetting. The CLI
//! folds the sink into a [`RunManifest`] written next to its outputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    /// Pipeline stage that raised the warning, e.g. `"corpus"` or `"jsd"`.
    pub stage: String,
    /// Lemma the warning concerns, when there is one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lemma: Option<String>,
    pub message: String,
}

/// Append-only warning sink.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Diagnostics {
    warnings: Vec<Warning>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn warn(&mut self, stage: &str, message: impl Into<String>) {
        let message = message.into();
        log::warn!("[{stage}] {message}");
        self.warnings.push(Warning {
            stage: stage.to_owned(),
            lemma: None,
            message,
        });
    }

    pub fn warn_lemma(&mut self, stage: &str, lemma: &str, message: impl Into<String>) {
        let message = message.into();
        log::warn!("[{stage}] {lemma}: {message}");
        self.warnings.push(Warning {
            stage: stage.to_owned(),
            lemma: Some(lemma.to_owned()),
            message,
        });
    }

    pub fn extend(&mut self, other: Diagnostics) {
        self.warnings.extend(other.warnings);
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.warnings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.warnings.is_empty()
    }

    pub fn by_stage(&self, stage: &str) -> impl Iterator<Item = &Warning> + '_ {
        let stage = stage.to_owned();
        self.warnings.iter().filter(move |w| w.stage == stage)
    }
}

/// Reproducibility record written by every CLI invocation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Snapshot of the effective configuration (flags after defaults).
    pub config: serde_json::Value,
    /// SHA-256 of every input file, keyed by path as given.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// Free-form per-stage results such as change point positions.
    pub results: BTreeMap<String, serde_json::Value>,
    pub warnings: Diagnostics,
    /// Seconds since the Unix epoch. The only field allowed to differ
    /// between otherwise identical runs.
    pub created_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: "semshift".to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            config: serde_json::Value::Null,
            ..Self::default()
        }
    }
}
