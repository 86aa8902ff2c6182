//! Change scores over contextualised token embeddings.
//!
//! Each target has one [`UsageMatrix`] per period: one row per occurrence.
//! The metrics compare the two matrices:
//!
//! - APD: mean cosine distance over all cross-period row pairs;
//! - PRT: cosine distance between the per-period mean rows (prototypes);
//! - APD-PRT: arithmetic mean of the two;
//! - JSD: Jensen-Shannon divergence between the per-period distributions of
//!   affinity-propagation cluster labels over the stacked, standardised rows.

mod affinity;
mod jsd;
mod metrics;
mod umx;

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Period;

pub use affinity::{affinity_propagation, AffinityConfig, Clustering, ClusteringError};
pub use jsd::{entropy, jensen_shannon, jsd_score, ClusterDistribution, JsdOutcome};
pub use metrics::{apd, apd_prt, prt};
pub use umx::{read_usage_matrix, write_usage_matrix, UmxError, MAGIC as UMX_MAGIC};

/// N×D matrix of token embeddings for one lemma in one period.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageMatrix {
    pub lemma: String,
    pub period: Period,
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl UsageMatrix {
    /// Builds a matrix from row vectors.
    ///
    /// # Panics
    /// If rows differ in length or `dim` is zero.
    pub fn from_rows(lemma: &str, period: Period, dim: usize, rows: &[Vec<f64>]) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "row length differs from dimension");
            data.extend_from_slice(r);
        }
        Self::from_flat(lemma.to_owned(), period, rows.len(), dim, data)
    }

    pub(crate) fn from_flat(lemma: String, period: Period, rows: usize, dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * dim);
        Self {
            lemma,
            period,
            rows,
            dim,
            data,
        }
    }

    pub fn labelled(mut self, lemma: &str, period: Period) -> Self {
        self.lemma = lemma.to_owned();
        self.period = period;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + DoubleEndedIterator + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Keeps a uniform random subset of at most `max_rows` rows, in their
    /// original order.
    pub fn subsample<R: Rng + ?Sized>(&self, max_rows: usize, rng: &mut R) -> UsageMatrix {
        if self.rows <= max_rows {
            return self.clone();
        }
        let mut keep = sample(rng, self.rows, max_rows).into_vec();
        keep.sort_unstable();
        let mut data = Vec::with_capacity(max_rows * self.dim);
        for i in keep {
            data.extend_from_slice(self.row(i));
        }
        Self::from_flat(self.lemma.clone(), self.period, max_rows, self.dim, data)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("{lemma}: no usages in {period}")]
    Empty { lemma: String, period: Period },
    #[error("{lemma}: dimension mismatch ({0} vs {1})", .dims.0, .dims.1)]
    DimensionMismatch { lemma: String, dims: (usize, usize) },
    #[error("{lemma}: row {row} of {period} has zero norm")]
    ZeroNormRow { lemma: String, period: Period, row: usize },
    #[error("{lemma}: clustering failed: {reason}")]
    Clustering { lemma: String, reason: String },
    #[error("{lemma}: prototype of {period} has zero norm")]
    ZeroNormPrototype { lemma: String, period: Period },
}

impl MetricError {
    /// Errors that make a score undefined rather than signal bad input.
    pub fn is_missing_score(&self) -> bool {
        matches!(self, MetricError::Empty { .. } | MetricError::ZeroNormPrototype { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContextualMetric {
    Apd,
    Prt,
    ApdPrt,
    Jsd,
}

impl ContextualMetric {
    pub const ALL: [ContextualMetric; 4] = [
        ContextualMetric::Apd,
        ContextualMetric::Prt,
        ContextualMetric::ApdPrt,
        ContextualMetric::Jsd,
    ];

    pub fn method_id(self) -> &'static str {
        match self {
            ContextualMetric::Apd => "APD",
            ContextualMetric::Prt => "PRT",
            ContextualMetric::ApdPrt => "APD-PRT",
            ContextualMetric::Jsd => "JSD",
        }
    }
}

impl fmt::Display for ContextualMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.method_id())
    }
}

impl FromStr for ContextualMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "apd" => Ok(ContextualMetric::Apd),
            "prt" => Ok(ContextualMetric::Prt),
            "apd-prt" | "apd_prt" => Ok(ContextualMetric::ApdPrt),
            "jsd" => Ok(ContextualMetric::Jsd),
            _ => Err(format!("unknown metric {s:?}")),
        }
    }
}

fn check_pair(u1: &UsageMatrix, u2: &UsageMatrix) -> Result<(), MetricError> {
    if u1.dim != u2.dim {
        return Err(MetricError::DimensionMismatch {
            lemma: u1.lemma.clone(),
            dims: (u1.dim, u2.dim),
        });
    }
    for u in [u1, u2] {
        if u.rows == 0 {
            return Err(MetricError::Empty {
                lemma: u.lemma.clone(),
                period: u.period,
            });
        }
    }
    Ok(())
}
