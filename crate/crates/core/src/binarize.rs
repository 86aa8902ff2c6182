//! Graded scores to changed / stable labels by single-breakpoint
//! least-squares segmentation of the sorted score sequence.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scoring::ChangeScoreTable;
use crate::tsv;

#[derive(Debug, Error, PartialEq)]
pub enum BinarizeError {
    #[error("need at least 2 scores to place a change point, got {0}")]
    TooShort(usize),
    #[error("scores are not sorted in descending order at position {0}")]
    NotSorted(usize),
    #[error("non-finite score at position {0}")]
    NonFinite(usize),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
}

/// Number of leading elements forming the first segment of the best
/// two-segment fit, `1 ≤ n ≤ len − 1`.
///
/// Minimises the total within-segment sum of squared deviations; ties go to
/// the smallest `n`. Costs are computed from centred prefix sums, so the
/// search is linear.
pub fn detect_change_point(sorted_scores: &[f64]) -> Result<usize, BinarizeError> {
    let len = sorted_scores.len();
    if len < 2 {
        return Err(BinarizeError::TooShort(len));
    }
    if let Some(i) = sorted_scores.iter().position(|v| !v.is_finite()) {
        return Err(BinarizeError::NonFinite(i));
    }
    if let Some(i) = sorted_scores.windows(2).position(|w| w[1] > w[0]) {
        return Err(BinarizeError::NotSorted(i + 1));
    }
    // Centring first keeps the prefix-sum cost formula well conditioned.
    let mean = sorted_scores.iter().sum::<f64>() / len as f64;
    let x: Vec<f64> = sorted_scores.iter().map(|v| v - mean).collect();
    let mut s = vec![0.0; len + 1];
    let mut q = vec![0.0; len + 1];
    for (i, v) in x.iter().enumerate() {
        s[i + 1] = s[i] + v;
        q[i + 1] = q[i] + v * v;
    }
    let sse = |a: usize, b: usize| {
        let n = (b - a) as f64;
        let sum = s[b] - s[a];
        (q[b] - q[a] - sum * sum / n).max(0.0)
    };
    let mut best = (1, f64::INFINITY);
    for n in 1..len {
        let cost = sse(0, n) + sse(n, len);
        if cost < best.1 {
            best = (n, cost);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryLabels {
    pub method_id: String,
    pub change_point_n: usize,
    pub labels: BTreeMap<String, u8>,
}

impl BinaryLabels {
    pub fn get(&self, lemma: &str) -> Option<u8> {
        self.labels.get(lemma).copied()
    }

    pub fn changed(&self) -> impl Iterator<Item = &str> + '_ {
        self.labels
            .iter()
            .filter(|(_, &v)| v == 1)
            .map(|(l, _)| l.as_str())
    }

    /// Flips every label.
    pub fn complement(&self) -> BinaryLabels {
        BinaryLabels {
            method_id: self.method_id.clone(),
            change_point_n: self.labels.len() - self.change_point_n,
            labels: self.labels.iter().map(|(l, &v)| (l.clone(), 1 - v)).collect(),
        }
    }

    /// `lemma<TAB>label` rows under a header, in lemma order.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "lemma\tlabel")?;
        for (l, v) in &self.labels {
            writeln!(w, "{l}\t{v}")?;
        }
        Ok(())
    }

    /// Reads `lemma<TAB>label`; `change_point_n` is the number of 1 labels.
    pub fn read_tsv<R: BufRead>(method_id: &str, reader: R) -> Result<BinaryLabels, BinarizeError> {
        let mut labels = BTreeMap::new();
        for rec in tsv::records(reader) {
            let (line, fields) = rec.map_err(|e| BinarizeError::Format {
                line: 0,
                reason: e.to_string(),
            })?;
            if line == 1 && fields[0] == "lemma" {
                continue;
            }
            let v = match fields.get(1).map(|f| f.trim()) {
                Some("0") => 0,
                Some("1") => 1,
                other => {
                    return Err(BinarizeError::Format {
                        line,
                        reason: format!("label must be 0 or 1, got {other:?}"),
                    })
                }
            };
            if labels.insert(fields[0].clone(), v).is_some() {
                return Err(BinarizeError::Format {
                    line,
                    reason: format!("duplicate lemma {:?}", fields[0]),
                });
            }
        }
        Ok(BinaryLabels {
            method_id: method_id.to_owned(),
            change_point_n: labels.values().filter(|&&v| v == 1).count(),
            labels,
        })
    }
}

/// Labels the top `n` lemmas of the table's ranking as changed, with `n`
/// from [`detect_change_point`]. Lemmas without a score get no label.
pub fn binarize(table: &ChangeScoreTable) -> Result<BinaryLabels, BinarizeError> {
    let ranking = table.ranking();
    let scores: Vec<f64> = ranking
        .iter()
        .map(|l| table.get(l).expect("ranked lemma has a score"))
        .collect();
    let n = detect_change_point(&scores)?;
    let labels = ranking
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, u8::from(i < n)))
        .collect();
    Ok(BinaryLabels {
        method_id: table.method_id.clone(),
        change_point_n: n,
        labels,
    })
}
