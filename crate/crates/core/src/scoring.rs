//! Per-method change score tables, geometric-mean ensembles and rankings.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifest::Diagnostics;
use crate::tsv;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("{method}: negative score {score} for {lemma:?}")]
    NegativeScore { method: String, lemma: String, score: f64 },
    #[error("{method}: non-finite score for {lemma:?}")]
    NonFinite { method: String, lemma: String },
    #[error("{0}: no lemma has a score")]
    NothingToRank(String),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Graded change scores of one method; `None` marks a missing score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeScoreTable {
    pub method_id: String,
    pub scores: BTreeMap<String, Option<f64>>,
}

impl ChangeScoreTable {
    pub fn new(method_id: impl Into<String>) -> Self {
        Self {
            method_id: method_id.into(),
            scores: BTreeMap::new(),
        }
    }

    pub fn from_scores<I, S>(method_id: &str, scores: I) -> Self
    where
        I: IntoIterator<Item = (S, Option<f64>)>,
        S: Into<String>,
    {
        Self {
            method_id: method_id.to_owned(),
            scores: scores.into_iter().map(|(l, s)| (l.into(), s)).collect(),
        }
    }

    pub fn insert(&mut self, lemma: &str, score: Option<f64>) {
        self.scores.insert(lemma.to_owned(), score);
    }

    pub fn get(&self, lemma: &str) -> Option<f64> {
        self.scores.get(lemma).copied().flatten()
    }

    pub fn present(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.scores
            .iter()
            .filter_map(|(l, s)| s.map(|s| (l.as_str(), s)))
    }

    pub fn missing(&self) -> impl Iterator<Item = &str> + '_ {
        self.scores
            .iter()
            .filter(|(_, s)| s.is_none())
            .map(|(l, _)| l.as_str())
    }

    /// Lemmas with a score, most changed first; ties in lemma order.
    pub fn ranking(&self) -> Vec<String> {
        let mut v: Vec<(&str, f64)> = self.present().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v.into_iter().map(|(l, _)| l.to_owned()).collect()
    }

    /// Multiplies every score by `factor`.
    pub fn scaled(&self, factor: f64) -> ChangeScoreTable {
        ChangeScoreTable {
            method_id: self.method_id.clone(),
            scores: self
                .scores
                .iter()
                .map(|(l, s)| (l.clone(), s.map(|v| v * factor)))
                .collect(),
        }
    }

    /// Writes `lemma<TAB>score<TAB>rank` rows (header first), in rank order,
    /// then missing lemmas with `NA`.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "lemma\tscore\trank")?;
        for (i, lemma) in self.ranking().iter().enumerate() {
            writeln!(w, "{lemma}\t{}\t{}", tsv::fmt_score(self.get(lemma)), i + 1)?;
        }
        for lemma in self.missing() {
            writeln!(w, "{lemma}\t{}\t{}", tsv::MISSING, tsv::MISSING)?;
        }
        Ok(())
    }

    /// Reads a table written by [`write_tsv`](Self::write_tsv), or any
    /// `lemma<TAB>score[...]` file. The rank column is ignored.
    pub fn read_tsv<R: BufRead>(method_id: &str, reader: R) -> Result<Self, ScoringError> {
        let mut t = ChangeScoreTable::new(method_id);
        for rec in tsv::records(reader) {
            let (line, fields) = rec?;
            if line == 1 && fields[0] == "lemma" {
                continue;
            }
            let score_field = fields.get(1).ok_or_else(|| ScoringError::Format {
                line,
                reason: "missing score column".to_owned(),
            })?;
            let score = if tsv::is_missing(score_field) {
                None
            } else {
                Some(score_field.trim().parse::<f64>().map_err(|_| ScoringError::Format {
                    line,
                    reason: format!("bad score {score_field:?}"),
                })?)
            };
            if t.scores.insert(fields[0].clone(), score).is_some() {
                return Err(ScoringError::Format {
                    line,
                    reason: format!("duplicate lemma {:?}", fields[0]),
                });
            }
        }
        Ok(t)
    }
}

/// Ranks the lemmas of a table; fails if no lemma has a score.
pub fn rank(table: &ChangeScoreTable) -> Result<Vec<String>, ScoringError> {
    let r = table.ranking();
    if r.is_empty() {
        return Err(ScoringError::NothingToRank(table.method_id.clone()));
    }
    Ok(r)
}

fn check_score(method: &str, lemma: &str, s: f64) -> Result<(), ScoringError> {
    if !s.is_finite() {
        return Err(ScoringError::NonFinite {
            method: method.to_owned(),
            lemma: lemma.to_owned(),
        });
    }
    if s < 0.0 {
        return Err(ScoringError::NegativeScore {
            method: method.to_owned(),
            lemma: lemma.to_owned(),
            score: s,
        });
    }
    Ok(())
}

/// Geometric mean of two methods' scores, lemma by lemma.
///
/// A lemma missing from, or unscored by, either input is missing in the
/// output and reported to `diag`.
pub fn ensemble(
    a: &ChangeScoreTable,
    b: &ChangeScoreTable,
    diag: &mut Diagnostics,
) -> Result<ChangeScoreTable, ScoringError> {
    let mut out = ChangeScoreTable::new(format!("{}-{}", a.method_id, b.method_id));
    let lemmas: std::collections::BTreeSet<&String> = a.scores.keys().chain(b.scores.keys()).collect();
    for lemma in lemmas {
        let sa = a.get(lemma);
        let sb = b.get(lemma);
        if let Some(s) = sa {
            check_score(&a.method_id, lemma, s)?;
        }
        if let Some(s) = sb {
            check_score(&b.method_id, lemma, s)?;
        }
        let score = match (sa, sb) {
            (Some(x), Some(y)) => Some((x * y).sqrt()),
            _ => {
                let which: Vec<&str> = [(sa, &a.method_id), (sb, &b.method_id)]
                    .iter()
                    .filter(|(s, _)| s.is_none())
                    .map(|(_, m)| m.as_str())
                    .collect();
                diag.warn_lemma(
                    "ensemble",
                    lemma,
                    format!("dropped from {}: no score from {}", out.method_id, which.join(", ")),
                );
                None
            }
        };
        out.scores.insert(lemma.clone(), score);
    }
    Ok(out)
}

/// Wide table: one row per lemma, one column per method, `NA` for missing.
pub fn write_wide_tsv<W: Write>(mut w: W, tables: &[ChangeScoreTable]) -> io::Result<()> {
    let lemmas: std::collections::BTreeSet<&String> = tables.iter().flat_map(|t| t.scores.keys()).collect();
    write!(w, "lemma")?;
    for t in tables {
        write!(w, "\t{}", t.method_id)?;
    }
    writeln!(w)?;
    for l in lemmas {
        write!(w, "{l}")?;
        for t in tables {
            write!(w, "\t{}", tsv::fmt_score(t.get(l)))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
