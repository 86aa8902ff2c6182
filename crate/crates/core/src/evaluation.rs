//! Evaluation against gold annotations and between methods.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::binarize::BinaryLabels;
use crate::manifest::Diagnostics;
use crate::scoring::ChangeScoreTable;
use crate::tsv;

#[derive(Debug, Error, PartialEq)]
pub enum EvaluationError {
    #[error("need at least {needed} shared lemmas, found {found}")]
    TooFewShared { needed: usize, found: usize },
    #[error("bin fraction {0} outside (0, 1]")]
    BinFraction(f64),
    #[error("need at least 2 score tables to correlate")]
    TooFewTables,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult {
    /// `None` when either side has zero rank variance.
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
}

/// Fractional (average) ranks, 1-based, ascending.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of `rho` under the t approximation with `n − 2`
/// degrees of freedom.
fn p_value(rho: f64, n: usize) -> Option<f64> {
    let df = (n - 2) as f64;
    if (1.0 - rho.abs()) <= 0.0 {
        return Some(0.0);
    }
    let t = rho * (df / ((1.0 + rho) * (1.0 - rho))).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some((2.0 * dist.sf(t.abs())).min(1.0))
}

/// Spearman correlation of two paired samples (average ranks for ties).
pub fn spearman_paired(x: &[f64], y: &[f64]) -> Result<SpearmanResult, EvaluationError> {
    assert_eq!(x.len(), y.len(), "unpaired samples");
    let n = x.len();
    if n < 3 {
        return Err(EvaluationError::TooFewShared { needed: 3, found: n });
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y));
    Ok(SpearmanResult {
        rho,
        p_value: rho.and_then(|r| p_value(r, n)),
        n,
    })
}

/// Spearman correlation over the lemmas present in both maps.
pub fn spearman(
    pred: &BTreeMap<String, f64>,
    gold: &BTreeMap<String, f64>,
) -> Result<SpearmanResult, EvaluationError> {
    let (x, y): (Vec<f64>, Vec<f64>) = pred
        .iter()
        .filter_map(|(l, &p)| gold.get(l).map(|&g| (p, g)))
        .unzip();
    spearman_paired(&x, &y)
}

fn shared_labels<'a>(
    pred: &'a BinaryLabels,
    gold: &'a BTreeMap<String, u8>,
) -> impl Iterator<Item = (&'a str, u8, u8)> + 'a {
    pred.labels
        .iter()
        .filter_map(|(l, &p)| gold.get(l).map(|&g| (l.as_str(), p, g)))
}

/// Fraction of shared lemmas whose predicted label matches gold.
pub fn accuracy(pred: &BinaryLabels, gold: &BTreeMap<String, u8>) -> Result<f64, EvaluationError> {
    let (mut n, mut hit) = (0usize, 0usize);
    for (_, p, g) in shared_labels(pred, gold) {
        n += 1;
        hit += usize::from(p == g);
    }
    if n == 0 {
        return Err(EvaluationError::TooFewShared { needed: 1, found: 0 });
    }
    Ok(hit as f64 / n as f64)
}

/// `(fp, fn)`: predicted changed but gold stable, and the reverse.
pub fn fpfn_binary(pred: &BinaryLabels, gold: &BTreeMap<String, u8>) -> (Vec<String>, Vec<String>) {
    let mut fp = Vec::new();
    let mut fn_ = Vec::new();
    for (l, p, g) in shared_labels(pred, gold) {
        match (p, g) {
            (1, 0) => fp.push(l.to_owned()),
            (0, 1) => fn_.push(l.to_owned()),
            _ => {}
        }
    }
    (fp, fn_)
}

/// Rank-distance analysis of two rankings (most changed first).
///
/// Over the lemmas in both rankings, re-ranked 1..n, `d = gold_rank −
/// pred_rank`. `fp` holds the `⌈bin_fraction·n⌉` largest positive `d`
/// (over-estimated change), `fn` the same number of most negative `d`.
/// Ties are broken by lemma. Lemmas with `d = 0` are never listed.
pub fn fpfn_ranking(
    pred_ranking: &[String],
    gold_ranking: &[String],
    bin_fraction: f64,
) -> Result<(Vec<String>, Vec<String>), EvaluationError> {
    if !(bin_fraction > 0.0 && bin_fraction <= 1.0) {
        return Err(EvaluationError::BinFraction(bin_fraction));
    }
    let gold_pos: BTreeMap<&str, usize> = gold_ranking.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let shared_pred: Vec<&str> = pred_ranking
        .iter()
        .map(String::as_str)
        .filter(|l| gold_pos.contains_key(l))
        .collect();
    let n = shared_pred.len();
    if n < 5 {
        return Err(EvaluationError::TooFewShared { needed: 5, found: n });
    }
    let pred_rank: BTreeMap<&str, i64> = shared_pred.iter().enumerate().map(|(i, &l)| (l, i as i64 + 1)).collect();
    let gold_rank: BTreeMap<&str, i64> = gold_ranking
        .iter()
        .map(String::as_str)
        .filter(|l| pred_rank.contains_key(l))
        .enumerate()
        .map(|(i, l)| (l, i as i64 + 1))
        .collect();
    let mut d: Vec<(&str, i64)> = pred_rank.iter().map(|(&l, &p)| (l, gold_rank[l] - p)).collect();
    let k = (bin_fraction * n as f64 - 1e-9).ceil().max(1.0) as usize;

    d.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let fp = d.iter().take_while(|e| e.1 > 0).take(k).map(|e| e.0.to_owned()).collect();
    d.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let fn_ = d.iter().take_while(|e| e.1 < 0).take(k).map(|e| e.0.to_owned()).collect();
    Ok((fp, fn_))
}

/// Symmetric matrix of pairwise Spearman correlations between methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub methods: Vec<String>,
    /// Row-major, `None` where a pair shares fewer than 3 lemmas or has no
    /// rank variance.
    pub rho: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.methods.iter().position(|m| m == a)?;
        let j = self.methods.iter().position(|m| m == b)?;
        self.rho[i][j]
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "method")?;
        for m in &self.methods {
            write!(w, "\t{m}")?;
        }
        writeln!(w)?;
        for (m, row) in self.methods.iter().zip(&self.rho) {
            write!(w, "{m}")?;
            for v in row {
                write!(w, "\t{}", tsv::fmt_score(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Pairwise Spearman over each pair's shared scored lemmas. Pairs without
/// enough overlap become missing cells and are reported to `diag`.
pub fn method_correlation_matrix(
    tables: &[ChangeScoreTable],
    diag: &mut Diagnostics,
) -> Result<CorrelationMatrix, EvaluationError> {
    if tables.len() < 2 {
        return Err(EvaluationError::TooFewTables);
    }
    let k = tables.len();
    let maps: Vec<BTreeMap<String, f64>> = tables
        .iter()
        .map(|t| t.present().map(|(l, s)| (l.to_owned(), s)).collect())
        .collect();
    let mut rho = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let r = match spearman(&maps[i], &maps[j]) {
                Ok(res) => res.rho,
                Err(e) => {
                    diag.warn(
                        "correlate",
                        format!("{} vs {}: {e}", tables[i].method_id, tables[j].method_id),
                    );
                    None
                }
            };
            rho[i][j] = r;
            rho[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        methods: tables.iter().map(|t| t.method_id.clone()).collect(),
        rho,
    })
}

/// Cell-wise mean of per-dataset matrices over the same methods; a cell is
/// averaged over the matrices where it is present.
///
/// # Panics
/// If the matrices list different methods.
pub fn average_correlation_matrices(matrices: &[CorrelationMatrix]) -> Option<CorrelationMatrix> {
    let first = matrices.first()?;
    let k = first.methods.len();
    let mut rho = vec![vec![None; k]; k];
    for (i, row) in rho.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let vals: Vec<f64> = matrices
                .iter()
                .filter_map(|m| {
                    assert_eq!(m.methods, first.methods, "matrices over different methods");
                    m.rho[i][j]
                })
                .collect();
            if !vals.is_empty() {
                *cell = Some(vals.iter().sum::<f64>() / vals.len() as f64);
            }
        }
    }
    Some(CorrelationMatrix {
        methods: first.methods.clone(),
        rho,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method_id: String,
    pub spearman: Option<f64>,
    pub p_value: Option<f64>,
    pub accuracy: Option<f64>,
    pub n_evaluated: usize,
    pub fp: Vec<String>,
    #[serde(rename = "fn")]
    pub fn_: Vec<String>,
}

impl EvaluationReport {
    /// Ranking task: Spearman against graded gold plus the rank-distance
    /// FP/FN analysis (skipped, with a warning, below 5 shared lemmas).
    pub fn ranking(
        pred: &ChangeScoreTable,
        gold: &BTreeMap<String, f64>,
        bin_fraction: f64,
        diag: &mut Diagnostics,
    ) -> Result<Self, EvaluationError> {
        let p: BTreeMap<String, f64> = pred.present().map(|(l, s)| (l.to_owned(), s)).collect();
        for l in gold.keys().filter(|l| !p.contains_key(*l)) {
            diag.warn_lemma("evaluate", l, "no prediction; excluded from evaluation");
        }
        let res = spearman(&p, gold)?;
        if res.rho.is_none() {
            diag.warn("evaluate", "zero rank variance; correlation undefined");
        }
        let gold_table = ChangeScoreTable::from_scores("gold", gold.iter().map(|(l, &s)| (l.clone(), Some(s))));
        let (fp, fn_) = match fpfn_ranking(&pred.ranking(), &gold_table.ranking(), bin_fraction) {
            Ok(x) => x,
            Err(e @ EvaluationError::TooFewShared { .. }) => {
                diag.warn("evaluate", format!("FP/FN analysis skipped: {e}"));
                (Vec::new(), Vec::new())
            }
            Err(e) => return Err(e),
        };
        Ok(Self {
            method_id: pred.method_id.clone(),
            spearman: res.rho,
            p_value: res.p_value,
            accuracy: None,
            n_evaluated: res.n,
            fp,
            fn_,
        })
    }

    /// Classification task: accuracy against binary gold.
    pub fn classification(
        pred: &BinaryLabels,
        gold: &BTreeMap<String, u8>,
        diag: &mut Diagnostics,
    ) -> Result<Self, EvaluationError> {
        for l in gold.keys().filter(|l| !pred.labels.contains_key(*l)) {
            diag.warn_lemma("evaluate", l, "no prediction; excluded from evaluation");
        }
        let acc = accuracy(pred, gold)?;
        let (fp, fn_) = fpfn_binary(pred, gold);
        Ok(Self {
            method_id: pred.method_id.clone(),
            spearman: None,
            p_value: None,
            accuracy: Some(acc),
            n_evaluated: shared_labels(pred, gold).count(),
            fp,
            fn_,
        })
    }

    /// Methods × metrics table.
    pub fn write_tsv<W: Write>(reports: &[EvaluationReport], mut w: W) -> io::Result<()> {
        writeln!(w, "method\tspearman\tp_value\taccuracy\tn\tfp\tfn")?;
        for r in reports {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.method_id,
                tsv::fmt_score(r.spearman),
                tsv::fmt_score(r.p_value),
                tsv::fmt_score(r.accuracy),
                r.n_evaluated,
                r.fp.join(","),
                r.fn_.join(",")
            )?;
        }
        Ok(())
    }
}
