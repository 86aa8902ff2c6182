//! Static embedding spaces, Orthogonal Procrustes alignment and aligned
//! cosine distance.
//!
//! Both spaces are preprocessed the same way before alignment: rows are
//! length-normalised, columns mean-centred, rows normalised again. The
//! rotation `Q` minimises `‖X Q − Y‖_F` over the shared vocabulary.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifest::Diagnostics;

#[derive(Debug, Error)]
pub enum StaticError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("line {line}: duplicate word {word:?}")]
    DuplicateWord { line: usize, word: String },
    #[error("header declares {declared} rows, found {found}")]
    RowCount { declared: usize, found: usize },
    #[error("spaces have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("the two spaces share no vocabulary")]
    NoSharedVocabulary,
    #[error("singular value decomposition failed")]
    Svd,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlignmentMode {
    /// Vectors trained on dictionary-form occurrences only.
    Raw,
    /// Vectors trained with all target forms mapped to the lemma.
    Lemma,
}

impl AlignmentMode {
    pub fn method_id(self) -> &'static str {
        match self {
            AlignmentMode::Raw => "SGNS-raw",
            AlignmentMode::Lemma => "SGNS-lemma",
        }
    }
}

impl fmt::Display for AlignmentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.method_id())
    }
}

impl FromStr for AlignmentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" | "sgns-raw" => Ok(AlignmentMode::Raw),
            "lemma" | "sgns-lemma" => Ok(AlignmentMode::Lemma),
            _ => Err(format!("unknown alignment mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSpace {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    /// One row per vocabulary entry.
    vectors: DMatrix<f64>,
}

impl VectorSpace {
    pub fn new(vocab: Vec<String>, vectors: DMatrix<f64>) -> Result<Self, StaticError> {
        if vocab.len() != vectors.nrows() {
            return Err(StaticError::RowCount {
                declared: vocab.len(),
                found: vectors.nrows(),
            });
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, w) in vocab.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(StaticError::DuplicateWord {
                    line: i + 2,
                    word: w.clone(),
                });
            }
        }
        Ok(Self { vocab, index, vectors })
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn row_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, word: &str) -> Option<Vec<f64>> {
        self.row_of(word)
            .map(|i| self.vectors.row(i).iter().copied().collect())
    }

    /// Normalise rows, centre columns, normalise rows again.
    pub fn preprocessed(&self) -> VectorSpace {
        let mut m = self.vectors.clone();
        normalize_rows(&mut m);
        if m.nrows() > 0 {
            let mean = m.row_mean();
            for mut r in m.row_iter_mut() {
                r -= &mean;
            }
        }
        normalize_rows(&mut m);
        VectorSpace {
            vocab: self.vocab.clone(),
            index: self.index.clone(),
            vectors: m,
        }
    }
}

fn normalize_rows(m: &mut DMatrix<f64>) {
    for mut r in m.row_iter_mut() {
        let n = r.norm();
        if n > 0.0 {
            r /= n;
        }
    }
}

/// Parses the word2vec text format: a `V D` header, then `word v1 … vD` lines.
pub fn read_word2vec_text<R: BufRead>(reader: R) -> Result<VectorSpace, StaticError> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(StaticError::Format {
        line: 1,
        reason: "missing header".to_owned(),
    })??;
    let mut h = header.split_whitespace();
    let bad_header = || StaticError::Format {
        line: 1,
        reason: format!("header {header:?} is not \"V D\""),
    };
    let rows: usize = h.next().and_then(|x| x.parse().ok()).ok_or_else(bad_header)?;
    let dim: usize = h.next().and_then(|x| x.parse().ok()).ok_or_else(bad_header)?;
    if h.next().is_some() || dim == 0 {
        return Err(bad_header());
    }
    let mut vocab = Vec::with_capacity(rows);
    let mut index = HashMap::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dim);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().expect("non-empty line").to_owned();
        let before = data.len();
        for p in parts {
            data.push(p.parse::<f64>().map_err(|_| StaticError::Format {
                line: line_no,
                reason: format!("bad value {p:?}"),
            })?);
        }
        let got = data.len() - before;
        if got != dim {
            return Err(StaticError::Format {
                line: line_no,
                reason: format!("expected {dim} values for {word:?}, found {got}"),
            });
        }
        if index.insert(word.clone(), vocab.len()).is_some() {
            return Err(StaticError::DuplicateWord { line: line_no, word });
        }
        vocab.push(word);
    }
    if vocab.len() != rows {
        return Err(StaticError::RowCount {
            declared: rows,
            found: vocab.len(),
        });
    }
    Ok(VectorSpace {
        vocab,
        index,
        vectors: DMatrix::from_row_slice(rows, dim, &data),
    })
}

/// Result of aligning `x` onto `y`.
#[derive(Debug, Clone)]
pub struct Alignment {
    /// Orthogonal D×D map applied on the right: `x_row · q ≈ y_row`.
    pub q: DMatrix<f64>,
    pub x: VectorSpace,
    pub y: VectorSpace,
    /// Shared vocabulary, in `x` order.
    pub shared: Vec<String>,
}

impl Alignment {
    /// Change score of `word`, or `None` if either space lacks it.
    pub fn score(&self, word: &str) -> Option<f64> {
        static_change_score(&self.x, &self.y, &self.q, word)
    }

    /// `‖X_shared Q − Y_shared‖_F` on the preprocessed spaces.
    pub fn residual(&self, q: &DMatrix<f64>) -> f64 {
        let (xs, ys) = shared_rows(&self.x, &self.y, &self.shared);
        (xs * q - ys).norm()
    }
}

fn shared_rows(x: &VectorSpace, y: &VectorSpace, shared: &[String]) -> (DMatrix<f64>, DMatrix<f64>) {
    let pick = |s: &VectorSpace| {
        let rows: Vec<_> = shared
            .iter()
            .map(|w| s.vectors.row(s.row_of(w).expect("shared word")))
            .collect();
        DMatrix::from_rows(&rows)
    };
    (pick(x), pick(y))
}

/// Preprocesses both spaces and solves for the rotation over their shared
/// vocabulary: `Q = U Vᵀ` where `U Σ Vᵀ = X_sharedᵀ Y_shared`.
pub fn procrustes_align(
    x: &VectorSpace,
    y: &VectorSpace,
    diag: &mut Diagnostics,
) -> Result<Alignment, StaticError> {
    if x.dim() != y.dim() {
        return Err(StaticError::DimensionMismatch(x.dim(), y.dim()));
    }
    let shared: Vec<String> = x
        .vocab
        .iter()
        .filter(|w| y.index.contains_key(*w))
        .cloned()
        .collect();
    if shared.is_empty() {
        return Err(StaticError::NoSharedVocabulary);
    }
    if shared.len() < x.dim() {
        diag.warn(
            "static",
            format!(
                "only {} shared words for dimension {}; the rotation is under-determined",
                shared.len(),
                x.dim()
            ),
        );
    }
    let x = x.preprocessed();
    let y = y.preprocessed();
    let (xs, ys) = shared_rows(&x, &y, &shared);
    let m = xs.transpose() * ys;
    let svd = m.try_svd(true, true, f64::EPSILON, 0).ok_or(StaticError::Svd)?;
    let (u, v_t) = (svd.u.ok_or(StaticError::Svd)?, svd.v_t.ok_or(StaticError::Svd)?);
    let q = u * v_t;
    if q.iter().any(|v| !v.is_finite()) {
        return Err(StaticError::Svd);
    }
    Ok(Alignment { q, x, y, shared })
}

/// `1 − cos(x[word] · Q, y[word])` on preprocessed spaces; `None` when the
/// word is missing from either space.
pub fn static_change_score(
    x: &VectorSpace,
    y: &VectorSpace,
    q: &DMatrix<f64>,
    word: &str,
) -> Option<f64> {
    let xi = x.row_of(word)?;
    let yi = y.row_of(word)?;
    let a = x.vectors.row(xi) * q;
    let b = y.vectors.row(yi);
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(1.0 - a.dot(&b) / (na * nb))
}
