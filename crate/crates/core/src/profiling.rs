//! Grammatical profiles and profile-based change scores.
//!
//! A profile counts, over all occurrences of a target lemma in one period,
//! the values of every morphological category (`Tense: {Past: 42, Pres: 51}`)
//! and the dependency relations to the syntactic head. Change between two
//! periods is the cosine distance between count vectors:
//!
//! - MORPH: maximum per-category distance over categories present in both periods;
//! - SYNT: distance between the relation vectors;
//! - MORPHSYNT: the relation vector joins the morphological categories as one
//!   more operand of the maximum.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Sentence, Token, UsageIndex};
use crate::Period;

/// Category name under which the dependency-relation vector is reported.
pub const SYNTAX: &str = "SYNTAX";

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("{lemma}: category {category} sums to {sum}, more than {n_usages} usages")]
    CategoryOverflow {
        lemma: String,
        category: String,
        sum: u64,
        n_usages: u64,
    },
    #[error("{lemma}: relation counts sum to {sum}, expected {n_usages}")]
    SyntaxMismatch { lemma: String, sum: u64, n_usages: u64 },
    #[error("{lemma}: duplicate category {category}")]
    DuplicateCategory { lemma: String, category: String },
    #[error("{lemma}: occurrence ({0}, {1}) is not in the corpus", .occurrence.0, .occurrence.1)]
    DanglingOccurrence {
        lemma: String,
        occurrence: (usize, usize),
    },
    #[error("profiles differ in lemma ({0} vs {1})")]
    LemmaMismatch(String, String),
    #[error("{0}: both profiles are from the same period")]
    SamePeriod(String),
    #[error("usage index is for {index}, requested {requested}")]
    PeriodMismatch { index: Period, requested: Period },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProfileKind {
    Morph,
    Synt,
    MorphSynt,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 3] = [ProfileKind::Morph, ProfileKind::Synt, ProfileKind::MorphSynt];

    pub fn method_id(self) -> &'static str {
        match self {
            ProfileKind::Morph => "MORPH",
            ProfileKind::Synt => "SYNT",
            ProfileKind::MorphSynt => "MORPHSYNT",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.method_id())
    }
}

impl FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "morph" => Ok(ProfileKind::Morph),
            "synt" => Ok(ProfileKind::Synt),
            "morphsynt" => Ok(ProfileKind::MorphSynt),
            _ => Err(format!("unknown profile kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryVector {
    pub category: String,
    pub counts: BTreeMap<String, u64>,
}

impl CategoryVector {
    pub fn new(category: impl Into<String>) -> Self {
        Self {
            category: category.into(),
            counts: BTreeMap::new(),
        }
    }

    pub fn from_counts<'a>(category: &str, counts: impl IntoIterator<Item = (&'a str, u64)>) -> Self {
        Self {
            category: category.to_owned(),
            counts: counts.into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.values().all(|&c| c == 0)
    }

    fn add(&mut self, value: &str) {
        *self.counts.entry(value.to_owned()).or_insert(0) += 1;
    }
}

/// Cosine distance between two count vectors aligned on the union of their
/// values. `None` when either vector is all zero (absent category).
pub fn category_distance(a: &CategoryVector, b: &CategoryVector) -> Option<f64> {
    if a.is_zero() || b.is_zero() {
        return None;
    }
    let keys: BTreeSet<&String> = a.counts.keys().chain(b.counts.keys()).collect();
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for k in keys {
        let x = a.counts.get(k).copied().unwrap_or(0) as f64;
        let y = b.counts.get(k).copied().unwrap_or(0) as f64;
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let cos = dot / (na * nb).sqrt();
    Some((1.0 - cos).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammaticalProfile {
    pub lemma: String,
    pub period: Period,
    /// Sorted by category name.
    pub morph: Vec<CategoryVector>,
    pub synt: CategoryVector,
    pub n_usages: u64,
}

impl GrammaticalProfile {
    pub fn empty(lemma: &str, period: Period) -> Self {
        Self {
            lemma: lemma.to_owned(),
            period,
            morph: Vec::new(),
            synt: CategoryVector::new(SYNTAX),
            n_usages: 0,
        }
    }

    /// Assembles a profile from explicit counts, checking that no category
    /// counts more values than there are usages and that every usage has
    /// exactly one relation.
    pub fn from_parts(
        lemma: &str,
        period: Period,
        mut morph: Vec<CategoryVector>,
        synt: BTreeMap<String, u64>,
        n_usages: u64,
    ) -> Result<Self, ProfileError> {
        morph.sort_by(|a, b| a.category.cmp(&b.category));
        for w in morph.windows(2) {
            if w[0].category == w[1].category {
                return Err(ProfileError::DuplicateCategory {
                    lemma: lemma.to_owned(),
                    category: w[0].category.clone(),
                });
            }
        }
        let p = Self {
            lemma: lemma.to_owned(),
            period,
            morph,
            synt: CategoryVector {
                category: SYNTAX.to_owned(),
                counts: synt,
            },
            n_usages,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        for c in &self.morph {
            let sum = c.total();
            if sum > self.n_usages {
                return Err(ProfileError::CategoryOverflow {
                    lemma: self.lemma.clone(),
                    category: c.category.clone(),
                    sum,
                    n_usages: self.n_usages,
                });
            }
        }
        let sum = self.synt.total();
        if sum != self.n_usages {
            return Err(ProfileError::SyntaxMismatch {
                lemma: self.lemma.clone(),
                sum,
                n_usages: self.n_usages,
            });
        }
        Ok(())
    }

    pub fn category(&self, name: &str) -> Option<&CategoryVector> {
        self.morph
            .binary_search_by(|c| c.category.as_str().cmp(name))
            .ok()
            .map(|i| &self.morph[i])
    }

    pub fn to_document(&self) -> ProfileDocument {
        ProfileDocument {
            lemma: self.lemma.clone(),
            period: self.period,
            n_usages: self.n_usages,
            morph: self
                .morph
                .iter()
                .map(|c| (c.category.clone(), c.counts.clone()))
                .collect(),
            synt: self.synt.counts.clone(),
        }
    }

    pub fn from_document(doc: ProfileDocument) -> Result<Self, ProfileError> {
        let morph = doc
            .morph
            .into_iter()
            .map(|(category, counts)| CategoryVector { category, counts })
            .collect();
        Self::from_parts(&doc.lemma, doc.period, morph, doc.synt, doc.n_usages)
    }
}

/// JSON shape of a profile: category → value → count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub lemma: String,
    pub period: Period,
    pub n_usages: u64,
    pub morph: BTreeMap<String, BTreeMap<String, u64>>,
    pub synt: BTreeMap<String, u64>,
}

/// Builds one profile token by token.
#[derive(Debug, Clone)]
pub struct ProfileAccumulator {
    lemma: String,
    period: Period,
    morph: BTreeMap<String, CategoryVector>,
    synt: CategoryVector,
    n_usages: u64,
}

impl ProfileAccumulator {
    pub fn new(lemma: &str, period: Period) -> Self {
        Self {
            lemma: lemma.to_owned(),
            period,
            morph: BTreeMap::new(),
            synt: CategoryVector::new(SYNTAX),
            n_usages: 0,
        }
    }

    pub fn add(&mut self, token: &Token) {
        self.n_usages += 1;
        for (cat, value) in &token.feats {
            self.morph
                .entry(cat.clone())
                .or_insert_with(|| CategoryVector::new(cat.as_str()))
                .add(value);
        }
        self.synt.add(&token.deprel);
    }

    pub fn finish(self) -> GrammaticalProfile {
        GrammaticalProfile {
            lemma: self.lemma,
            period: self.period,
            morph: self.morph.into_values().collect(),
            synt: self.synt,
            n_usages: self.n_usages,
        }
    }
}

/// Builds the profile of `lemma` from the occurrences listed in `index`.
///
/// `corpus` must be the full sentence sequence the index was built from, so
/// that `corpus[i].index == i`.
pub fn build_profile(
    corpus: &[Sentence],
    index: &UsageIndex,
    lemma: &str,
    period: Period,
) -> Result<GrammaticalProfile, ProfileError> {
    if index.period != period {
        return Err(ProfileError::PeriodMismatch {
            index: index.period,
            requested: period,
        });
    }
    let mut acc = ProfileAccumulator::new(lemma, period);
    for &(s, t) in index.get(lemma) {
        let token = corpus
            .get(s)
            .filter(|sent| sent.index == s)
            .and_then(|sent| sent.tokens.get(t))
            .ok_or_else(|| ProfileError::DanglingOccurrence {
                lemma: lemma.to_owned(),
                occurrence: (s, t),
            })?;
        acc.add(token);
    }
    Ok(acc.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProfileConfig {
    /// Categories whose combined count over both periods is below this are
    /// ignored. Zero keeps every category.
    pub min_category_count: u64,
}

fn shared_distance(a: &CategoryVector, b: &CategoryVector, config: &ProfileConfig) -> Option<f64> {
    if a.total() + b.total() < config.min_category_count {
        return None;
    }
    category_distance(a, b)
}

fn morph_distances<'a>(
    p1: &'a GrammaticalProfile,
    p2: &'a GrammaticalProfile,
    config: &'a ProfileConfig,
) -> impl Iterator<Item = f64> + 'a {
    p1.morph.iter().filter_map(move |c1| {
        let c2 = p2.category(&c1.category)?;
        shared_distance(c1, c2, config)
    })
}

fn max_of(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.fold(None, |acc, d| Some(acc.map_or(d, |m: f64| m.max(d))))
}

/// Profile-based change score between two periods of the same lemma.
///
/// `Ok(None)` means the score is undefined: no category carries counts in
/// both periods.
pub fn score_profiles(
    p1: &GrammaticalProfile,
    p2: &GrammaticalProfile,
    kind: ProfileKind,
    config: &ProfileConfig,
) -> Result<Option<f64>, ProfileError> {
    if p1.lemma != p2.lemma {
        return Err(ProfileError::LemmaMismatch(p1.lemma.clone(), p2.lemma.clone()));
    }
    if p1.period == p2.period {
        return Err(ProfileError::SamePeriod(p1.lemma.clone()));
    }
    let synt = || shared_distance(&p1.synt, &p2.synt, config);
    Ok(match kind {
        ProfileKind::Morph => max_of(morph_distances(p1, p2, config)),
        ProfileKind::Synt => synt(),
        ProfileKind::MorphSynt => max_of(morph_distances(p1, p2, config).chain(synt())),
    })
}
