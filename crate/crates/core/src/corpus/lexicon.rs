use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Sentence, Token};
use crate::manifest::Diagnostics;
use crate::tsv;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub lemma: String,
    pub pos_filter: Option<String>,
    pub surface_forms: BTreeSet<String>,
    pub gold_graded: Option<f64>,
    pub gold_binary: Option<u8>,
}

impl TargetEntry {
    pub fn new(lemma: impl Into<String>, pos_filter: Option<String>) -> Self {
        let lemma = lemma.into();
        Self {
            surface_forms: BTreeSet::from([lemma.clone()]),
            lemma,
            pos_filter,
            gold_graded: None,
            gold_binary: None,
        }
    }
}

/// Gold annotation for one lemma.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Gold {
    pub graded: Option<f64>,
    pub binary: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetLexicon {
    pub language: String,
    pub case_fold: bool,
    entries: Vec<TargetEntry>,
    #[serde(skip)]
    lookup: HashMap<String, usize>,
}

impl TargetLexicon {
    /// Builds a lexicon, rejecting duplicate lemmas and malformed gold labels.
    pub fn new(
        language: impl Into<String>,
        entries: Vec<TargetEntry>,
        case_fold: bool,
    ) -> Result<Self, CorpusError> {
        let mut lookup = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if let Some(b) = e.gold_binary {
                if b > 1 {
                    return Err(CorpusError::Target(format!(
                        "binary gold for {:?} must be 0 or 1, got {b}",
                        e.lemma
                    )));
                }
            }
            if lookup.insert(fold(&e.lemma, case_fold), i).is_some() {
                return Err(CorpusError::Target(format!("duplicate target lemma {:?}", e.lemma)));
            }
        }
        let mut entries = entries;
        for e in &mut entries {
            e.surface_forms.insert(e.lemma.clone());
        }
        Ok(Self {
            language: language.into(),
            case_fold,
            entries,
            lookup,
        })
    }

    pub fn entries(&self) -> &[TargetEntry] {
        &self.entries
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|e| e.lemma.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, lemma: &str) -> Option<&TargetEntry> {
        self.position(lemma).map(|i| &self.entries[i])
    }

    fn position(&self, lemma: &str) -> Option<usize> {
        if self.lookup.is_empty() && !self.entries.is_empty() {
            // deserialized without the index
            return self
                .entries
                .iter()
                .position(|e| fold(&e.lemma, self.case_fold) == fold(lemma, self.case_fold));
        }
        self.lookup.get(&fold(lemma, self.case_fold)).copied()
    }

    /// Index of the entry whose lemma (and POS filter, when set) the token matches.
    pub fn match_token(&self, token: &Token) -> Option<usize> {
        let i = self.position(&token.lemma)?;
        match &self.entries[i].pos_filter {
            Some(pos) if *pos != token.upos => None,
            _ => Some(i),
        }
    }

    /// Attaches gold scores; lemmas not in the lexicon are reported and ignored.
    pub fn attach_gold(&mut self, gold: &BTreeMap<String, Gold>, diag: &mut Diagnostics) {
        for (lemma, g) in gold {
            match self.position(lemma) {
                Some(i) => {
                    self.entries[i].gold_graded = g.graded;
                    self.entries[i].gold_binary = g.binary;
                }
                None => diag.warn_lemma("targets", lemma, "gold lemma not among targets"),
            }
        }
    }
}

pub(crate) fn fold(s: &str, case_fold: bool) -> String {
    if case_fold {
        s.to_lowercase()
    } else {
        s.to_owned()
    }
}

/// Accumulates surface forms sentence by sentence.
pub struct SurfaceFormCollector {
    lexicon: TargetLexicon,
    matched: Vec<usize>,
}

impl SurfaceFormCollector {
    pub fn new(lexicon: TargetLexicon) -> Self {
        let matched = vec![0; lexicon.len()];
        Self { lexicon, matched }
    }

    pub fn observe(&mut self, sentence: &Sentence) {
        for t in &sentence.tokens {
            if let Some(i) = self.lexicon.position(&t.lemma) {
                self.matched[i] += 1;
                self.lexicon.entries[i].surface_forms.insert(t.form.clone());
            }
        }
    }

    /// Finishes collection, warning about lemmas that never occurred.
    pub fn finish(self, diag: &mut Diagnostics) -> TargetLexicon {
        for (e, &n) in self.lexicon.entries.iter().zip(&self.matched) {
            if n == 0 {
                diag.warn_lemma("corpus", &e.lemma, "lemma matches no corpus token");
            }
        }
        self.lexicon
    }
}

/// Resolves each target lemma to the set of token forms carrying it.
pub fn collect_surface_forms<'a, I>(
    corpus: I,
    lemmas: &[&str],
    case_fold: bool,
    diag: &mut Diagnostics,
) -> Result<TargetLexicon, CorpusError>
where
    I: IntoIterator<Item = &'a Sentence>,
{
    if lemmas.is_empty() {
        return Err(CorpusError::Target("empty target list".to_owned()));
    }
    let entries = lemmas.iter().map(|l| TargetEntry::new(*l, None)).collect();
    let mut collector = SurfaceFormCollector::new(TargetLexicon::new("und", entries, case_fold)?);
    for s in corpus {
        collector.observe(s);
    }
    Ok(collector.finish(diag))
}

/// Reads a target list: `lemma<TAB>[pos]` per line.
pub fn read_targets<R: BufRead>(reader: R) -> Result<Vec<TargetEntry>, CorpusError> {
    let mut out = Vec::new();
    for rec in tsv::records(reader) {
        let (line, fields) = rec.map_err(|source| CorpusError::Io { line: 0, source })?;
        let lemma = fields[0].trim();
        if lemma.is_empty() {
            return Err(CorpusError::Target(format!("line {line}: empty lemma")));
        }
        if line == 1 && lemma == "lemma" {
            continue;
        }
        let pos = fields
            .get(1)
            .map(|p| p.trim())
            .filter(|p| !tsv::is_missing(p))
            .map(str::to_owned);
        out.push(TargetEntry::new(lemma, pos));
    }
    if out.is_empty() {
        return Err(CorpusError::Target("empty target list".to_owned()));
    }
    Ok(out)
}

/// Reads a gold file: `lemma<TAB>graded_score<TAB>[binary_label]`.
pub fn read_gold<R: BufRead>(reader: R) -> Result<BTreeMap<String, Gold>, CorpusError> {
    let mut out = BTreeMap::new();
    for rec in tsv::records(reader) {
        let (line, fields) = rec.map_err(|source| CorpusError::Io { line: 0, source })?;
        let lemma = fields[0].trim().to_owned();
        if line == 1 && lemma == "lemma" {
            continue;
        }
        let bad = |what: &str| CorpusError::Target(format!("line {line}: bad {what}"));
        let graded = match fields.get(1) {
            Some(f) if !tsv::is_missing(f) => Some(f.trim().parse::<f64>().map_err(|_| bad("graded score"))?),
            _ => None,
        };
        let binary = match fields.get(2) {
            Some(f) if !tsv::is_missing(f) => match f.trim() {
                "0" => Some(0),
                "1" => Some(1),
                _ => return Err(bad("binary label")),
            },
            _ => None,
        };
        if out.insert(lemma.clone(), Gold { graded, binary }).is_some() {
            return Err(CorpusError::Target(format!("line {line}: duplicate gold lemma {lemma:?}")));
        }
    }
    Ok(out)
}
