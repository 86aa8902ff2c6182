use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Sentence, TargetLexicon};
use crate::Period;

/// `(sentence_index, token_index)` of one occurrence.
pub type Occurrence = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageIndex {
    pub period: Period,
    /// Every target lemma has an entry, possibly empty.
    pub occurrences: BTreeMap<String, Vec<Occurrence>>,
}

impl UsageIndex {
    pub fn new(period: Period, lexicon: &TargetLexicon) -> Self {
        Self {
            period,
            occurrences: lexicon.lemmas().map(|l| (l.to_owned(), Vec::new())).collect(),
        }
    }

    pub fn get(&self, lemma: &str) -> &[Occurrence] {
        self.occurrences.get(lemma).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, lemma: &str) -> usize {
        self.get(lemma).len()
    }

    /// Records the target occurrences of one sentence.
    pub fn observe(&mut self, sentence: &Sentence, lexicon: &TargetLexicon) {
        for t in &sentence.tokens {
            if let Some(i) = lexicon.match_token(t) {
                let lemma = &lexicon.entries()[i].lemma;
                self.occurrences
                    .entry(lemma.clone())
                    .or_default()
                    .push((sentence.index, t.token_index));
            }
        }
    }
}

/// Lists every occurrence of every target lemma, in corpus order.
pub fn index_usages<'a, I>(corpus: I, lexicon: &TargetLexicon, period: Period) -> UsageIndex
where
    I: IntoIterator<Item = &'a Sentence>,
{
    let mut index = UsageIndex::new(period, lexicon);
    for s in corpus {
        index.observe(s, lexicon);
    }
    index
}
