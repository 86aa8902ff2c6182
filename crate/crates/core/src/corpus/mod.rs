//! CoNLL-U ingestion, target lexicons and usage indexing.

mod conllu;
mod index;
mod lexicon;

use thiserror::Error;

pub use conllu::{read_conllu, write_conllu, ConlluReader, Features, ParseMode, Sentence, Token};
pub use index::{index_usages, Occurrence, UsageIndex};
pub use lexicon::{
    collect_surface_forms, read_gold, read_targets, Gold, SurfaceFormCollector, TargetEntry,
    TargetLexicon,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: expected 10 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: read failed: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
    #[error("target list: {0}")]
    Target(String),
}

impl CorpusError {
    /// Line number of a parse error, if it has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::ColumnCount { line, .. }
            | CorpusError::Malformed { line, .. }
            | CorpusError::Io { line, .. } => Some(*line),
            CorpusError::Target(_) => None,
        }
    }
}
