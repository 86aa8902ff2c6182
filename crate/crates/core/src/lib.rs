//! Lexical semantic change detection between two time periods.
//!
//! The crate is organised as a set of pipeline stages that communicate
//! through plain data types:
//!
//! - [`corpus`]: streaming CoNLL-U ingestion, target lexicons, usage indexing.
//! - [`profiling`]: grammatical profiles (morphological and syntactic
//!   frequency vectors) and the MORPH / SYNT / MORPHSYNT change scores.
//! - [`contextual`]: usage matrices of token embeddings and the APD, PRT,
//!   APD-PRT and JSD (affinity propagation + Jensen-Shannon) scores.
//! - [`static_embeddings`]: word2vec text loading, Orthogonal Procrustes
//!   alignment and aligned cosine distance.
//! - [`scoring`]: per-method score tables, geometric-mean ensembles, rankings.
//! - [`binarize`]: single-breakpoint least-squares change point detection.
//! - [`evaluation`]: Spearman, accuracy, false positive / negative analysis
//!   and inter-method correlation matrices.
//! - [`manifest`]: warnings and run manifests shared by every stage.

pub mod binarize;
pub mod contextual;
pub mod corpus;
pub mod evaluation;
pub mod manifest;
pub mod profiling;
pub mod scoring;
pub mod static_embeddings;

mod period;
mod tsv;

pub use binarize::{binarize, detect_change_point, BinaryLabels, BinarizeError};
pub use contextual::{
    affinity_propagation, apd, apd_prt, jsd_score, prt, read_usage_matrix, write_usage_matrix,
    AffinityConfig, ClusterDistribution, Clustering, ContextualMetric, MetricError, UsageMatrix,
};
pub use corpus::{
    collect_surface_forms, index_usages, read_conllu, ConlluReader, ParseMode, Sentence, TargetEntry,
    TargetLexicon, Token, UsageIndex,
};
pub use evaluation::{
    accuracy, fpfn_binary, fpfn_ranking, method_correlation_matrix, spearman, CorrelationMatrix,
    EvaluationReport, SpearmanResult,
};
pub use manifest::{Diagnostics, RunManifest, Warning};
pub use period::Period;
pub use profiling::{
    build_profile, category_distance, score_profiles, CategoryVector, GrammaticalProfile,
    ProfileConfig, ProfileKind,
};
pub use scoring::{ensemble, rank, ChangeScoreTable, ScoringError};
pub use static_embeddings::{
    procrustes_align, read_word2vec_text, static_change_score, Alignment, AlignmentMode,
    VectorSpace,
};
