//! Cross-validation folds, tagging metrics and experiment reports.

mod experiment;
mod folds;
mod metrics;

use thiserror::Error;

use crate::crf::CrfError;

pub use experiment::{
    corpus_tags, run_experiment, score_sentences, train_tagger, ConfigResult, EmbeddingSource, ExperimentConfig, ExperimentOptions, ExperimentReport, FoldOutcome,
};
pub use folds::{make_folds, Fold, FoldPlan, NUM_BUCKETS, NUM_FOLDS};
pub use metrics::{
    aggregate_folds, per_tag_f1, token_accuracy, Cell, FoldMetrics, MetricsReport, ReportRow, Subgroup, TagScore,
    PUNCTUATION_TAG,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("expected {expected} items, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("nothing to score")]
    Empty,
    #[error("source {label:?} has {found} sentences, at least {needed} are needed")]
    InsufficientData { label: String, found: usize, needed: usize },
    #[error("fold plan line {line}: {msg}")]
    PlanFormat { line: usize, msg: String },
    #[error("no embedding configurations")]
    NoConfigs,
    #[error("configuration {config:?}, fold {fold}: {source}")]
    Training {
        config: String,
        fold: usize,
        #[source]
        source: CrfError,
    },
    #[error(transparent)]
    Model(#[from] CrfError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
