//! Linear-chain CRF part-of-speech tagger over pluggable token vectors.

mod io;
pub mod lattice;
pub mod lstm;
mod model;
mod train;

use thiserror::Error;

pub use io::{TokenVectorSentence, TokenVectors};
pub use lattice::{Lattice, Marginals, Transitions};
pub use lstm::BiLstmShape;
pub use model::{CrfModel, EmbeddingProvider, Input, ModelSpec, SourceKind, UNKNOWN_TOKEN};
pub use train::{
    scheduled_rate, token_accuracy_of, train, EpochRecord, Example, Optimizer, TrainingConfig, TrainingHistory,
};

#[derive(Debug, Error)]
pub enum CrfError {
    #[error("expected {expected} items, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unknown tag {tag:?} in sentence {sentence} at token {position}")]
    UnknownTag { tag: String, sentence: usize, position: usize },
    #[error("model was built for inventory {model}, current inventory is {inventory}")]
    ChecksumMismatch { model: String, inventory: String },
    #[error("token vectors do not line up with sentence {0}")]
    TokenVectorMisalignment(usize),
    #[error("expected vectors of dimension {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("model expects {} vectors but {} were supplied", .model.as_str(), .provider.as_str())]
    SourceMismatch { model: SourceKind, provider: SourceKind },
    #[error("no training sentences")]
    EmptyTrainingSet,
    #[error("training config: {0}")]
    Config(String),
    #[error("model format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Path score with a length check.
pub fn score_sentence(transitions: &Transitions, lattice: &Lattice, tags: &[usize]) -> Result<f64, CrfError> {
    if tags.len() != lattice.len {
        return Err(CrfError::LengthMismatch {
            expected: lattice.len,
            found: tags.len(),
        });
    }
    Ok(transitions.score_path(lattice, tags))
}
