//! Tools for building a Yiddish part-of-speech tagger: script notation,
//! corpus ingestion and QA, romanized-to-script conversion, treebank
//! preparation, word embeddings, a linear-chain CRF tagger and
//! cross-validated evaluation.

pub mod crf;
pub mod edit;
pub mod embeddings;
pub mod eval;
pub mod romanizer;
pub mod script;
pub mod synthetic;
pub mod textpipe;
pub mod treebank;

pub use script::{Inventory, ScriptText};
