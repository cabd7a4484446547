//! Corpus ingestion, tokenization, sentence segmentation, frequency counts
//! and corpus quality checks.

mod corpus;
mod freq;
mod qa;
mod tokenize;

pub use corpus::{
    parse_corpus, read_corpus_dir, read_corpus_file, CorpusError, CorpusLine, Document, Dropped,
    Encoding, IngestMode,
};
pub use freq::{FrequencyTable, FrequencyError};
pub use qa::{
    qa_report, ApostropheCandidate, LowFrequencySuspect, MedialFinalSection, MedialFinalToken,
    PointedDocument, QaConfig, QaReport,
};
pub use tokenize::{PunctuationError, Tokenizer};

use crate::script::Provenance;

/// A run of tokens ending at a sentence terminator or at document end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub source_lines: Vec<Provenance>,
}

/// Splits documents into sentences after each `.`, `?` or `!` token.
/// Sentences may cross line breaks but never document boundaries.
pub fn segment_sentences(lines: &[CorpusLine], tokenizer: &Tokenizer) -> Vec<Sentence> {
    let mut sentences = Vec::new();
    let mut current = Sentence {
        tokens: Vec::new(),
        source_lines: Vec::new(),
    };
    let mut doc: Option<&str> = None;
    for line in lines {
        if doc.is_some_and(|d| d != line.doc_id) && !current.tokens.is_empty() {
            sentences.push(std::mem::replace(
                &mut current,
                Sentence {
                    tokens: Vec::new(),
                    source_lines: Vec::new(),
                },
            ));
        }
        doc = Some(&line.doc_id);
        let prov = line.provenance();
        for tok in tokenizer.tokenize(&line.text) {
            if current.source_lines.last() != Some(&prov) {
                current.source_lines.push(prov.clone());
            }
            let ends = tokenizer.is_terminator(&tok);
            current.tokens.push(tok);
            if ends {
                sentences.push(std::mem::replace(
                    &mut current,
                    Sentence {
                        tokens: Vec::new(),
                        source_lines: Vec::new(),
                    },
                ));
            }
        }
    }
    if !current.tokens.is_empty() {
        sentences.push(current);
    }
    sentences
}

/// One sentence per line, tokens separated by single spaces.
pub fn write_sentences<W: std::io::Write>(out: &mut W, sentences: &[Sentence]) -> std::io::Result<()> {
    for s in sentences {
        writeln!(out, "{}", s.tokens.join(" "))?;
    }
    Ok(())
}

/// Reads a sentence file back into token lists; blank lines are skipped.
pub fn parse_sentence_file(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect()
}
