use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::script::{normalize_unicode, Inventory, Provenance, ScriptError};

/// One line of corpus text in ASCII notation, with its page and line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusLine {
    pub doc_id: String,
    pub page: u32,
    pub line: u32,
    pub text: String,
}

impl CorpusLine {
    pub fn provenance(&self) -> Provenance {
        Provenance {
            doc_id: self.doc_id.clone(),
            page: self.page,
            line: self.line,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub lines: Vec<CorpusLine>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Unicode,
    Ascii,
}

/// How lines with characters outside the inventory are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IngestMode {
    #[default]
    Strict,
    /// Drop the line and keep going.
    Lossy,
}

/// A line removed during lossy ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dropped {
    pub at: Provenance,
    pub error: ScriptError,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{doc}:{line}: bad line identifier {id:?} (expected p<page>.l<line>)")]
    BadIdentifier { doc: String, line: usize, id: String },
    #[error("{doc}:{line}: expected two tab-separated fields")]
    MissingText { doc: String, line: usize },
    #[error("{at}: identifier repeated")]
    DuplicateIdentifier { at: Provenance },
    #[error("{doc}: unknown encoding header {value:?}")]
    BadHeader { doc: String, value: String },
    #[error("{at}: {error}")]
    Script { at: Provenance, error: ScriptError },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_identifier(id: &str) -> Option<(u32, u32)> {
    let rest = id.strip_prefix('p')?;
    let (page, line) = rest.split_once(".l")?;
    let page: u32 = page.parse().ok()?;
    let line: u32 = line.parse().ok()?;
    (page >= 1 && line >= 1).then_some((page, line))
}

/// Parses one corpus file: an optional `#enc=unicode|ascii` header, then
/// lines of `p<page>.l<line>` TAB text. Without a header, any non-ASCII
/// byte marks the file as Unicode.
pub fn parse_corpus(
    doc_id: &str,
    text: &str,
    inventory: &Inventory,
    mode: IngestMode,
) -> Result<(Document, Vec<Dropped>), CorpusError> {
    let mut lines = text.lines().enumerate().peekable();
    let mut encoding = None;
    if let Some((_, first)) = lines.peek() {
        if let Some(value) = first.strip_prefix("#enc=") {
            encoding = Some(match value.trim() {
                "unicode" => Encoding::Unicode,
                "ascii" => Encoding::Ascii,
                other => {
                    return Err(CorpusError::BadHeader {
                        doc: doc_id.to_string(),
                        value: other.to_string(),
                    })
                }
            });
            lines.next();
        }
    }
    let encoding = encoding.unwrap_or(if text.is_ascii() {
        Encoding::Ascii
    } else {
        Encoding::Unicode
    });

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut dropped = Vec::new();
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let (id, body) = raw.split_once('\t').ok_or_else(|| CorpusError::MissingText {
            doc: doc_id.to_string(),
            line: i + 1,
        })?;
        let (page, line) = parse_identifier(id).ok_or_else(|| CorpusError::BadIdentifier {
            doc: doc_id.to_string(),
            line: i + 1,
            id: id.to_string(),
        })?;
        let at = Provenance {
            doc_id: doc_id.to_string(),
            page,
            line,
        };
        if !seen.insert((page, line)) {
            return Err(CorpusError::DuplicateIdentifier { at });
        }
        let converted = match encoding {
            Encoding::Unicode => inventory.unicode_to_ascii(&normalize_unicode(body)),
            Encoding::Ascii => inventory.decode(body).map(|_| body.to_string()),
        };
        match converted {
            Ok(text) => out.push(CorpusLine {
                doc_id: doc_id.to_string(),
                page,
                line,
                text,
            }),
            Err(error) => match mode {
                IngestMode::Strict => return Err(CorpusError::Script { at, error }),
                IngestMode::Lossy => {
                    log::warn!("{at}: dropped line: {error}");
                    dropped.push(Dropped { at, error });
                }
            },
        }
    }
    Ok((
        Document {
            doc_id: doc_id.to_string(),
            lines: out,
        },
        dropped,
    ))
}

/// Reads a corpus file; the document id is the file stem.
pub fn read_corpus_file(
    path: &Path,
    inventory: &Inventory,
    mode: IngestMode,
) -> Result<(Document, Vec<Dropped>), CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let doc_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_corpus(&doc_id, &text, inventory, mode)
}

/// Reads every regular file of a directory as one document, in file-name
/// order. Documents are parsed in parallel.
pub fn read_corpus_dir(
    dir: &Path,
    inventory: &Inventory,
    mode: IngestMode,
) -> Result<(Vec<Document>, Vec<Dropped>), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err)? {
        let entry = entry.map_err(io_err)?;
        if entry.file_type().map_err(io_err)?.is_file() {
            paths.push(entry.path());
        }
    }
    paths.sort();
    let parsed: Vec<_> = paths
        .par_iter()
        .map(|p| read_corpus_file(p, inventory, mode))
        .collect::<Result<_, _>>()?;
    let mut docs = Vec::with_capacity(parsed.len());
    let mut dropped = Vec::new();
    for (d, mut x) in parsed {
        docs.push(d);
        dropped.append(&mut x);
    }
    Ok((docs, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unicode_file_converted() {
        let text = "#enc=unicode\np1.l1\t\u{05D1}\u{05D5}\u{05DA}.\np1.l2\t\u{05D0}\u{00A0}\u{05D1}\n";
        let (doc, dropped) = parse_corpus("d", text, Inventory::builtin(), IngestMode::Strict).unwrap();
        assert!(dropped.is_empty());
        assert_eq!(doc.lines[0].text, "bwFx.");
        assert_eq!(doc.lines[1].text, "A b");
        assert_eq!((doc.lines[1].page, doc.lines[1].line), (1, 2));
    }

    #[test]
    fn encoding_detected_without_header() {
        let (doc, _) = parse_corpus("d", "p2.l5\tbwFx\n", Inventory::builtin(), IngestMode::Strict).unwrap();
        assert_eq!(doc.lines[0].text, "bwFx");
        let (doc, _) = parse_corpus("d", "p2.l5\t\u{05D1}\n", Inventory::builtin(), IngestMode::Strict).unwrap();
        assert_eq!(doc.lines[0].text, "b");
    }

    #[test]
    fn strict_and_lossy_unknown_characters() {
        let text = "#enc=unicode\np1.l1\t\u{05D0}\np1.l2\t\u{0416}\n";
        let err = parse_corpus("d", text, Inventory::builtin(), IngestMode::Strict).unwrap_err();
        assert!(matches!(err, CorpusError::Script { ref at, .. } if at.line == 2));
        let (doc, dropped) = parse_corpus("d", text, Inventory::builtin(), IngestMode::Lossy).unwrap();
        assert_eq!(doc.lines.len(), 1);
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].at.line, 2);
    }

    #[test]
    fn identifiers_validated() {
        let inv = Inventory::builtin();
        assert!(matches!(
            parse_corpus("d", "p0.l1\tA\n", inv, IngestMode::Strict),
            Err(CorpusError::BadIdentifier { .. })
        ));
        assert!(matches!(
            parse_corpus("d", "p1.l1\tA\np1.l1\tb\n", inv, IngestMode::Strict),
            Err(CorpusError::DuplicateIdentifier { .. })
        ));
        assert!(matches!(
            parse_corpus("d", "p1.l1 A\n", inv, IngestMode::Strict),
            Err(CorpusError::MissingText { .. })
        ));
    }
}
