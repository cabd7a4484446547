//! Bracketed treebank reading and conversion into tagged script sentences.

mod tagset;
mod transform;
mod tree;

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

pub use tagset::{base_tags, is_tilde_tag, strip_split_suffix, TagSetError, TagSetRegistry};
pub use transform::{
    extract_leaves, is_empty_element, recombine_split_words, split_joined_words, TaggedToken, TransformError,
};
pub use tree::{parse_trees, ParseError, Tree};

use crate::romanizer::{ConversionError, Romanizer, Route};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrepareError {
    #[error("tree {tree}: {source}")]
    Transform {
        tree: usize,
        #[source]
        source: TransformError,
    },
    #[error("tree {tree} token {token}: tag {tag:?} is not in the tagset")]
    NovelTag { tree: usize, token: usize, tag: String },
    #[error("tree {tree} token {token} ({word:?}): {source}")]
    Conversion {
        tree: usize,
        token: usize,
        word: String,
        #[source]
        source: ConversionError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedToken {
    pub word: String,
    pub romanized: String,
    pub tag: String,
    pub route: Route,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSentence {
    pub id: Option<String>,
    pub tokens: Vec<PreparedToken>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrepareStats {
    pub trees: usize,
    pub leaves: usize,
    pub merges: usize,
    pub added_segments: usize,
    pub tokens: usize,
    pub tilde_tokens: usize,
    pub split_source_words: usize,
    pub routes: BTreeMap<String, usize>,
    pub tag_counts: BTreeMap<String, u64>,
    pub skipped: Vec<(usize, String)>,
}

impl PrepareStats {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("trees", self.trees),
            ("leaves", self.leaves),
            ("merges", self.merges),
            ("added_segments", self.added_segments),
            ("tokens", self.tokens),
            ("distinct_tags", self.tag_counts.len()),
            ("tilde_tokens", self.tilde_tokens),
            ("split_source_words", self.split_source_words),
            ("skipped_trees", self.skipped.len()),
        ] {
            s.push_str(&format!("{k}\t{v}\n"));
        }
        for (r, n) in &self.routes {
            s.push_str(&format!("route.{r}\t{n}\n"));
        }
        s
    }
}

struct TreeOutcome {
    sentence: PreparedSentence,
    leaves: usize,
    merges: usize,
    added: usize,
    split_words: usize,
}

fn prepare_tree(
    index: usize,
    tree: &Tree,
    romanizer: &Romanizer,
    registry: &TagSetRegistry,
) -> Result<TreeOutcome, PrepareError> {
    let leaves = extract_leaves(tree);
    let merged = recombine_split_words(&leaves).map_err(|source| PrepareError::Transform { tree: index, source })?;
    let split = split_joined_words(&merged).map_err(|source| PrepareError::Transform { tree: index, source })?;
    let merges = leaves.len() - merged.len();
    let added = split.len() - merged.len();
    let split_words = merged.iter().filter(|t| t.word.contains('_')).count();
    debug_assert_eq!(leaves.len() - merges + added, split.len());

    let mut tokens = Vec::with_capacity(split.len());
    for (k, tok) in split.iter().enumerate() {
        if !registry.contains(&tok.tag) {
            return Err(PrepareError::NovelTag {
                tree: index,
                token: k,
                tag: tok.tag.clone(),
            });
        }
        let word = romanizer.respell(&tok.word, &tok.tag);
        let conv = romanizer
            .detransliterate(word, Some(&tok.tag))
            .map_err(|source| PrepareError::Conversion {
                tree: index,
                token: k,
                word: tok.word.clone(),
                source,
            })?;
        tokens.push(PreparedToken {
            word: conv.script.into_string(),
            romanized: tok.word.clone(),
            tag: tok.tag.clone(),
            route: conv.route,
        });
    }
    Ok(TreeOutcome {
        sentence: PreparedSentence {
            id: tree.sentence_id().map(String::from),
            tokens,
        },
        leaves: leaves.len(),
        merges,
        added,
        split_words,
    })
}

/// Extracts, recombines, splits, respells and converts each tree into one
/// tagged sentence. In lenient mode failing trees are skipped and listed in
/// the stats.
pub fn prepare_corpus(
    trees: &[Tree],
    romanizer: &Romanizer,
    registry: &TagSetRegistry,
    strictness: Strictness,
) -> Result<(Vec<PreparedSentence>, PrepareStats), PrepareError> {
    let outcomes: Vec<Result<TreeOutcome, PrepareError>> = trees
        .par_iter()
        .enumerate()
        .map(|(i, t)| prepare_tree(i, t, romanizer, registry))
        .collect();
    let mut stats = PrepareStats {
        trees: trees.len(),
        ..Default::default()
    };
    let mut sentences = Vec::with_capacity(trees.len());
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let o = match outcome {
            Ok(o) => o,
            Err(e) if strictness == Strictness::Lenient => {
                log::warn!("skipping {e}");
                stats.skipped.push((i, e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        stats.leaves += o.leaves;
        stats.merges += o.merges;
        stats.added_segments += o.added;
        stats.split_source_words += o.split_words;
        for t in &o.sentence.tokens {
            stats.tokens += 1;
            if is_tilde_tag(&t.tag) {
                stats.tilde_tokens += 1;
            }
            *stats.routes.entry(t.route.to_string()).or_default() += 1;
            *stats.tag_counts.entry(t.tag.clone()).or_default() += 1;
        }
        sentences.push(o.sentence);
    }
    Ok((sentences, stats))
}

/// One token per line (`word`, `tag`, `route`), sentences separated by a
/// blank line and preceded by an `# id=` comment when the tree had one.
pub fn write_prepared<W: Write>(out: &mut W, sentences: &[PreparedSentence]) -> std::io::Result<()> {
    for s in sentences {
        if let Some(id) = &s.id {
            writeln!(out, "# id={id}")?;
        }
        for t in &s.tokens {
            writeln!(out, "{}\t{}\t{}", t.word, t.tag, t.route)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// A sentence of gold-tagged script tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub id: Option<String>,
    pub words: Vec<String>,
    pub tags: Vec<String>,
}

impl TaggedSentence {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// The text a sentence comes from: the part of its id before the comma.
    pub fn source(&self) -> Option<&str> {
        self.id.as_deref().map(|id| id.split(',').next().unwrap_or(id))
    }
}

impl From<&PreparedSentence> for TaggedSentence {
    fn from(s: &PreparedSentence) -> Self {
        TaggedSentence {
            id: s.id.clone(),
            words: s.tokens.iter().map(|t| t.word.clone()).collect(),
            tags: s.tokens.iter().map(|t| t.tag.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tagged file line {line}: {msg}")]
pub struct TaggedFileError {
    pub line: usize,
    pub msg: String,
}

/// Reads the format written by [`write_prepared`]; a third column is optional.
pub fn parse_tagged_file(text: &str) -> Result<Vec<TaggedSentence>, TaggedFileError> {
    let mut out = Vec::new();
    let mut cur = TaggedSentence {
        id: None,
        words: Vec::new(),
        tags: Vec::new(),
    };
    let flush = |cur: &mut TaggedSentence, out: &mut Vec<TaggedSentence>| {
        if !cur.words.is_empty() {
            out.push(std::mem::replace(
                cur,
                TaggedSentence {
                    id: None,
                    words: Vec::new(),
                    tags: Vec::new(),
                },
            ));
        } else {
            cur.id = None;
        }
    };
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            flush(&mut cur, &mut out);
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(id) = rest.trim().strip_prefix("id=") {
                if !cur.words.is_empty() {
                    flush(&mut cur, &mut out);
                }
                cur.id = Some(id.to_string());
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 || cols.len() > 3 || cols[0].is_empty() || cols[1].is_empty() {
            return Err(TaggedFileError {
                line: n + 1,
                msg: "expected word<TAB>tag[<TAB>route]".into(),
            });
        }
        cur.words.push(cols[0].to_string());
        cur.tags.push(cols[1].to_string());
    }
    flush(&mut cur, &mut out);
    Ok(out)
}
