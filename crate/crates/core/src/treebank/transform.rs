use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("unmatched '@' marker on leaf {0}")]
    DanglingMarker(usize),
    #[error("empty underscore segment in token {0}")]
    EmptySegment(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub word: String,
    pub tag: String,
}

impl TaggedToken {
    pub fn new(word: impl Into<String>, tag: impl Into<String>) -> Self {
        TaggedToken {
            word: word.into(),
            tag: tag.into(),
        }
    }
}

/// Leaf tags that carry metadata rather than text.
const NON_TEXT_TAGS: &[&str] = &["ID", "CODE", "-NONE-", "LB"];

/// Traces, empty subjects and null complementizers.
pub fn is_empty_element(tag: &str, word: &str) -> bool {
    word.starts_with('*') || (word == "0" && tag == "C")
}

/// Text-bearing leaves in document order.
pub fn extract_leaves(tree: &super::Tree) -> Vec<(String, String)> {
    tree.leaves()
        .into_iter()
        .filter(|(tag, word)| !NON_TEXT_TAGS.contains(tag) && !is_empty_element(tag, word))
        .map(|(t, w)| (t.to_string(), w.to_string()))
        .collect()
}

/// Merges `@`-marked chains into single tokens with `~`-joined tags.
pub fn recombine_split_words(leaves: &[(String, String)]) -> Result<Vec<TaggedToken>, TransformError> {
    let mut out = Vec::with_capacity(leaves.len());
    let mut open: Option<(usize, TaggedToken)> = None;
    for (i, (tag, word)) in leaves.iter().enumerate() {
        let leading = word.starts_with('@');
        let body = word.strip_prefix('@').unwrap_or(word);
        let trailing = body.ends_with('@') && !(leading && body.is_empty());
        let body = if trailing { &body[..body.len() - 1] } else { body };
        let mut current = match (open.take(), leading) {
            (Some((_, mut acc)), true) => {
                acc.word.push_str(body);
                acc.tag.push('~');
                acc.tag.push_str(tag);
                acc
            }
            (Some((start, _)), false) => return Err(TransformError::DanglingMarker(start)),
            (None, true) => return Err(TransformError::DanglingMarker(i)),
            (None, false) => TaggedToken::new(body, tag.as_str()),
        };
        if trailing {
            open = Some((i, std::mem::take(&mut current)));
        } else {
            out.push(current);
        }
    }
    if let Some((start, _)) = open {
        return Err(TransformError::DanglingMarker(start));
    }
    Ok(out)
}

impl Default for TaggedToken {
    fn default() -> Self {
        TaggedToken::new("", "")
    }
}

/// Splits underscore-joined words, tagging the parts `<tag>_S0`, `<tag>_S1`, ….
pub fn split_joined_words(tokens: &[TaggedToken]) -> Result<Vec<TaggedToken>, TransformError> {
    let mut out = Vec::with_capacity(tokens.len());
    for (i, tok) in tokens.iter().enumerate() {
        if !tok.word.contains('_') {
            out.push(tok.clone());
            continue;
        }
        let parts: Vec<&str> = tok.word.split('_').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(TransformError::EmptySegment(i));
        }
        for (k, p) in parts.into_iter().enumerate() {
            out.push(TaggedToken::new(p, format!("{}_S{k}", tok.tag)));
        }
    }
    Ok(out)
}
