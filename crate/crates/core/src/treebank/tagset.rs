use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

const BUILTIN_TAGSET: &str = include_str!("../../data/tagset.tsv");

#[derive(Debug, Error)]
pub enum TagSetError {
    #[error("tagset line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// The POS labels of the prepared corpus with their counts.
#[derive(Debug, Clone)]
pub struct TagSetRegistry {
    tags: Vec<(String, u64)>,
    index: HashMap<String, usize>,
    base_tags: BTreeSet<String>,
}

/// Base tags of a label: tilde parts with any split suffix removed.
pub fn base_tags(tag: &str) -> Vec<&str> {
    tag.split('~').map(strip_split_suffix).collect()
}

/// `ADV_S1` → `ADV`; labels without a split suffix are returned as is.
pub fn strip_split_suffix(tag: &str) -> &str {
    if let Some(at) = tag.rfind("_S") {
        let digits = &tag[at + 2..];
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            return &tag[..at];
        }
    }
    tag
}

pub fn is_tilde_tag(tag: &str) -> bool {
    tag.contains('~')
}

impl TagSetRegistry {
    pub fn builtin() -> &'static TagSetRegistry {
        static REG: std::sync::OnceLock<TagSetRegistry> = std::sync::OnceLock::new();
        REG.get_or_init(|| TagSetRegistry::parse(BUILTIN_TAGSET).expect("builtin tagset is valid"))
    }

    pub fn parse(text: &str) -> Result<Self, TagSetError> {
        let mut tags = Vec::new();
        let mut index = HashMap::new();
        let mut base = BTreeSet::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| TagSetError::Malformed {
                line: line_no,
                msg: msg.to_string(),
            };
            let (tag, count) = line.split_once('\t').ok_or_else(|| bad("expected tag and count"))?;
            let count: u64 = count.trim().parse().map_err(|_| bad("bad count"))?;
            if count == 0 {
                return Err(bad("count must be at least 1"));
            }
            if tag.is_empty() || index.insert(tag.to_string(), tags.len()).is_some() {
                return Err(bad("empty or duplicate tag"));
            }
            base.extend(base_tags(tag).into_iter().map(String::from));
            tags.push((tag.to_string(), count));
        }
        Ok(TagSetRegistry {
            tags,
            index,
            base_tags: base,
        })
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.index.contains_key(tag)
    }

    pub fn count(&self, tag: &str) -> Option<u64> {
        self.index.get(tag).map(|&i| self.tags[i].1)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.tags.iter().map(|(_, c)| c).sum()
    }

    pub fn tags(&self) -> impl Iterator<Item = (&str, u64)> {
        self.tags.iter().map(|(t, c)| (t.as_str(), *c))
    }

    pub fn base_tags(&self) -> &BTreeSet<String> {
        &self.base_tags
    }

    /// Whether every base part of `tag` is a known base tag.
    pub fn is_well_formed(&self, tag: &str) -> bool {
        base_tags(tag).iter().all(|b| self.base_tags.contains(*b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_matches_published_table() {
        let r = TagSetRegistry::builtin();
        assert_eq!(r.len(), 155);
        assert_eq!(r.total(), 82_675);
        let tilde: Vec<_> = r.tags().filter(|(t, _)| is_tilde_tag(t)).collect();
        assert_eq!(tilde.len(), 53);
        assert_eq!(tilde.iter().map(|(_, c)| c).sum::<u64>(), 2_405);
        assert_eq!(r.count("VBF~PRO"), Some(105));
    }

    #[test]
    fn split_suffix() {
        assert_eq!(strip_split_suffix("ADV_S1"), "ADV");
        assert_eq!(strip_split_suffix("RP-H_S0"), "RP-H");
        assert_eq!(strip_split_suffix("X_S"), "X_S");
        assert_eq!(base_tags("P~D_S0"), vec!["P", "D"]);
        assert!(TagSetRegistry::builtin().is_well_formed("NUM_S7"));
        assert!(!TagSetRegistry::builtin().is_well_formed("ZZZ"));
    }

    #[test]
    fn zero_count_rejected() {
        assert!(TagSetRegistry::parse("A\t0\n").is_err());
        assert!(TagSetRegistry::parse("A\t1\nA\t2\n").is_err());
    }
}
