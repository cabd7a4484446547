use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrequencyError {
    #[error("frequency table line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// Token counts. Iteration through [`FrequencyTable::sorted`] is by
/// descending count, then token.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_token_lists<'a, I, S>(lists: I) -> Self
    where
        I: IntoIterator<Item = &'a [S]>,
        S: AsRef<str> + 'a,
    {
        let mut table = Self::new();
        for list in lists {
            for tok in list {
                table.add(tok.as_ref(), 1);
            }
        }
        table
    }

    pub fn from_sentences(sentences: &[super::Sentence]) -> Self {
        Self::from_token_lists(sentences.iter().map(|s| s.tokens.as_slice()))
    }

    pub fn add(&mut self, token: &str, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(token.to_string()).or_insert(0) += n;
        self.total += n;
    }

    pub fn merge(&mut self, other: &FrequencyTable) {
        for (tok, &n) in &other.counts {
            self.add(tok, n);
        }
    }

    pub fn get(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    pub fn distinct_tokens(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn sorted(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (tok, n) in self.sorted() {
            s.push_str(tok);
            s.push('\t');
            s.push_str(&n.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self, FrequencyError> {
        let mut table = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tok, n) = line.split_once('\t').ok_or(FrequencyError::Malformed {
                line: i + 1,
                msg: "expected token TAB count".into(),
            })?;
            let n: u64 = n.trim().parse().map_err(|_| FrequencyError::Malformed {
                line: i + 1,
                msg: format!("bad count {n:?}"),
            })?;
            table.add(tok, n);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_table() {
        let t = FrequencyTable::from_token_lists(Vec::<&[String]>::new());
        assert_eq!((t.total_tokens(), t.distinct_tokens()), (0, 0));
    }

    #[test]
    fn small_counts_and_order() {
        let toks = ["a", "a", "b"];
        let t = FrequencyTable::from_token_lists([&toks[..]]);
        assert_eq!(t.get("a"), 2);
        assert_eq!(t.get("b"), 1);
        assert_eq!(t.total_tokens(), 3);
        assert_eq!(t.distinct_tokens(), 2);
        let toks = ["c", "b", "a", "c", "b"];
        let t = FrequencyTable::from_token_lists([&toks[..]]);
        assert_eq!(t.sorted(), vec![("b", 2), ("c", 2), ("a", 1)]);
    }

    #[test]
    fn million_token_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vocab: Vec<String> = (0..5000).map(|i| format!("w{i}")).collect();
        let sentences: Vec<Vec<String>> = (0..50_000)
            .map(|_| (0..20).map(|_| vocab[rng.gen_range(0..vocab.len())].clone()).collect())
            .collect();
        let table = FrequencyTable::from_token_lists(sentences.iter().map(|s| s.as_slice()));

        // reference: sort every token and count runs
        let mut flat: Vec<&str> = sentences.iter().flatten().map(String::as_str).collect();
        flat.sort_unstable();
        let mut reference = Vec::new();
        for tok in flat {
            match reference.last_mut() {
                Some((t, n)) if *t == tok => *n += 1,
                _ => reference.push((tok, 1u64)),
            }
        }
        assert_eq!(table.total_tokens(), 1_000_000);
        assert_eq!(table.distinct_tokens(), reference.len());
        for (tok, n) in reference {
            assert_eq!(table.get(tok), n);
        }
    }

    #[test]
    fn merge_is_sum_and_tsv_round_trips() {
        let a = FrequencyTable::from_token_lists([&["x", "y"][..]]);
        let b = FrequencyTable::from_token_lists([&["y", "z", "z"][..]]);
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.get("y"), 2);
        assert_eq!(FrequencyTable::from_tsv(&ab.to_tsv()).unwrap(), ab);
    }
}
