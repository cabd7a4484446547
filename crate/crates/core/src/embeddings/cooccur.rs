use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

/// Distance-weighted co-occurrence counts over a pruned vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceCounts {
    /// Descending corpus count, then lexical.
    pub vocab: Vec<String>,
    pub vocab_counts: Vec<u64>,
    pub pairs: BTreeMap<(u32, u32), f64>,
    pub window: usize,
    pub min_count: u64,
}

impl CooccurrenceCounts {
    pub fn get(&self, a: &str, b: &str) -> f64 {
        let find = |t: &str| self.vocab.iter().position(|v| v == t);
        match (find(a), find(b)) {
            (Some(i), Some(j)) => self.pairs.get(&(i as u32, j as u32)).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

const CHUNK: usize = 512;

/// Counts pairs within `window` positions, weighting each by 1/distance in
/// both directions. Tokens seen fewer than `min_count` times are removed
/// before the window is applied. Chunks are merged in corpus order so the
/// sums do not depend on the thread count.
pub fn count_cooccurrences<S: AsRef<str> + Sync>(
    sentences: &[Vec<S>],
    window: usize,
    min_count: u64,
) -> CooccurrenceCounts {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for s in sentences {
        for t in s {
            *freq.entry(t.as_ref()).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = freq.into_iter().filter(|&(_, n)| n >= min_count).collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let index: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, (t, _))| (*t, i as u32)).collect();

    let partials: Vec<HashMap<(u32, u32), f64>> = sentences
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc: HashMap<(u32, u32), f64> = HashMap::new();
            for s in chunk {
                let ids: Vec<u32> = s.iter().filter_map(|t| index.get(t.as_ref()).copied()).collect();
                for (i, &a) in ids.iter().enumerate() {
                    for d in 1..=window {
                        let Some(&b) = ids.get(i + d) else {
                            break;
                        };
                        let w = 1.0 / d as f64;
                        *acc.entry((a, b)).or_insert(0.0) += w;
                        *acc.entry((b, a)).or_insert(0.0) += w;
                    }
                }
            }
            acc
        })
        .collect();
    let mut pairs: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for part in partials {
        let mut sorted: Vec<_> = part.into_iter().collect();
        sorted.sort_by_key(|&(k, _)| k);
        for (k, v) in sorted {
            *pairs.entry(k).or_insert(0.0) += v;
        }
    }
    CooccurrenceCounts {
        vocab: vocab.iter().map(|(t, _)| t.to_string()).collect(),
        vocab_counts: vocab.iter().map(|&(_, n)| n).collect(),
        pairs,
        window,
        min_count,
    }
}
