use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;
use crate::treebank::TaggedSentence;

pub const NUM_FOLDS: usize = 10;
/// Each fold takes one bucket for test and the next for validation.
pub const NUM_BUCKETS: usize = 2 * NUM_FOLDS;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
    pub source_of: Vec<String>,
    pub bucket_of: Vec<usize>,
    pub seed: u64,
}

/// Shuffles each source's sentences, then deals them longest first into
/// the bucket holding the fewest tokens of that source.
pub fn make_folds<S: AsRef<str>>(token_counts: &[usize], sources: &[S], seed: u64) -> Result<FoldPlan, EvalError> {
    if token_counts.len() != sources.len() {
        return Err(EvalError::LengthMismatch {
            expected: token_counts.len(),
            found: sources.len(),
        });
    }
    let mut by_source: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in sources.iter().enumerate() {
        by_source.entry(s.as_ref()).or_default().push(i);
    }
    if by_source.is_empty() {
        return Err(EvalError::InsufficientData {
            label: String::new(),
            found: 0,
            needed: NUM_BUCKETS,
        });
    }
    for (s, ids) in &by_source {
        if ids.len() < NUM_BUCKETS {
            return Err(EvalError::InsufficientData {
                label: s.to_string(),
                found: ids.len(),
                needed: NUM_BUCKETS,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bucket_of = vec![0; sources.len()];
    for ids in by_source.values_mut() {
        ids.shuffle(&mut rng);
        ids.sort_by(|&a, &b| token_counts[b].cmp(&token_counts[a]));
        let mut load = [(0usize, 0usize); NUM_BUCKETS];
        for &i in ids.iter() {
            let b = (0..NUM_BUCKETS).min_by_key(|&b| (load[b], b)).unwrap();
            load[b].0 += token_counts[i];
            load[b].1 += 1;
            bucket_of[i] = b;
        }
    }
    Ok(FoldPlan::from_buckets(
        bucket_of,
        sources.iter().map(|s| s.as_ref().to_string()).collect(),
        seed,
    ))
}

impl FoldPlan {
    pub fn from_buckets(bucket_of: Vec<usize>, source_of: Vec<String>, seed: u64) -> Self {
        let folds = (0..NUM_FOLDS)
            .map(|f| {
                let mut fold = Fold {
                    train: Vec::new(),
                    val: Vec::new(),
                    test: Vec::new(),
                };
                for (i, &b) in bucket_of.iter().enumerate() {
                    if b == 2 * f {
                        fold.test.push(i);
                    } else if b == 2 * f + 1 {
                        fold.val.push(i);
                    } else {
                        fold.train.push(i);
                    }
                }
                fold
            })
            .collect();
        FoldPlan {
            folds,
            source_of,
            bucket_of,
            seed,
        }
    }

    /// Sentences without an id source are grouped under the empty label.
    pub fn for_sentences(sentences: &[TaggedSentence], seed: u64) -> Result<Self, EvalError> {
        let counts: Vec<usize> = sentences.iter().map(|s| s.len()).collect();
        let sources: Vec<&str> = sentences.iter().map(|s| s.source().unwrap_or("")).collect();
        make_folds(&counts, &sources, seed)
    }

    /// Broken invariants, one message each; empty when the plan is sound.
    pub fn violations(&self, token_counts: &[usize], share_tolerance: f64, mix_tolerance: f64) -> Vec<String> {
        let mut out = Vec::new();
        let n = token_counts.len();
        if self.source_of.len() != n || self.bucket_of.len() != n {
            out.push(format!("plan covers {} sentences, corpus has {n}", self.source_of.len()));
            return out;
        }
        let total: usize = token_counts.iter().sum();
        let mut corpus_mix: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, s) in self.source_of.iter().enumerate() {
            *corpus_mix.entry(s).or_default() += token_counts[i];
        }
        let mut tested = vec![0u32; n];
        for (f, fold) in self.folds.iter().enumerate() {
            let mut seen = vec![0u32; n];
            for (name, ids, target) in [
                ("train", &fold.train, 90.0),
                ("val", &fold.val, 5.0),
                ("test", &fold.test, 5.0),
            ] {
                let tokens: usize = ids.iter().map(|&i| token_counts[i]).sum();
                let share = 100.0 * tokens as f64 / total as f64;
                if (share - target).abs() > share_tolerance {
                    out.push(format!("fold {f} {name}: token share {share:.2}"));
                }
                let mut mix: BTreeMap<&str, usize> = BTreeMap::new();
                for &i in ids {
                    seen[i] += 1;
                    *mix.entry(&self.source_of[i]).or_default() += token_counts[i];
                }
                for (src, &c) in &corpus_mix {
                    let want = 100.0 * c as f64 / total as f64;
                    let got = 100.0 * mix.get(src).copied().unwrap_or(0) as f64 / tokens.max(1) as f64;
                    if (got - want).abs() > mix_tolerance {
                        out.push(format!("fold {f} {name}: source {src:?} at {got:.2}, corpus {want:.2}"));
                    }
                }
            }
            if seen.iter().any(|&c| c != 1) {
                out.push(format!("fold {f}: sections do not partition the corpus"));
            }
            for &i in &fold.test {
                tested[i] += 1;
            }
        }
        if tested.iter().any(|&c| c > 1) {
            out.push("test sets overlap".to_string());
        }
        out
    }

    /// `index<TAB>source<TAB>bucket` per sentence after a seed line.
    pub fn to_tsv(&self) -> String {
        let mut s = format!("# seed={}\n", self.seed);
        for (i, (src, b)) in self.source_of.iter().zip(&self.bucket_of).enumerate() {
            s.push_str(&format!("{i}\t{src}\t{b}\n"));
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self, EvalError> {
        let mut seed = 0;
        let mut buckets = Vec::new();
        let mut sources = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let bad = |msg: &str| EvalError::PlanFormat {
                line: n + 1,
                msg: msg.to_string(),
            };
            if let Some(rest) = line.strip_prefix("# seed=") {
                seed = rest.trim().parse().map_err(|_| bad("bad seed"))?;
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad("expected index, source, bucket"));
            }
            if cols[0].parse::<usize>().ok() != Some(buckets.len()) {
                return Err(bad("indices must run 0, 1, 2, ..."));
            }
            let b: usize = cols[2].parse().map_err(|_| bad("bad bucket"))?;
            if b >= NUM_BUCKETS {
                return Err(bad("bucket out of range"));
            }
            sources.push(cols[1].to_string());
            buckets.push(b);
        }
        Ok(FoldPlan::from_buckets(buckets, sources, seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture(seed: u64) -> (Vec<usize>, Vec<&'static str>) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = Vec::new();
        let mut sources = Vec::new();
        for i in 0..2000 {
            counts.push(rng.gen_range(5..=25));
            sources.push(if i % 100 < 79 { "a" } else { "b" });
        }
        (counts, sources)
    }

    #[test]
    fn too_few_sentences() {
        let counts = vec![3; 9];
        let sources = vec!["a"; 9];
        assert!(matches!(
            make_folds(&counts, &sources, 1),
            Err(EvalError::InsufficientData { found: 9, .. })
        ));
    }

    #[test]
    fn deterministic_and_round_trips() {
        let (c, s) = fixture(3);
        let p = make_folds(&c, &s, 11).unwrap();
        assert_eq!(p, make_folds(&c, &s, 11).unwrap());
        assert_ne!(p.bucket_of, make_folds(&c, &s, 12).unwrap().bucket_of);
        assert_eq!(FoldPlan::from_tsv(&p.to_tsv()).unwrap(), p);
        assert!(p.violations(&c, 1.5, 2.0).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn every_sentence_tested_or_validated_once(seed in 0u64..1000, n in 40usize..120) {
            let counts: Vec<usize> = (0..n).map(|i| 1 + (i * 7) % 13).collect();
            let sources: Vec<&str> = (0..n).map(|i| if i % 2 == 0 { "x" } else { "y" }).collect();
            let p = make_folds(&counts, &sources, seed).unwrap();
            let mut held = vec![0; n];
            for f in &p.folds {
                prop_assert_eq!(f.train.len() + f.val.len() + f.test.len(), n);
                for &i in f.val.iter().chain(&f.test) {
                    held[i] += 1;
                }
            }
            prop_assert!(held.iter().all(|&h| h == 1));
        }
    }
}
