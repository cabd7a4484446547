//! Small hidden Markov models for generating tagged test corpora.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::treebank::TaggedSentence;

#[derive(Debug, Clone, PartialEq)]
pub struct Hmm {
    pub tags: Vec<String>,
    pub words: Vec<String>,
    pub initial: Vec<f64>,
    /// `transition[i][j]` = P(next = j | current = i)
    pub transition: Vec<Vec<f64>>,
    /// `emission[i][w]` = P(word = w | tag = i)
    pub emission: Vec<Vec<f64>>,
}

impl Hmm {
    /// Four tags over twelve words. Most words belong to one tag; a few
    /// are shared so the best achievable accuracy stays below 100.
    pub fn toy() -> Self {
        let tags = ["D", "N", "V", "P"].map(String::from).to_vec();
        let words = (0..12).map(|i| format!("w{i}")).collect();
        let initial = vec![0.5, 0.3, 0.1, 0.1];
        let transition = vec![
            vec![0.05, 0.85, 0.05, 0.05],
            vec![0.10, 0.10, 0.60, 0.20],
            vec![0.50, 0.20, 0.05, 0.25],
            vec![0.60, 0.25, 0.10, 0.05],
        ];
        #[rustfmt::skip]
        let emission = vec![
            vec![0.45, 0.35, 0.15, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.05],
            vec![0.0, 0.0, 0.05, 0.35, 0.30, 0.15, 0.15, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.15, 0.20, 0.35, 0.30, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.05, 0.45, 0.25, 0.25],
        ];
        Hmm {
            tags,
            words,
            initial,
            transition,
            emission,
        }
    }

    pub fn num_tags(&self) -> usize {
        self.tags.len()
    }

    /// Word and tag indices for one sentence of the given length.
    pub fn sample_ids<R: Rng>(&self, len: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
        let init = WeightedIndex::new(&self.initial).expect("initial distribution");
        let trans: Vec<_> = self
            .transition
            .iter()
            .map(|r| WeightedIndex::new(r).expect("transition row"))
            .collect();
        let emit: Vec<_> = self
            .emission
            .iter()
            .map(|r| WeightedIndex::new(r).expect("emission row"))
            .collect();
        let mut words = Vec::with_capacity(len);
        let mut tags: Vec<usize> = Vec::with_capacity(len);
        for t in 0..len {
            let s = if t == 0 {
                init.sample(rng)
            } else {
                trans[tags[t - 1]].sample(rng)
            };
            tags.push(s);
            words.push(emit[s].sample(rng));
        }
        (words, tags)
    }

    /// `n` sentences with lengths uniform in `min_len..=max_len`, ids `<source>,<k>`.
    pub fn corpus(&self, n: usize, min_len: usize, max_len: usize, source: &str, seed: u64) -> Vec<TaggedSentence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|k| {
                let len = rng.gen_range(min_len..=max_len);
                let (w, t) = self.sample_ids(len, &mut rng);
                TaggedSentence {
                    id: Some(format!("{source},{k}")),
                    words: w.into_iter().map(|i| self.words[i].clone()).collect(),
                    tags: t.into_iter().map(|i| self.tags[i].clone()).collect(),
                }
            })
            .collect()
    }

    /// Untagged sentences, e.g. for embedding training.
    pub fn text(&self, n: usize, min_len: usize, max_len: usize, seed: u64) -> Vec<Vec<String>> {
        self.corpus(n, min_len, max_len, "text", seed)
            .into_iter()
            .map(|s| s.words)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_distributions() {
        let h = Hmm::toy();
        let sums = |r: &Vec<f64>| (r.iter().sum::<f64>() - 1.0).abs() < 1e-12;
        assert!(sums(&h.initial));
        assert!(h.transition.iter().all(sums));
        assert!(h.emission.iter().all(sums));
        assert!(h.emission.iter().all(|r| r.len() == h.words.len()));
    }

    #[test]
    fn corpus_is_seeded() {
        let h = Hmm::toy();
        let a = h.corpus(20, 3, 9, "a", 4);
        assert_eq!(a, h.corpus(20, 3, 9, "a", 4));
        assert_ne!(a, h.corpus(20, 3, 9, "a", 5));
        assert!(a.iter().all(|s| (3..=9).contains(&s.len()) && s.source() == Some("a")));
    }

    #[test]
    fn emitted_words_have_support() {
        let h = Hmm::toy();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let (w, t) = h.sample_ids(8, &mut rng);
            for (w, t) in w.into_iter().zip(t) {
                assert!(h.emission[t][w] > 0.0);
            }
        }
    }
}
