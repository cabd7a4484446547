//! Token-level Smith-Waterman alignment of converted text against a
//! script source.

use crate::edit;
use crate::script::Inventory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    pub match_score: f64,
    pub mismatch_score: f64,
    pub gap_score: f64,
    /// Token pairs at or above this similarity earn partial credit.
    pub soft_threshold: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            match_score: 2.0,
            mismatch_score: -1.0,
            gap_score: -1.0,
            soft_threshold: 0.5,
        }
    }
}

impl AlignConfig {
    pub fn substitution(&self, similarity: f64) -> f64 {
        if similarity >= 1.0 {
            self.match_score
        } else if similarity >= self.soft_threshold {
            self.mismatch_score + (self.match_score - self.mismatch_score) * similarity
        } else {
            self.mismatch_score
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub converted: Option<usize>,
    pub source: Option<usize>,
    pub similarity: f64,
    pub mismatch: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport {
    pub score: f64,
    pub pairs: Vec<AlignedPair>,
}

impl AlignmentReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &AlignedPair> {
        self.pairs.iter().filter(|p| p.mismatch)
    }

    pub fn render(&self, converted: &[String], source: &[String]) -> String {
        let mut s = format!("score\t{}\n", self.score);
        for p in &self.pairs {
            let c = p.converted.map(|i| converted[i].as_str()).unwrap_or("-");
            let t = p.source.map(|i| source[i].as_str()).unwrap_or("-");
            let flag = if p.mismatch { "MISMATCH" } else { "ok" };
            s.push_str(&format!("{c}\t{t}\t{:.3}\t{flag}\n", p.similarity));
        }
        s
    }
}

/// Edit similarity over script characters when both tokens decode,
/// over raw characters otherwise.
pub fn token_similarity(inventory: &Inventory, a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    match (inventory.clusters(a), inventory.clusters(b)) {
        (Ok(x), Ok(y)) => edit::similarity(&x, &y),
        _ => {
            let x: Vec<char> = a.chars().collect();
            let y: Vec<char> = b.chars().collect();
            edit::similarity(&x, &y)
        }
    }
}

/// The (n+1)×(m+1) local-alignment score table.
pub fn score_table<F>(n: usize, m: usize, config: &AlignConfig, sim: F) -> Vec<Vec<f64>>
where
    F: Fn(usize, usize) -> f64,
{
    let mut h = vec![vec![0.0; m + 1]; n + 1];
    for i in 1..=n {
        for j in 1..=m {
            let diag = h[i - 1][j - 1] + config.substitution(sim(i - 1, j - 1));
            let up = h[i - 1][j] + config.gap_score;
            let left = h[i][j - 1] + config.gap_score;
            h[i][j] = diag.max(up).max(left).max(0.0);
        }
    }
    h
}

pub fn align_with<F>(n: usize, m: usize, config: &AlignConfig, sim: F) -> AlignmentReport
where
    F: Fn(usize, usize) -> f64,
{
    let h = score_table(n, m, config, &sim);
    let (mut bi, mut bj, mut best) = (0, 0, 0.0);
    for (i, row) in h.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > best {
                (bi, bj, best) = (i, j, v);
            }
        }
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (bi, bj);
    while i > 0 && j > 0 && h[i][j] > 0.0 {
        let s = sim(i - 1, j - 1);
        if h[i][j] == h[i - 1][j - 1] + config.substitution(s) {
            pairs.push(AlignedPair {
                converted: Some(i - 1),
                source: Some(j - 1),
                similarity: s,
                mismatch: s < 1.0,
            });
            i -= 1;
            j -= 1;
        } else if h[i][j] == h[i - 1][j] + config.gap_score {
            pairs.push(AlignedPair {
                converted: Some(i - 1),
                source: None,
                similarity: 0.0,
                mismatch: true,
            });
            i -= 1;
        } else {
            pairs.push(AlignedPair {
                converted: None,
                source: Some(j - 1),
                similarity: 0.0,
                mismatch: true,
            });
            j -= 1;
        }
    }
    pairs.reverse();
    AlignmentReport { score: best, pairs }
}

pub fn verify_against_source(
    inventory: &Inventory,
    converted: &[String],
    source: &[String],
    config: &AlignConfig,
) -> AlignmentReport {
    align_with(converted.len(), source.len(), config, |i, j| {
        token_similarity(inventory, &converted[i], &source[j])
    })
}
