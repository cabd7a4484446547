//! Non-contextual word embeddings: co-occurrence counting, GloVe-style
//! training, vector tables and similarity analysis.

mod cooccur;
mod glove;
mod variants;

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

pub use cooccur::{count_cooccurrences, CooccurrenceCounts};
pub use glove::{glove_weight, train_embeddings, GloveConfig, TrainedEmbeddings};
pub use variants::{variant_candidates, ConfusionTable, VariantCandidate, VariantClass};

use crate::textpipe::FrequencyTable;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("vectors have dimensions {0} and {1}")]
    DimMismatch(usize, usize),
    #[error("zero vector")]
    ZeroVector,
    #[error("{0:?} is not in the vocabulary")]
    OutOfVocabulary(String),
    #[error("duplicate vocabulary entry {0:?}")]
    DuplicateToken(String),
    #[error("non-finite value in vector for {0:?}")]
    NonFinite(String),
    #[error("dimension must be positive")]
    InvalidDim,
    #[error("no co-occurrence pairs to train on")]
    EmptyCounts,
    #[error("all co-occurrence counts are equal; the objective has no signal")]
    DegenerateCounts,
    #[error("vector file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    #[default]
    Mean,
    Zero,
}

/// A vocabulary with one dense vector per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
    mean: Vec<f64>,
    zeros: Vec<f64>,
    pub oov_policy: OovPolicy,
}

impl EmbeddingTable {
    pub fn new(vocab: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::InvalidDim);
        }
        assert_eq!(vocab.len() * dim, data.len(), "vector data does not match vocabulary");
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, t) in vocab.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(EmbeddingError::DuplicateToken(t.clone()));
            }
            if data[i * dim..(i + 1) * dim].iter().any(|x| !x.is_finite()) {
                return Err(EmbeddingError::NonFinite(t.clone()));
            }
        }
        let mut mean = vec![0.0; dim];
        for row in data.chunks(dim) {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        if !vocab.is_empty() {
            mean.iter_mut().for_each(|m| *m /= vocab.len() as f64);
        }
        Ok(EmbeddingTable {
            vocab,
            index,
            dim,
            data,
            mean,
            zeros: vec![0.0; dim],
            oov_policy: OovPolicy::Mean,
        })
    }

    /// Shifts each dimension to zero mean and scales it to unit variance.
    /// Constant dimensions are only shifted.
    pub fn standardized(&self) -> EmbeddingTable {
        let n = self.vocab.len().max(1) as f64;
        let mut var = vec![0.0; self.dim];
        for row in self.data.chunks(self.dim) {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&self.mean) {
                *v += (x - m) * (x - m) / n;
            }
        }
        let data = self
            .data
            .chunks(self.dim)
            .flat_map(|row| {
                row.iter()
                    .zip(&self.mean)
                    .zip(&var)
                    .map(|((x, m), v)| if *v > 0.0 { (x - m) / v.sqrt() } else { x - m })
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut out = EmbeddingTable::new(self.vocab.clone(), self.dim, data).expect("rows stay finite");
        out.oov_policy = self.oov_policy;
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index_of(token).map(|i| self.row(i))
    }

    /// The vector for `token`, falling back to the OOV policy.
    pub fn lookup(&self, token: &str) -> &[f64] {
        match self.get(token) {
            Some(v) => v,
            None => match self.oov_policy {
                OovPolicy::Mean => &self.mean,
                OovPolicy::Zero => &self.zeros,
            },
        }
    }

    pub fn write_text<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.vocab.len(), self.dim)?;
        for (i, t) in self.vocab.iter().enumerate() {
            write!(out, "{t}")?;
            for x in self.row(i) {
                write!(out, " {x:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self, EmbeddingError> {
        let mut lines = input.lines();
        let header = lines.next().ok_or(EmbeddingError::Parse {
            line: 1,
            msg: "missing header".into(),
        })??;
        let bad = |line: usize, msg: &str| EmbeddingError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut h = header.split_whitespace();
        let n: usize = h.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(1, "bad vocabulary size"))?;
        let dim: usize = h.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(1, "bad dimension"))?;
        let mut vocab = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * dim);
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let tok = parts.next().unwrap_or_default();
            let before = data.len();
            for p in parts.filter(|p| !p.is_empty()) {
                data.push(p.parse::<f64>().map_err(|_| bad(k + 2, "bad number"))?);
            }
            if data.len() - before != dim {
                return Err(bad(k + 2, &format!("expected {dim} values")));
            }
            vocab.push(tok.to_string());
        }
        if vocab.len() != n {
            return Err(bad(1, &format!("header says {n} vectors, found {}", vocab.len())));
        }
        Self::new(vocab, dim, data)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), EmbeddingError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_text(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, EmbeddingError> {
        let f = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(f))
    }
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimMismatch(u.len(), v.len()));
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub token: String,
    pub cosine: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborReport {
    pub query: String,
    pub query_count: u64,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborReport {
    pub fn render(&self) -> String {
        let mut s = format!("{}\t-\t{}\n", self.query, self.query_count);
        for n in &self.neighbors {
            s.push_str(&format!("{}\t{:.2}\t{}\n", n.token, n.cosine, n.count));
        }
        s
    }
}

/// Exhaustive top-`k` neighbors; ties keep vocabulary order.
pub fn nearest_neighbors(
    table: &EmbeddingTable,
    query: &str,
    k: usize,
    freq: &FrequencyTable,
) -> Result<NeighborReport, EmbeddingError> {
    let qi = table
        .index_of(query)
        .ok_or_else(|| EmbeddingError::OutOfVocabulary(query.to_string()))?;
    let q = table.row(qi);
    let mut scored: Vec<(usize, f64)> = (0..table.len())
        .into_par_iter()
        .filter(|&i| i != qi)
        .filter_map(|i| cosine(q, table.row(i)).ok().map(|c| (i, c)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(NeighborReport {
        query: query.to_string(),
        query_count: freq.get(query),
        neighbors: scored
            .into_iter()
            .map(|(i, c)| Neighbor {
                token: table.vocab[i].clone(),
                cosine: c,
                count: freq.get(&table.vocab[i]),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(rows: &[(&str, &[f64])]) -> EmbeddingTable {
        let dim = rows[0].1.len();
        EmbeddingTable::new(
            rows.iter().map(|(t, _)| t.to_string()).collect(),
            dim,
            rows.iter().flat_map(|(_, v)| v.iter().copied()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn standardized_columns() {
        let t = table(&[("a", &[1.0, 5.0]), ("b", &[3.0, 5.0]), ("c", &[5.0, 5.0])]);
        let s = t.standardized();
        let col = |c: usize| (0..3).map(|i| s.row(i)[c]).collect::<Vec<_>>();
        let a = col(0);
        assert!(a.iter().sum::<f64>().abs() < 1e-12);
        assert!((a.iter().map(|x| x * x).sum::<f64>() / 3.0 - 1.0).abs() < 1e-12);
        assert_eq!(col(1), vec![0.0; 3]);
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(EmbeddingError::ZeroVector)));
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(EmbeddingError::DimMismatch(1, 2))));
    }

    proptest! {
        #[test]
        fn cosine_laws(u in prop::collection::vec(-10.0f64..10.0, 4), v in prop::collection::vec(-10.0f64..10.0, 4), a in 0.01f64..100.0) {
            prop_assume!(u.iter().any(|x| x.abs() > 1e-3) && v.iter().any(|x| x.abs() > 1e-3));
            let c = cosine(&u, &v).unwrap();
            prop_assert!((-1.0..=1.0).contains(&c));
            prop_assert_eq!(c, cosine(&v, &u).unwrap());
            let au: Vec<f64> = u.iter().map(|x| a * x).collect();
            prop_assert!((cosine(&au, &v).unwrap() - c).abs() < 1e-12);
            prop_assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn neighbors_basic() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.9, 0.1]), ("c", &[0.0, 1.0])]);
        let mut f = FrequencyTable::new();
        f.add("b", 7);
        let r = nearest_neighbors(&t, "a", 5, &f).unwrap();
        assert_eq!(r.neighbors.len(), 2);
        assert_eq!(r.neighbors[0].token, "b");
        assert_eq!(r.neighbors[0].count, 7);
        assert!(nearest_neighbors(&t, "a", 0, &f).unwrap().neighbors.is_empty());
        assert!(matches!(
            nearest_neighbors(&t, "z", 1, &f),
            Err(EmbeddingError::OutOfVocabulary(_))
        ));
        let two = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        assert_eq!(nearest_neighbors(&two, "a", 3, &f).unwrap().neighbors.len(), 1);
    }

    #[test]
    fn text_round_trip_and_oov() {
        let mut t = table(&[("a", &[1.0, 2.0]), ("b", &[3.0, -4.5e-7])]);
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let back = EmbeddingTable::read_text(&buf[..]).unwrap();
        assert_eq!(back, t);
        assert_eq!(t.lookup("zzz"), &[2.0, (2.0 - 4.5e-7) / 2.0]);
        t.oov_policy = OovPolicy::Zero;
        assert_eq!(t.lookup("zzz"), &[0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(
            EmbeddingTable::new(vec!["a".into(), "a".into()], 1, vec![1.0, 2.0]),
            Err(EmbeddingError::DuplicateToken(_))
        ));
        assert!(matches!(
            EmbeddingTable::new(vec!["a".into()], 1, vec![f64::NAN]),
            Err(EmbeddingError::NonFinite(_))
        ));
        assert!(EmbeddingTable::read_text(&b"2 2\na 1 2\n"[..]).is_err());
    }
}
