use std::collections::HashMap;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::lattice::{Lattice, Transitions};
use super::lstm::{BiLstmCache, BiLstmShape};
use super::{CrfError, TokenVectors};
use crate::embeddings::EmbeddingTable;
use crate::script::Inventory;
use crate::treebank::{TaggedSentence, TaggedToken};

pub const UNKNOWN_TOKEN: &str = "<unk>";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    StaticTable,
    PerTokenFile,
    TrainableLookup,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::StaticTable => "static-table",
            SourceKind::PerTokenFile => "per-token-file",
            SourceKind::TrainableLookup => "trainable-lookup",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "static-table" => Some(SourceKind::StaticTable),
            "per-token-file" => Some(SourceKind::PerTokenFile),
            "trainable-lookup" => Some(SourceKind::TrainableLookup),
            _ => None,
        }
    }
}

/// Where token vectors come from at training and tagging time.
#[derive(Debug, Clone, Copy)]
pub enum EmbeddingProvider<'a> {
    Static(&'a EmbeddingTable),
    PerToken(&'a TokenVectors),
    Lookup,
}

impl EmbeddingProvider<'_> {
    pub fn kind(&self) -> SourceKind {
        match self {
            EmbeddingProvider::Static(_) => SourceKind::StaticTable,
            EmbeddingProvider::PerToken(_) => SourceKind::PerTokenFile,
            EmbeddingProvider::Lookup => SourceKind::TrainableLookup,
        }
    }
}

/// Model input for one sentence.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    /// T×D vectors.
    Dense { len: usize, data: Vec<f64> },
    /// Rows of the trainable lookup table.
    Ids(Vec<usize>),
}

impl Input {
    pub fn len(&self) -> usize {
        match self {
            Input::Dense { len, .. } => *len,
            Input::Ids(ids) => ids.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub tags: Vec<String>,
    pub input_dim: usize,
    /// Hidden size per direction of an optional BiLSTM encoder.
    pub hidden: Option<usize>,
    pub source: SourceKind,
    /// Free-form note on the vectors the model was trained with.
    pub descriptor: String,
    /// Lookup vocabulary, without the unknown-token row.
    pub vocab: Vec<String>,
    pub inventory_checksum: String,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layout {
    pub emission_w: Range<usize>,
    pub emission_b: Range<usize>,
    pub transitions: Range<usize>,
    pub lstm: Option<Range<usize>>,
    pub lookup: Option<Range<usize>>,
    pub total: usize,
}

impl Layout {
    fn new(spec: &ModelSpec) -> Self {
        let k = spec.tags.len();
        let feat = spec.hidden.map(|h| 2 * h).unwrap_or(spec.input_dim);
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        let emission_w = take(k * feat);
        let emission_b = take(k);
        let transitions = take((k + 2) * (k + 2));
        let lstm = spec.hidden.map(|h| {
            take(
                BiLstmShape {
                    input: spec.input_dim,
                    hidden: h,
                }
                .num_params(),
            )
        });
        let lookup = (spec.source == SourceKind::TrainableLookup).then(|| take((spec.vocab.len() + 1) * spec.input_dim));
        Layout {
            emission_w,
            emission_b,
            transitions,
            lstm,
            lookup,
            total: at,
        }
    }
}

/// A linear emission layer (optionally over a BiLSTM) feeding a
/// linear-chain CRF. All parameters live in one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    spec: ModelSpec,
    tag_index: HashMap<String, usize>,
    vocab_index: HashMap<String, usize>,
    pub(crate) layout: Layout,
    pub(crate) params: Vec<f64>,
}

struct Forward {
    x: Vec<f64>,
    feats: Option<(Vec<f64>, BiLstmCache)>,
    lattice: Lattice,
}

impl CrfModel {
    /// Emission weights uniform in ±1/√dim, zero biases and transitions.
    pub fn init(spec: ModelSpec, seed: u64) -> Result<Self, CrfError> {
        if spec.tags.is_empty() {
            return Err(CrfError::Format("model needs at least one tag".into()));
        }
        if spec.input_dim == 0 {
            return Err(CrfError::Format("input dimension must be positive".into()));
        }
        let layout = Layout::new(&spec);
        let mut params = vec![0.0; layout.total];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feat = spec.hidden.map(|h| 2 * h).unwrap_or(spec.input_dim);
        let bound = 1.0 / (feat as f64).sqrt();
        for p in &mut params[layout.emission_w.clone()] {
            *p = rng.gen_range(-bound..=bound);
        }
        if let (Some(r), Some(h)) = (layout.lstm.clone(), spec.hidden) {
            let bound = 1.0 / (h as f64).sqrt();
            for p in &mut params[r] {
                *p = rng.gen_range(-bound..=bound);
            }
        }
        if let Some(r) = layout.lookup.clone() {
            for p in &mut params[r] {
                *p = rng.gen_range(-1.0..=1.0);
            }
        }
        Self::from_parts(spec, params)
    }

    pub(crate) fn from_parts(spec: ModelSpec, params: Vec<f64>) -> Result<Self, CrfError> {
        let layout = Layout::new(&spec);
        if params.len() != layout.total {
            return Err(CrfError::Format(format!(
                "expected {} parameters, found {}",
                layout.total,
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(CrfError::Format("non-finite parameter".into()));
        }
        let mut tag_index = HashMap::new();
        for (i, t) in spec.tags.iter().enumerate() {
            if tag_index.insert(t.clone(), i).is_some() {
                return Err(CrfError::Format(format!("duplicate tag {t:?}")));
            }
        }
        let vocab_index = spec
            .vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i + 1))
            .collect();
        Ok(CrfModel {
            spec,
            tag_index,
            vocab_index,
            layout,
            params,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn tags(&self) -> &[String] {
        &self.spec.tags
    }

    pub fn num_tags(&self) -> usize {
        self.spec.tags.len()
    }

    pub fn tag_id(&self, tag: &str) -> Option<usize> {
        self.tag_index.get(tag).copied()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn transitions(&self) -> Transitions {
        Transitions::from_slice(self.num_tags(), &self.params[self.layout.transitions.clone()])
    }

    /// Copies vectors for known tokens from a table into the lookup rows.
    pub fn init_lookup_from(&mut self, table: &EmbeddingTable) -> Result<usize, CrfError> {
        let Some(r) = self.layout.lookup.clone() else {
            return Err(CrfError::SourceMismatch {
                model: self.spec.source,
                provider: SourceKind::StaticTable,
            });
        };
        let d = self.spec.input_dim;
        if table.dim() != d {
            return Err(CrfError::DimMismatch {
                expected: d,
                found: table.dim(),
            });
        }
        let mut copied = 0;
        let rows = &mut self.params[r];
        rows[..d].copy_from_slice(table.lookup(UNKNOWN_TOKEN));
        for (tok, &row) in &self.vocab_index {
            if let Some(v) = table.get(tok) {
                rows[row * d..(row + 1) * d].copy_from_slice(v);
                copied += 1;
            }
        }
        Ok(copied)
    }

    fn lstm_shape(&self) -> Option<BiLstmShape> {
        self.spec.hidden.map(|h| BiLstmShape {
            input: self.spec.input_dim,
            hidden: h,
        })
    }

    /// Builds the model input for one sentence.
    pub fn input_for(&self, words: &[String], provider: &EmbeddingProvider, sentence: usize) -> Result<Input, CrfError> {
        if provider.kind() != self.spec.source {
            return Err(CrfError::SourceMismatch {
                model: self.spec.source,
                provider: provider.kind(),
            });
        }
        let d = self.spec.input_dim;
        match provider {
            EmbeddingProvider::Static(table) => {
                if table.dim() != d {
                    return Err(CrfError::DimMismatch {
                        expected: d,
                        found: table.dim(),
                    });
                }
                let data = words.iter().flat_map(|w| table.lookup(w).iter().copied()).collect();
                Ok(Input::Dense { len: words.len(), data })
            }
            EmbeddingProvider::PerToken(vectors) => {
                let s = vectors.sentence(sentence).ok_or(CrfError::TokenVectorMisalignment(sentence))?;
                if s.tokens.len() != words.len() || s.tokens.iter().zip(words).any(|(a, b)| a != b) {
                    return Err(CrfError::TokenVectorMisalignment(sentence));
                }
                if vectors.dim() != d {
                    return Err(CrfError::DimMismatch {
                        expected: d,
                        found: vectors.dim(),
                    });
                }
                Ok(Input::Dense {
                    len: words.len(),
                    data: s.data.clone(),
                })
            }
            EmbeddingProvider::Lookup => Ok(Input::Ids(
                words.iter().map(|w| self.vocab_index.get(w).copied().unwrap_or(0)).collect(),
            )),
        }
    }

    fn gather(&self, input: &Input) -> (usize, Vec<f64>) {
        match input {
            Input::Dense { len, data } => (*len, data.clone()),
            Input::Ids(ids) => {
                let d = self.spec.input_dim;
                let table = &self.params[self.layout.lookup.clone().expect("lookup input needs a lookup table")];
                (ids.len(), ids.iter().flat_map(|&i| table[i * d..(i + 1) * d].iter().copied()).collect())
            }
        }
    }

    fn forward(&self, input: &Input) -> Forward {
        let (len, x) = self.gather(input);
        let k = self.num_tags();
        let feats = self.lstm_shape().map(|shape| {
            let p = &self.params[self.layout.lstm.clone().unwrap()];
            shape.forward(p, &x, len)
        });
        let (h, fd) = match &feats {
            Some((h, _)) => (h.as_slice(), 2 * self.spec.hidden.unwrap()),
            None => (x.as_slice(), self.spec.input_dim),
        };
        let w = &self.params[self.layout.emission_w.clone()];
        let b = &self.params[self.layout.emission_b.clone()];
        let mut scores = vec![0.0; len * k];
        for t in 0..len {
            let ht = &h[t * fd..(t + 1) * fd];
            for j in 0..k {
                scores[t * k + j] = b[j] + w[j * fd..(j + 1) * fd].iter().zip(ht).map(|(a, c)| a * c).sum::<f64>();
            }
        }
        Forward {
            x,
            feats,
            lattice: Lattice::new(len, k, scores),
        }
    }

    pub fn lattice(&self, input: &Input) -> Lattice {
        self.forward(input).lattice
    }

    pub fn predict(&self, input: &Input) -> Vec<usize> {
        if input.is_empty() {
            return Vec::new();
        }
        let lat = self.lattice(input);
        self.transitions().viterbi(&lat).0
    }

    /// Sentence NLL; adds its gradient into `grad`.
    pub fn loss_and_gradient(&self, input: &Input, gold: &[usize], grad: &mut [f64]) -> f64 {
        let fw = self.forward(input);
        let k = self.num_tags();
        let len = fw.lattice.len;
        let tr = self.transitions();
        let (loss, d_em, d_tr) = tr.nll_and_gradient(&fw.lattice, gold);
        for (g, d) in grad[self.layout.transitions.clone()].iter_mut().zip(&d_tr) {
            *g += d;
        }
        let (h, fd) = match &fw.feats {
            Some((h, _)) => (h.as_slice(), 2 * self.spec.hidden.unwrap()),
            None => (fw.x.as_slice(), self.spec.input_dim),
        };
        let w = &self.params[self.layout.emission_w.clone()];
        let needs_dh = fw.feats.is_some() || self.layout.lookup.is_some();
        let mut dh = if needs_dh { vec![0.0; len * fd] } else { Vec::new() };
        {
            let (gw, gb) = {
                let (a, b) = grad.split_at_mut(self.layout.emission_b.start);
                (&mut a[self.layout.emission_w.clone()], &mut b[..k])
            };
            for t in 0..len {
                let ht = &h[t * fd..(t + 1) * fd];
                for j in 0..k {
                    let e = d_em[t * k + j];
                    if e == 0.0 {
                        continue;
                    }
                    gb[j] += e;
                    let row = &mut gw[j * fd..(j + 1) * fd];
                    for (r, x) in row.iter_mut().zip(ht) {
                        *r += e * x;
                    }
                    if needs_dh {
                        let wr = &w[j * fd..(j + 1) * fd];
                        for (dv, wv) in dh[t * fd..(t + 1) * fd].iter_mut().zip(wr) {
                            *dv += e * wv;
                        }
                    }
                }
            }
        }
        let dx = match (&fw.feats, self.lstm_shape()) {
            (Some((_, cache)), Some(shape)) => {
                let r = self.layout.lstm.clone().unwrap();
                let p = &self.params[r.clone()];
                shape.backward(p, cache, &fw.x, &dh, &mut grad[r])
            }
            _ => dh,
        };
        if let (Input::Ids(ids), Some(r)) = (input, self.layout.lookup.clone()) {
            let d = self.spec.input_dim;
            let g = &mut grad[r];
            for (t, &id) in ids.iter().enumerate() {
                for c in 0..d {
                    g[id * d + c] += dx[t * d + c];
                }
            }
        }
        loss
    }

    /// Gold tag ids for a sentence, reporting unknown tags with their location.
    pub fn gold_ids(&self, tags: &[String], sentence: usize) -> Result<Vec<usize>, CrfError> {
        tags.iter()
            .enumerate()
            .map(|(pos, t)| {
                self.tag_id(t).ok_or_else(|| CrfError::UnknownTag {
                    tag: t.clone(),
                    sentence,
                    position: pos,
                })
            })
            .collect()
    }

    pub fn check_inventory(&self, inventory: &Inventory) -> Result<(), CrfError> {
        if self.spec.inventory_checksum != inventory.checksum() {
            return Err(CrfError::ChecksumMismatch {
                model: self.spec.inventory_checksum.clone(),
                inventory: inventory.checksum().to_string(),
            });
        }
        Ok(())
    }

    /// Tags whitespace-tokenized sentences with Viterbi decoding.
    pub fn tag(
        &self,
        sentences: &[Vec<String>],
        provider: &EmbeddingProvider,
        inventory: &Inventory,
    ) -> Result<Vec<Vec<TaggedToken>>, CrfError> {
        self.check_inventory(inventory)?;
        sentences
            .par_iter()
            .enumerate()
            .map(|(i, words)| {
                let input = self.input_for(words, provider, i)?;
                let path = self.predict(&input);
                Ok(words
                    .iter()
                    .zip(path)
                    .map(|(w, y)| TaggedToken::new(w.clone(), self.spec.tags[y].clone()))
                    .collect())
            })
            .collect()
    }

    /// Inputs and gold ids for a tagged corpus.
    pub fn examples(
        &self,
        sentences: &[TaggedSentence],
        provider: &EmbeddingProvider,
    ) -> Result<Vec<super::Example>, CrfError> {
        sentences
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(super::Example {
                    input: self.input_for(&s.words, provider, i)?,
                    gold: self.gold_ids(&s.tags, i)?,
                })
            })
            .collect()
    }
}
