use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{CrfError, CrfModel, ModelSpec, SourceKind};

const MAGIC: &[u8; 8] = b"YTAGCRF\0";
const VERSION: u32 = 1;

impl CrfModel {
    /// Writes the magic, a version, a key=value text header and the
    /// parameters as little-endian f64.
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<(), CrfError> {
        let s = self.spec();
        let mut header = String::new();
        let mut kv = |k: &str, v: &str| {
            header.push_str(k);
            header.push('=');
            header.push_str(v);
            header.push('\n');
        };
        kv("tags", &s.tags.join(" "));
        kv("input_dim", &s.input_dim.to_string());
        kv("hidden", &s.hidden.map(|h| h.to_string()).unwrap_or_else(|| "none".into()));
        kv("source", s.source.as_str());
        kv("descriptor", &s.descriptor.replace('\n', " "));
        kv("inventory_checksum", &s.inventory_checksum);
        kv("vocab", &s.vocab.join(" "));
        kv(
            "transitions",
            "rows are source states and columns targets; tags 0..K-1, start state K, stop state K+1; entries into the start state and out of the stop state are fixed at 0",
        );
        kv(
            "layout",
            "emission weights K x F, emission bias K, transitions (K+2)^2, then bilstm and lookup rows when present",
        );
        kv("params", &self.num_params().to_string());
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(header.len() as u32).to_le_bytes())?;
        out.write_all(header.as_bytes())?;
        for p in self.params() {
            out.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(input: &mut R) -> Result<Self, CrfError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(CrfError::Format("not a tagger model file".into()));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != VERSION {
            return Err(CrfError::Format(format!("unsupported model version {version}")));
        }
        input.read_exact(&mut word)?;
        let mut header = vec![0u8; u32::from_le_bytes(word) as usize];
        input.read_exact(&mut header)?;
        let header = String::from_utf8(header).map_err(|_| CrfError::Format("header is not utf-8".into()))?;
        let map: BTreeMap<&str, &str> = header.lines().filter_map(|l| l.split_once('=')).collect();
        let get = |k: &str| map.get(k).copied().ok_or_else(|| CrfError::Format(format!("missing header key {k}")));
        let words = |v: &str| -> Vec<String> { v.split(' ').filter(|s| !s.is_empty()).map(String::from).collect() };
        let num = |k: &str| -> Result<usize, CrfError> {
            get(k)?.parse().map_err(|_| CrfError::Format(format!("bad value for {k}")))
        };
        let spec = ModelSpec {
            tags: words(get("tags")?),
            input_dim: num("input_dim")?,
            hidden: match get("hidden")? {
                "none" => None,
                _ => Some(num("hidden")?),
            },
            source: SourceKind::parse(get("source")?).ok_or_else(|| CrfError::Format("unknown source".into()))?,
            descriptor: get("descriptor")?.to_string(),
            vocab: words(get("vocab")?),
            inventory_checksum: get("inventory_checksum")?.to_string(),
        };
        let n = num("params")?;
        let mut bytes = vec![0u8; n * 8];
        input.read_exact(&mut bytes)?;
        let params = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        CrfModel::from_parts(spec, params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CrfError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CrfError> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenVectorSentence {
    pub tokens: Vec<String>,
    /// T×D row-major.
    pub data: Vec<f64>,
}

/// Externally computed vectors, one block per sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenVectors {
    dim: usize,
    sentences: Vec<TokenVectorSentence>,
}

impl TokenVectors {
    pub fn new(dim: usize, sentences: Vec<TokenVectorSentence>) -> Self {
        assert!(sentences.iter().all(|s| s.data.len() == s.tokens.len() * dim));
        TokenVectors { dim, sentences }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentence(&self, i: usize) -> Option<&TokenVectorSentence> {
        self.sentences.get(i)
    }

    /// `token<TAB>v1 v2 …` per line, blank line between sentences.
    pub fn parse(text: &str) -> Result<Self, CrfError> {
        let mut dim = None;
        let mut sentences = Vec::new();
        let mut cur = TokenVectorSentence {
            tokens: Vec::new(),
            data: Vec::new(),
        };
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                if !cur.tokens.is_empty() {
                    sentences.push(std::mem::replace(
                        &mut cur,
                        TokenVectorSentence {
                            tokens: Vec::new(),
                            data: Vec::new(),
                        },
                    ));
                }
                continue;
            }
            let bad = |m: &str| CrfError::Format(format!("token vector line {}: {m}", n + 1));
            let (tok, rest) = line.split_once('\t').ok_or_else(|| bad("expected token<TAB>values"))?;
            let before = cur.data.len();
            for v in rest.split_whitespace() {
                cur.data.push(v.parse().map_err(|_| bad("bad number"))?);
            }
            let d = cur.data.len() - before;
            if d == 0 || *dim.get_or_insert(d) != d {
                return Err(bad("inconsistent vector dimension"));
            }
            cur.tokens.push(tok.to_string());
        }
        if !cur.tokens.is_empty() {
            sentences.push(cur);
        }
        Ok(TokenVectors {
            dim: dim.unwrap_or(0),
            sentences,
        })
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for s in &self.sentences {
            for (t, tok) in s.tokens.iter().enumerate() {
                let row: Vec<String> = s.data[t * self.dim..(t + 1) * self.dim].iter().map(|x| format!("{x:e}")).collect();
                writeln!(out, "{tok}\t{}", row.join(" "))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
