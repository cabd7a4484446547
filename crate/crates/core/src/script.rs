//! Yiddish character inventory and the reversible Unicode/ASCII notation.
//!
//! All downstream processing works on a left-to-right ASCII rendering of the
//! script. The mapping is data driven: [`Inventory`] is loaded from a TSV
//! table whose ASCII codes must form a prefix-free set, which makes decoding
//! a greedy left-to-right scan.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

const BUILTIN_INVENTORY: &str = include_str!("../data/inventory.tsv");

/// Class of an inventory entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharClass {
    BaseLetter,
    FinalForm,
    DiacriticComposed,
    Punctuation,
    Digit,
    Other,
}

impl CharClass {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "base-letter" => CharClass::BaseLetter,
            "final-form" => CharClass::FinalForm,
            "diacritic-composed" => CharClass::DiacriticComposed,
            "punctuation" => CharClass::Punctuation,
            "digit" => CharClass::Digit,
            "other" => CharClass::Other,
            _ => return None,
        })
    }

    /// Yiddish letters, with or without points.
    pub fn is_letter(self) -> bool {
        matches!(
            self,
            CharClass::BaseLetter | CharClass::FinalForm | CharClass::DiacriticComposed
        )
    }
}

/// Index of an entry in an [`Inventory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharId(pub u16);

#[derive(Debug, Clone)]
pub struct CharEntry {
    pub unicode: String,
    pub ascii: String,
    pub name: String,
    pub class: CharClass,
    reductions: [CharId; 2],
}

/// Diacritic-reduction level used to derive alternate spellings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReductionLevel {
    /// pasekh tsvey yudn becomes tsvey yudn.
    One,
    /// Level one, plus pasekh alef to shtumer alef and khirek yud to yud.
    Two,
}

impl ReductionLevel {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(ReductionLevel::One),
            2 => Some(ReductionLevel::Two),
            _ => None,
        }
    }

    fn index(self) -> usize {
        match self {
            ReductionLevel::One => 0,
            ReductionLevel::Two => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum InventoryError {
    #[error("inventory line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("ascii form {prefix:?} is a prefix of {longer:?}")]
    NotPrefixFree { prefix: String, longer: String },
    #[error("duplicate {what} {value:?}")]
    Duplicate { what: &'static str, value: String },
    #[error("final forms: {0}")]
    FinalForms(String),
    #[error("reductions: {0}")]
    Reduction(String),
    #[error("reading inventory: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("unknown character {ch:?} (U+{:04X}) at byte {offset}", *ch as u32)]
    UnknownCharacter { ch: char, offset: usize },
    #[error("undecodable ascii notation at byte {offset}")]
    DecodeError { offset: usize },
}

/// One unit of decoded ASCII notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    Char { offset: usize, id: CharId },
    Space { offset: usize, ch: char },
}

/// Where a piece of corpus text came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Provenance {
    pub doc_id: String,
    pub page: u32,
    pub line: u32,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:p{}.l{}", self.doc_id, self.page, self.line)
    }
}

/// Text in the internal ASCII notation, validated against an inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptText {
    text: String,
    pub provenance: Option<Provenance>,
}

impl ScriptText {
    pub fn new(inventory: &Inventory, text: impl Into<String>) -> Result<Self, ScriptError> {
        let text = text.into();
        inventory.decode(&text)?;
        Ok(ScriptText {
            text,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Canonical composition plus the minor replacements applied to OCR output.
pub fn normalize_unicode(raw: &str) -> String {
    raw.nfc()
        .map(|c| match c {
            '\u{00A0}' => ' ',
            '\u{2014}' => '-',
            c => c,
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Inventory {
    entries: Vec<CharEntry>,
    by_unicode: HashMap<String, CharId>,
    by_ascii: HashMap<String, CharId>,
    by_name: HashMap<String, CharId>,
    final_of: HashMap<CharId, CharId>,
    counterpart_of: HashMap<CharId, CharId>,
    max_ascii_len: usize,
    max_cluster_chars: usize,
    checksum: String,
}

impl Inventory {
    /// The inventory shipped with the crate.
    pub fn builtin() -> &'static Inventory {
        static INV: OnceLock<Inventory> = OnceLock::new();
        INV.get_or_init(|| Inventory::parse(BUILTIN_INVENTORY).expect("builtin inventory is valid"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InventoryError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, InventoryError> {
        struct Raw {
            unicode: String,
            ascii: String,
            name: String,
            class: CharClass,
            red: [String; 2],
            line: usize,
        }

        let mut raws = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(InventoryError::Malformed {
                    line: lineno,
                    msg: format!("expected 6 columns, found {}", cols.len()),
                });
            }
            let mut unicode = String::new();
            for hex in cols[0].split('+') {
                let cp = u32::from_str_radix(hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| InventoryError::Malformed {
                        line: lineno,
                        msg: format!("bad codepoint {hex:?}"),
                    })?;
                unicode.push(cp);
            }
            if unicode.chars().any(char::is_whitespace) {
                return Err(InventoryError::Malformed {
                    line: lineno,
                    msg: "whitespace cannot be an inventory entry".into(),
                });
            }
            let ascii = cols[1].to_string();
            if ascii.is_empty() || !ascii.bytes().all(|b| b.is_ascii_graphic()) {
                return Err(InventoryError::Malformed {
                    line: lineno,
                    msg: format!("ascii form {ascii:?} must be printable ascii"),
                });
            }
            let class = CharClass::parse(cols[3]).ok_or_else(|| InventoryError::Malformed {
                line: lineno,
                msg: format!("unknown class {:?}", cols[3]),
            })?;
            raws.push(Raw {
                unicode,
                ascii,
                name: cols[2].to_string(),
                class,
                red: [cols[4].to_string(), cols[5].to_string()],
                line: lineno,
            });
        }

        let mut by_unicode = HashMap::new();
        let mut by_ascii = HashMap::new();
        let mut by_name = HashMap::new();
        for (i, r) in raws.iter().enumerate() {
            let id = CharId(i as u16);
            if by_unicode.insert(r.unicode.clone(), id).is_some() {
                return Err(InventoryError::Duplicate {
                    what: "unicode cluster",
                    value: r.unicode.clone(),
                });
            }
            if by_ascii.insert(r.ascii.clone(), id).is_some() {
                return Err(InventoryError::Duplicate {
                    what: "ascii form",
                    value: r.ascii.clone(),
                });
            }
            if by_name.insert(r.name.clone(), id).is_some() {
                return Err(InventoryError::Duplicate {
                    what: "letter name",
                    value: r.name.clone(),
                });
            }
        }

        let mut sorted: Vec<&str> = raws.iter().map(|r| r.ascii.as_str()).collect();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[1].starts_with(w[0]) {
                return Err(InventoryError::NotPrefixFree {
                    prefix: w[0].to_string(),
                    longer: w[1].to_string(),
                });
            }
        }

        let mut entries = Vec::with_capacity(raws.len());
        for (i, r) in raws.iter().enumerate() {
            let mut reductions = [CharId(i as u16); 2];
            for (lvl, target) in r.red.iter().enumerate() {
                if target == "-" {
                    continue;
                }
                if r.class != CharClass::DiacriticComposed {
                    return Err(InventoryError::Malformed {
                        line: r.line,
                        msg: "only diacritic-composed entries may name a reduction".into(),
                    });
                }
                reductions[lvl] = *by_name.get(target).ok_or_else(|| InventoryError::Malformed {
                    line: r.line,
                    msg: format!("unknown reduction target {target:?}"),
                })?;
            }
            entries.push(CharEntry {
                unicode: r.unicode.clone(),
                ascii: r.ascii.clone(),
                name: r.name.clone(),
                class: r.class,
                reductions,
            });
        }

        let mut final_of = HashMap::new();
        let mut counterpart_of = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.class != CharClass::FinalForm {
                continue;
            }
            let base = e.name.strip_prefix("final-").ok_or_else(|| {
                InventoryError::FinalForms(format!("{:?} must be named final-<letter>", e.name))
            })?;
            let &base_id = by_name.get(base).ok_or_else(|| {
                InventoryError::FinalForms(format!("{:?} has no counterpart {base:?}", e.name))
            })?;
            if !entries[base_id.0 as usize].class.is_letter()
                || entries[base_id.0 as usize].class == CharClass::FinalForm
            {
                return Err(InventoryError::FinalForms(format!(
                    "counterpart of {:?} must be a non-final letter",
                    e.name
                )));
            }
            final_of.insert(base_id, CharId(i as u16));
            counterpart_of.insert(CharId(i as u16), base_id);
        }
        if final_of.len() != 5 || counterpart_of.len() != 5 {
            return Err(InventoryError::FinalForms(format!(
                "expected exactly 5 final forms with distinct counterparts, found {}",
                counterpart_of.len()
            )));
        }

        for e in &entries {
            let r1 = e.reductions[0];
            let r2 = e.reductions[1];
            let l1 = |id: CharId| entries[id.0 as usize].reductions[0];
            let l2 = |id: CharId| entries[id.0 as usize].reductions[1];
            if l1(r1) != r1 || l2(r2) != r2 {
                return Err(InventoryError::Reduction(format!(
                    "reductions of {:?} are not idempotent",
                    e.name
                )));
            }
            if l2(r1) != r2 {
                return Err(InventoryError::Reduction(format!(
                    "level 2 of level 1 differs from level 2 for {:?}",
                    e.name
                )));
            }
        }

        let max_ascii_len = entries.iter().map(|e| e.ascii.len()).max().unwrap_or(1);
        let max_cluster_chars = entries
            .iter()
            .map(|e| e.unicode.chars().count())
            .max()
            .unwrap_or(1);

        Ok(Inventory {
            entries,
            by_unicode,
            by_ascii,
            by_name,
            final_of,
            counterpart_of,
            max_ascii_len,
            max_cluster_chars,
            checksum: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }

    /// SHA-256 of the inventory source text.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn entries(&self) -> &[CharEntry] {
        &self.entries
    }

    pub fn entry(&self, id: CharId) -> &CharEntry {
        &self.entries[id.0 as usize]
    }

    pub fn by_name(&self, name: &str) -> Option<CharId> {
        self.by_name.get(name).copied()
    }

    pub fn by_ascii(&self, ascii: &str) -> Option<CharId> {
        self.by_ascii.get(ascii).copied()
    }

    /// Final form of a non-final letter, if it has one.
    pub fn final_form(&self, id: CharId) -> Option<CharId> {
        self.final_of.get(&id).copied()
    }

    /// Non-final counterpart of a final form.
    pub fn counterpart(&self, id: CharId) -> Option<CharId> {
        self.counterpart_of.get(&id).copied()
    }

    pub fn reduction(&self, id: CharId, level: ReductionLevel) -> CharId {
        self.entry(id).reductions[level.index()]
    }

    pub fn is_hyphen(&self, id: CharId) -> bool {
        matches!(self.entry(id).name.as_str(), "hyphen" | "maqaf")
    }

    pub fn unicode_to_ascii(&self, text: &str) -> Result<String, ScriptError> {
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        let mut offset = 0;
        while let Some(c) = rest.chars().next() {
            if c.is_whitespace() {
                out.push(c);
                offset += c.len_utf8();
                rest = &rest[c.len_utf8()..];
                continue;
            }
            let ends: Vec<usize> = rest
                .char_indices()
                .skip(1)
                .map(|(i, _)| i)
                .chain(std::iter::once(rest.len()))
                .take(self.max_cluster_chars)
                .collect();
            let hit = ends
                .iter()
                .rev()
                .find_map(|&end| self.by_unicode.get(&rest[..end]).map(|id| (end, *id)));
            match hit {
                Some((end, id)) => {
                    out.push_str(&self.entry(id).ascii);
                    offset += end;
                    rest = &rest[end..];
                }
                None => return Err(ScriptError::UnknownCharacter { ch: c, offset }),
            }
        }
        Ok(out)
    }

    pub fn ascii_to_unicode(&self, text: &str) -> Result<String, ScriptError> {
        let mut out = String::with_capacity(text.len() * 2);
        for piece in self.decode(text)? {
            match piece {
                Piece::Char { id, .. } => out.push_str(&self.entry(id).unicode),
                Piece::Space { ch, .. } => out.push(ch),
            }
        }
        Ok(out)
    }

    /// Splits ASCII notation into inventory entries and whitespace.
    pub fn decode(&self, text: &str) -> Result<Vec<Piece>, ScriptError> {
        let mut pieces = Vec::with_capacity(text.len());
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let Some(c) = text[i..].chars().next() else {
                break;
            };
            if c.is_whitespace() {
                pieces.push(Piece::Space { offset: i, ch: c });
                i += c.len_utf8();
                continue;
            }
            if !c.is_ascii() {
                return Err(ScriptError::DecodeError { offset: i });
            }
            let max = self.max_ascii_len.min(bytes.len() - i);
            let hit = (1..=max).find_map(|len| {
                text.get(i..i + len)
                    .and_then(|s| self.by_ascii.get(s))
                    .map(|id| (len, *id))
            });
            match hit {
                Some((len, id)) => {
                    pieces.push(Piece::Char { offset: i, id });
                    i += len;
                }
                None => return Err(ScriptError::DecodeError { offset: i }),
            }
        }
        Ok(pieces)
    }

    /// Entry ids of a whitespace-free token.
    pub fn clusters(&self, token: &str) -> Result<Vec<CharId>, ScriptError> {
        self.decode(token)?
            .into_iter()
            .map(|p| match p {
                Piece::Char { id, .. } => Ok(id),
                Piece::Space { offset, .. } => Err(ScriptError::DecodeError { offset }),
            })
            .collect()
    }

    pub fn encode_ids(&self, ids: &[CharId]) -> String {
        ids.iter().map(|&id| self.entry(id).ascii.as_str()).collect()
    }

    pub fn reduce_diacritics(&self, text: &str, level: ReductionLevel) -> Result<String, ScriptError> {
        let mut out = String::with_capacity(text.len());
        for piece in self.decode(text)? {
            match piece {
                Piece::Char { id, .. } => out.push_str(&self.entry(self.reduction(id, level)).ascii),
                Piece::Space { ch, .. } => out.push(ch),
            }
        }
        Ok(out)
    }

    /// Byte offsets and names of final-form letters that are neither
    /// word-final nor directly followed by a hyphen.
    pub fn find_medial_final_forms(&self, token: &str) -> Result<Vec<(usize, &str)>, ScriptError> {
        let pieces = self.decode(token)?;
        let mut found = Vec::new();
        for (i, piece) in pieces.iter().enumerate() {
            let Piece::Char { offset, id } = *piece else {
                continue;
            };
            if self.entry(id).class != CharClass::FinalForm {
                continue;
            }
            match pieces.get(i + 1) {
                None => {}
                Some(Piece::Char { id: next, .. }) if self.is_hyphen(*next) => {}
                Some(_) => found.push((offset, self.entry(id).name.as_str())),
            }
        }
        Ok(found)
    }

    /// Replaces letters by their final form at word ends and before hyphens,
    /// and final forms by their counterpart everywhere else.
    pub fn apply_final_forms(&self, ids: &mut [CharId]) {
        for i in 0..ids.len() {
            let boundary = match ids.get(i + 1) {
                None => true,
                Some(&next) => self.is_hyphen(next),
            };
            let id = ids[i];
            if boundary {
                if let Some(f) = self.final_form(id) {
                    ids[i] = f;
                }
            } else if let Some(c) = self.counterpart(id) {
                ids[i] = c;
            }
        }
    }

    /// Letter-ish characters seen in Yiddish text, for property tests and
    /// fixture generation.
    pub fn letter_ids(&self) -> Vec<CharId> {
        (0..self.entries.len() as u16)
            .map(CharId)
            .filter(|&id| self.entry(id).class.is_letter())
            .collect()
    }

    pub fn ids(&self) -> impl Iterator<Item = CharId> + '_ {
        (0..self.entries.len() as u16).map(CharId)
    }

    /// Ascii forms of every entry, for quick membership checks.
    pub fn ascii_forms(&self) -> HashSet<&str> {
        self.entries.iter().map(|e| e.ascii.as_str()).collect()
    }
}
