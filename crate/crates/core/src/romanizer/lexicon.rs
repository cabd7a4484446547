use std::collections::HashMap;

use super::{parse_script_codes, DataError};
use crate::script::{CharId, Inventory};

const BUILTIN_LEXICON: &str = include_str!("../../data/lexicon.tsv");
const BUILTIN_OVERRIDES: &str = include_str!("../../data/overrides.tsv");
const BUILTIN_RESPELL: &str = include_str!("../../data/respell.tsv");
const BUILTIN_HARDCODED: &str = include_str!("../../data/hardcoded.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyphenStrategy {
    SplitComponents,
    StripHyphen,
    WholeWord,
}

impl HyphenStrategy {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "split-components" => Some(HyphenStrategy::SplitComponents),
            "strip-hyphen" => Some(HyphenStrategy::StripHyphen),
            "whole-word" => Some(HyphenStrategy::WholeWord),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub script: Option<Vec<CharId>>,
    pub strategy: HyphenStrategy,
}

/// Spellings of words whose script form does not follow the phonetic rules.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, LexiconEntry>,
}

fn data_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(n, l)| (n + 1, l.split('\t').collect()))
}

/// Lexicon spellings are written out in full, so they must already obey
/// the final-form law.
fn check_final_forms(ids: &[CharId], inv: &Inventory) -> Result<(), String> {
    let mut fixed = ids.to_vec();
    inv.apply_final_forms(&mut fixed);
    if fixed == ids {
        Ok(())
    } else {
        Err(format!("final forms misplaced, expected {}", inv.encode_ids(&fixed)))
    }
}

impl Lexicon {
    pub fn builtin(inventory: &Inventory) -> Self {
        Self::parse(BUILTIN_LEXICON, inventory).expect("builtin lexicon is valid")
    }

    pub fn parse(text: &str, inventory: &Inventory) -> Result<Self, DataError> {
        let file = "lexicon";
        let mut entries = HashMap::new();
        for (line, cols) in data_rows(text) {
            if cols.len() != 3 {
                return Err(DataError::malformed(file, line, "expected 3 columns"));
            }
            let strategy = HyphenStrategy::parse(cols[2])
                .ok_or_else(|| DataError::malformed(file, line, "unknown hyphen strategy"))?;
            let script = if cols[1] == "-" {
                None
            } else {
                let ids = parse_script_codes(cols[1], inventory)
                    .map_err(|m| DataError::malformed(file, line, &m))?;
                check_final_forms(&ids, inventory).map_err(|m| DataError::malformed(file, line, &m))?;
                Some(ids)
            };
            if script.is_none() && strategy == HyphenStrategy::WholeWord {
                return Err(DataError::malformed(file, line, "whole-word entry needs a script form"));
            }
            let key = cols[0].to_string();
            if entries.insert(key, LexiconEntry { script, strategy }).is_some() {
                return Err(DataError::malformed(file, line, "duplicate entry"));
            }
        }
        Ok(Lexicon { entries })
    }

    pub fn get(&self, word: &str) -> Option<&LexiconEntry> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Resolves a word through its hyphen strategy. `None` means the word
    /// is not covered and conversion should continue with later routes.
    pub fn resolve(&self, word: &str) -> Option<&[CharId]> {
        let entry = self.entries.get(word)?;
        match entry.strategy {
            HyphenStrategy::WholeWord => entry.script.as_deref(),
            HyphenStrategy::StripHyphen => {
                let stripped: String = word.chars().filter(|&c| c != '-').collect();
                self.entries
                    .get(&stripped)
                    .and_then(|e| e.script.as_deref())
                    .or(entry.script.as_deref())
            }
            HyphenStrategy::SplitComponents => {
                if word.contains('-') {
                    None
                } else {
                    entry.script.as_deref()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OverrideAction {
    Phonetic,
    Script(Vec<CharId>),
}

/// Conversion choices that depend on the part of speech.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    entries: HashMap<(String, String), OverrideAction>,
}

impl Overrides {
    pub fn builtin(inventory: &Inventory) -> Self {
        Self::parse(BUILTIN_OVERRIDES, inventory).expect("builtin overrides are valid")
    }

    pub fn parse(text: &str, inventory: &Inventory) -> Result<Self, DataError> {
        let file = "overrides";
        let mut entries = HashMap::new();
        for (line, cols) in data_rows(text) {
            if cols.len() != 3 {
                return Err(DataError::malformed(file, line, "expected 3 columns"));
            }
            let action = match cols[2] {
                "phonetic" => OverrideAction::Phonetic,
                a => match a.strip_prefix("script:") {
                    Some(codes) => OverrideAction::Script(
                        parse_script_codes(codes, inventory).map_err(|m| DataError::malformed(file, line, &m))?,
                    ),
                    None => return Err(DataError::malformed(file, line, "unknown action")),
                },
            };
            if entries
                .insert((cols[0].to_string(), cols[1].to_string()), action)
                .is_some()
            {
                return Err(DataError::malformed(file, line, "duplicate override"));
            }
        }
        Ok(Overrides { entries })
    }

    pub fn get(&self, word: &str, pos: &str) -> Option<&OverrideAction> {
        self.entries.get(&(word.to_string(), pos.to_string()))
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|(_, p)| p.as_str())
    }
}

/// Treebank romanizations rewritten before conversion.
#[derive(Debug, Clone, Default)]
pub struct RespellTable {
    entries: HashMap<(String, String), String>,
}

impl RespellTable {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_RESPELL).expect("builtin respell table is valid")
    }

    pub fn parse(text: &str) -> Result<Self, DataError> {
        let file = "respell";
        let mut entries = HashMap::new();
        for (line, cols) in data_rows(text) {
            if cols.len() != 3 {
                return Err(DataError::malformed(file, line, "expected 3 columns"));
            }
            let key = (cols[0].to_string(), cols[1].to_string());
            if entries.insert(key, cols[2].to_string()).is_some() {
                return Err(DataError::malformed(file, line, "duplicate respelling"));
            }
        }
        for ((pos, from), to) in &entries {
            if entries.contains_key(&(pos.clone(), to.clone())) && from != to {
                return Err(DataError::malformed(
                    file,
                    0,
                    &format!("respelling of {from:?} as {to:?} is not final under {pos}"),
                ));
            }
        }
        Ok(RespellTable { entries })
    }

    pub fn respell<'a>(&'a self, word: &'a str, pos: &str) -> &'a str {
        self.entries
            .get(&(pos.to_string(), word.to_string()))
            .map(String::as_str)
            .unwrap_or(word)
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|(p, _)| p.as_str())
    }
}

/// Hand-fixed script forms for (word, pos) pairs.
#[derive(Debug, Clone, Default)]
pub struct Hardcoded {
    entries: HashMap<(String, String), Vec<CharId>>,
}

impl Hardcoded {
    pub fn builtin(inventory: &Inventory) -> Self {
        Self::parse(BUILTIN_HARDCODED, inventory).expect("builtin hardcoded table is valid")
    }

    pub fn parse(text: &str, inventory: &Inventory) -> Result<Self, DataError> {
        let file = "hardcoded";
        let mut entries = HashMap::new();
        for (line, cols) in data_rows(text) {
            if cols.len() != 3 {
                return Err(DataError::malformed(file, line, "expected 3 columns"));
            }
            let ids = parse_script_codes(cols[2], inventory).map_err(|m| DataError::malformed(file, line, &m))?;
            if entries
                .insert((cols[0].to_string(), cols[1].to_string()), ids)
                .is_some()
            {
                return Err(DataError::malformed(file, line, "duplicate entry"));
            }
        }
        Ok(Hardcoded { entries })
    }

    pub fn get(&self, word: &str, pos: &str) -> Option<&[CharId]> {
        self.entries
            .get(&(word.to_string(), pos.to_string()))
            .map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|(_, p)| p.as_str())
    }
}
