//! Conversion of romanized Yiddish into the script notation.

pub mod align;
pub mod lexicon;
pub mod rules;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

pub use align::{verify_against_source, AlignConfig, AlignedPair, AlignmentReport};
pub use lexicon::{Hardcoded, HyphenStrategy, Lexicon, LexiconEntry, OverrideAction, Overrides, RespellTable};
pub use rules::{PhoneticRule, PhoneticRuleSet, Position};

use crate::script::{CharId, Inventory, ReductionLevel, ScriptText};
use crate::textpipe::FrequencyTable;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{file} line {line}: {msg}")]
    Malformed {
        file: &'static str,
        line: usize,
        msg: String,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl DataError {
    pub(crate) fn malformed(file: &'static str, line: usize, msg: &str) -> Self {
        DataError::Malformed {
            file,
            line,
            msg: msg.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConversionError {
    #[error("empty word")]
    EmptyInput,
    #[error("no phonetic rule matches {word:?} at byte {position}")]
    RuleGap { word: String, position: usize },
}

/// Parses space-separated inventory ascii forms.
pub(crate) fn parse_script_codes(codes: &str, inventory: &Inventory) -> Result<Vec<CharId>, String> {
    let ids: Result<Vec<CharId>, String> = codes
        .split(' ')
        .filter(|c| !c.is_empty())
        .map(|c| inventory.by_ascii(c).ok_or_else(|| format!("unknown script code {c:?}")))
        .collect();
    let ids = ids?;
    if ids.is_empty() {
        return Err("empty script form".into());
    }
    Ok(ids)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Phonetic,
    Lexicon,
    Override,
    Hardcoded,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Phonetic => "phonetic",
            Route::Lexicon => "lexicon",
            Route::Override => "override",
            Route::Hardcoded => "hardcoded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConversionWarning {
    /// A word tagged as Hebrew-origin got no lexicon entry.
    PhoneticFallback { word: String, pos: String },
}

impl fmt::Display for ConversionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConversionWarning::PhoneticFallback { word, pos } => {
                write!(f, "{word:?} ({pos}) has no lexicon entry; converted phonetically")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionResult {
    pub script: ScriptText,
    pub route: Route,
    /// Routes of the components when a hyphenated word was split.
    pub components: Vec<Route>,
    pub warnings: Vec<ConversionWarning>,
}

#[derive(Debug, Clone)]
pub struct Romanizer {
    inventory: Inventory,
    rules: PhoneticRuleSet,
    lexicon: Lexicon,
    overrides: Overrides,
    respellings: RespellTable,
    hardcoded: Hardcoded,
}

fn is_peripheral(c: char) -> bool {
    !(c.is_ascii_alphanumeric() || c == '\'' || c == '-')
}

fn hebrew_origin_tag(pos: &str) -> bool {
    pos.split('~')
        .any(|t| t.split("_S").next().is_some_and(|b| b == "H" || b.ends_with("-H")))
}

impl Romanizer {
    pub fn builtin() -> Self {
        let inventory = Inventory::builtin().clone();
        Romanizer {
            rules: PhoneticRuleSet::builtin(&inventory),
            lexicon: Lexicon::builtin(&inventory),
            overrides: Overrides::builtin(&inventory),
            respellings: RespellTable::builtin(),
            hardcoded: Hardcoded::builtin(&inventory),
            inventory,
        }
    }

    pub fn new(
        inventory: Inventory,
        rules: PhoneticRuleSet,
        lexicon: Lexicon,
        overrides: Overrides,
        respellings: RespellTable,
        hardcoded: Hardcoded,
    ) -> Self {
        Romanizer {
            inventory,
            rules,
            lexicon,
            overrides,
            respellings,
            hardcoded,
        }
    }

    /// Builtin tables with any of the files in `dir` replacing them:
    /// `phonetic_rules.tsv`, `lexicon.tsv`, `overrides.tsv`, `respell.tsv`,
    /// `hardcoded.tsv`.
    pub fn from_dir(inventory: Inventory, dir: &Path) -> Result<Self, DataError> {
        let read = |name: &str| -> Result<Option<String>, DataError> {
            let p = dir.join(name);
            if !p.exists() {
                return Ok(None);
            }
            std::fs::read_to_string(&p).map(Some).map_err(|source| DataError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        let rules = match read("phonetic_rules.tsv")? {
            Some(t) => PhoneticRuleSet::parse(&t, &inventory)?,
            None => PhoneticRuleSet::builtin(&inventory),
        };
        let lexicon = match read("lexicon.tsv")? {
            Some(t) => Lexicon::parse(&t, &inventory)?,
            None => Lexicon::builtin(&inventory),
        };
        let overrides = match read("overrides.tsv")? {
            Some(t) => Overrides::parse(&t, &inventory)?,
            None => Overrides::builtin(&inventory),
        };
        let respellings = match read("respell.tsv")? {
            Some(t) => RespellTable::parse(&t)?,
            None => RespellTable::builtin(),
        };
        let hardcoded = match read("hardcoded.tsv")? {
            Some(t) => Hardcoded::parse(&t, &inventory)?,
            None => Hardcoded::builtin(&inventory),
        };
        Ok(Romanizer::new(inventory, rules, lexicon, overrides, respellings, hardcoded))
    }

    pub fn inventory(&self) -> &Inventory {
        &self.inventory
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// POS tags mentioned by the override, respelling and hardcoded tables.
    pub fn referenced_tags(&self) -> HashSet<&str> {
        self.overrides
            .tags()
            .chain(self.respellings.tags())
            .chain(self.hardcoded.tags())
            .collect()
    }

    pub fn respell<'a>(&'a self, word: &'a str, pos: &str) -> &'a str {
        self.respellings.respell(word, pos)
    }

    pub fn detransliterate(&self, word: &str, pos: Option<&str>) -> Result<ConversionResult, ConversionError> {
        if word.is_empty() {
            return Err(ConversionError::EmptyInput);
        }
        let lower = word.to_lowercase();
        let start = lower.find(|c| !is_peripheral(c));
        let Some(start) = start else {
            let ids = self.phonetic(&lower)?;
            return Ok(self.result(ids, Route::Phonetic, Vec::new(), Vec::new()));
        };
        let end = lower.rfind(|c| !is_peripheral(c)).map(|e| e + 1).unwrap_or(lower.len());
        let (head, core, tail) = (&lower[..start], &lower[start..end], &lower[end..]);
        let (mut ids, route, components, warnings) = self.convert_core(core, pos)?;
        let mut out = self.rules.apply(head)?;
        out.append(&mut ids);
        out.extend(self.rules.apply(tail)?);
        Ok(self.result(out, route, components, warnings))
    }

    fn result(
        &self,
        ids: Vec<CharId>,
        route: Route,
        components: Vec<Route>,
        warnings: Vec<ConversionWarning>,
    ) -> ConversionResult {
        let text = self.inventory.encode_ids(&ids);
        ConversionResult {
            script: ScriptText::new(&self.inventory, text).expect("inventory ids always encode"),
            route,
            components,
            warnings,
        }
    }

    fn phonetic(&self, word: &str) -> Result<Vec<CharId>, ConversionError> {
        let mut ids = self.rules.apply(word)?;
        self.inventory.apply_final_forms(&mut ids);
        Ok(ids)
    }

    #[allow(clippy::type_complexity)]
    fn convert_core(
        &self,
        word: &str,
        pos: Option<&str>,
    ) -> Result<(Vec<CharId>, Route, Vec<Route>, Vec<ConversionWarning>), ConversionError> {
        if let Some(pos) = pos {
            if let Some(ids) = self.hardcoded.get(word, pos) {
                return Ok((ids.to_vec(), Route::Hardcoded, Vec::new(), Vec::new()));
            }
            match self.overrides.get(word, pos) {
                Some(OverrideAction::Phonetic) => {
                    return Ok((self.phonetic(word)?, Route::Override, Vec::new(), Vec::new()))
                }
                Some(OverrideAction::Script(ids)) => {
                    return Ok((ids.clone(), Route::Override, Vec::new(), Vec::new()))
                }
                None => {}
            }
        }
        if let Some(ids) = self.lexicon.resolve(word) {
            return Ok((ids.to_vec(), Route::Lexicon, Vec::new(), Vec::new()));
        }
        let mut warnings = Vec::new();
        if word.contains('-') && word.split('-').all(|c| !c.is_empty()) {
            let mut ids = Vec::new();
            let mut routes = Vec::new();
            for (k, part) in word.split('-').enumerate() {
                if k > 0 {
                    ids.extend(self.rules.apply("-")?);
                }
                let (mut part_ids, route, _, mut w) = self.convert_core(part, None)?;
                ids.append(&mut part_ids);
                routes.push(route);
                warnings.append(&mut w);
            }
            let route = if routes.contains(&Route::Lexicon) {
                Route::Lexicon
            } else {
                Route::Phonetic
            };
            if route == Route::Phonetic {
                self.warn_fallback(word, pos, &mut warnings);
            }
            return Ok((ids, route, routes, warnings));
        }
        let ids = self.phonetic(word)?;
        self.warn_fallback(word, pos, &mut warnings);
        Ok((ids, Route::Phonetic, Vec::new(), warnings))
    }

    fn warn_fallback(&self, word: &str, pos: Option<&str>, warnings: &mut Vec<ConversionWarning>) {
        if let Some(pos) = pos.filter(|p| hebrew_origin_tag(p)) {
            log::warn!("{word:?} ({pos}) converted phonetically");
            warnings.push(ConversionWarning::PhoneticFallback {
                word: word.to_string(),
                pos: pos.to_string(),
            });
        }
    }
}

/// Converted tokens unattested in `table` at every diacritic-reduction level.
pub fn existence_check<'a>(inventory: &Inventory, tokens: &'a [String], table: &FrequencyTable) -> Vec<&'a str> {
    let reduced_table = |level| -> HashSet<String> {
        table
            .iter()
            .filter_map(|(t, _)| inventory.reduce_diacritics(t, level).ok())
            .collect()
    };
    let levels = [ReductionLevel::One, ReductionLevel::Two];
    let mut reduced: [Option<HashSet<String>>; 2] = [None, None];
    let mut unattested = Vec::new();
    for tok in tokens {
        if table.get(tok) > 0 {
            continue;
        }
        let mut found = false;
        for (k, &level) in levels.iter().enumerate() {
            let Ok(r) = inventory.reduce_diacritics(tok, level) else {
                continue;
            };
            let set = reduced[k].get_or_insert_with(|| reduced_table(level));
            if set.contains(&r) {
                found = true;
                break;
            }
        }
        if !found {
            unattested.push(tok.as_str());
        }
    }
    unattested
}
