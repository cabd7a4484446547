use std::collections::HashMap;

use super::{parse_script_codes, ConversionError, DataError};
use crate::script::{CharId, Inventory};

const BUILTIN_RULES: &str = include_str!("../../data/phonetic_rules.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Position {
    Initial,
    Final,
    Any,
}

impl Position {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "initial" => Some(Position::Initial),
            "final" => Some(Position::Final),
            "any" => Some(Position::Any),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhoneticRule {
    pub pattern: String,
    pub output: Vec<CharId>,
    pub position: Position,
}

/// Longest-match-first rewrite rules from romanized text to script.
#[derive(Debug, Clone)]
pub struct PhoneticRuleSet {
    rules: Vec<PhoneticRule>,
    by_pattern: HashMap<String, Vec<usize>>,
    max_len: usize,
}

fn is_boundary(c: u8) -> bool {
    c == b'\'' || c == b'-'
}

impl PhoneticRuleSet {
    pub fn builtin(inventory: &Inventory) -> Self {
        Self::parse(BUILTIN_RULES, inventory).expect("builtin phonetic rules are valid")
    }

    pub fn parse(text: &str, inventory: &Inventory) -> Result<Self, DataError> {
        let file = "phonetic rules";
        let mut rules: Vec<PhoneticRule> = Vec::new();
        let mut by_pattern: HashMap<String, Vec<usize>> = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(DataError::malformed(file, line_no, "expected 3 columns"));
            }
            let pattern = cols[0].to_string();
            if pattern.is_empty() || !pattern.is_ascii() {
                return Err(DataError::malformed(file, line_no, "pattern must be non-empty ascii"));
            }
            let output = parse_script_codes(cols[1], inventory)
                .map_err(|m| DataError::malformed(file, line_no, &m))?;
            let position = Position::parse(cols[2])
                .ok_or_else(|| DataError::malformed(file, line_no, "unknown position"))?;
            let same = by_pattern.entry(pattern.clone()).or_default();
            if same.iter().any(|&i| rules[i].position == position) {
                return Err(DataError::malformed(file, line_no, "duplicate pattern and position"));
            }
            same.push(rules.len());
            rules.push(PhoneticRule {
                pattern,
                output,
                position,
            });
        }
        for ids in by_pattern.values_mut() {
            ids.sort_by_key(|&i| rules[i].position);
        }
        let max_len = rules.iter().map(|r| r.pattern.len()).max().unwrap_or(0);
        Ok(PhoneticRuleSet {
            rules,
            by_pattern,
            max_len,
        })
    }

    pub fn rules(&self) -> &[PhoneticRule] {
        &self.rules
    }

    /// The rule that fires at byte `i` of `word`, if any.
    pub fn rule_at(&self, word: &str, i: usize) -> Option<&PhoneticRule> {
        let bytes = word.as_bytes();
        let longest = self.max_len.min(bytes.len() - i);
        for len in (1..=longest).rev() {
            let Some(pattern) = word.get(i..i + len) else {
                continue;
            };
            let Some(candidates) = self.by_pattern.get(pattern) else {
                continue;
            };
            let initial = i == 0 || is_boundary(bytes[i - 1]);
            let fin = i + len == bytes.len() || is_boundary(bytes[i + len]);
            let hit = candidates.iter().map(|&k| &self.rules[k]).find(|r| match r.position {
                Position::Initial => initial,
                Position::Final => fin,
                Position::Any => true,
            });
            if hit.is_some() {
                return hit;
            }
        }
        None
    }

    /// Rewrites a word without applying final forms.
    pub fn apply(&self, word: &str) -> Result<Vec<CharId>, ConversionError> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < word.len() {
            let rule = self.rule_at(word, i).ok_or_else(|| ConversionError::RuleGap {
                word: word.to_string(),
                position: i,
            })?;
            out.extend_from_slice(&rule.output);
            i += rule.pattern.len();
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn convert(word: &str) -> String {
        let inv = Inventory::builtin();
        let rules = PhoneticRuleSet::builtin(inv);
        let mut ids = rules.apply(word).unwrap();
        inv.apply_final_forms(&mut ids);
        inv.encode_ids(&ids)
    }

    #[test]
    fn rokhl_phonetically() {
        // reysh, komets-alef, khof, lamed
        assert_eq!(convert("rokhl"), "rKAxl");
    }

    #[test]
    fn shem_phonetically() {
        assert_eq!(convert("shem"), "SeFm");
    }

    #[test]
    fn initial_diphthong_takes_alef() {
        assert_eq!(convert("oyf"), "AOFp");
        assert_eq!(convert("groys"), "grOs");
    }

    #[test]
    fn positional_rule_after_apostrophe() {
        assert_eq!(convert("s'iz"), "s'Ayz");
    }

    #[test]
    fn rule_gap_reports_position() {
        let inv = Inventory::builtin();
        let rules = PhoneticRuleSet::builtin(inv);
        assert_eq!(
            rules.apply("ab@c"),
            Err(ConversionError::RuleGap {
                word: "ab@c".into(),
                position: 2
            })
        );
    }

    #[test]
    fn duplicate_rule_rejected() {
        let inv = Inventory::builtin();
        assert!(PhoneticRuleSet::parse("a\tPA\tany\na\tKA\tany\n", inv).is_err());
        assert!(PhoneticRuleSet::parse("a\tPA\tany\na\tKA\tinitial\n", inv).is_ok());
    }

    #[test]
    fn undecodable_output_rejected() {
        let inv = Inventory::builtin();
        assert!(PhoneticRuleSet::parse("a\tQQQ\tany\n", inv).is_err());
    }
}
