use std::collections::HashSet;

use rayon::prelude::*;

use super::{cosine, EmbeddingTable};
use crate::edit::{self, EditOp};
use crate::script::{CharClass, CharId, Inventory, ReductionLevel};
use crate::textpipe::FrequencyTable;

const BUILTIN_CONFUSION: &str = include_str!("../../data/confusion.tsv");

/// Letters that stand for vowels, by inventory name.
const VOWEL_LETTERS: &[&str] = &[
    "alef",
    "pasekh-alef",
    "komets-alef",
    "ayin",
    "vov",
    "melupm-vov",
    "vov-yud",
    "yud",
    "khirek-yud",
    "tsvey-yudn",
    "pasekh-tsvey-yudn",
];

/// Unordered pairs of letters that OCR commonly confuses.
#[derive(Debug, Clone, Default)]
pub struct ConfusionTable {
    pairs: HashSet<(CharId, CharId)>,
}

impl ConfusionTable {
    pub fn builtin(inventory: &Inventory) -> Self {
        Self::parse(BUILTIN_CONFUSION, inventory).expect("builtin confusion table is valid")
    }

    pub fn parse(text: &str, inventory: &Inventory) -> Result<Self, String> {
        let mut pairs = HashSet::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (a, b) = line
                .split_once('\t')
                .ok_or_else(|| format!("confusion line {}: expected two letter names", n + 1))?;
            let id = |name: &str| {
                inventory
                    .by_name(name.trim())
                    .ok_or_else(|| format!("confusion line {}: unknown letter {name:?}", n + 1))
            };
            let (a, b) = (id(a)?, id(b)?);
            pairs.insert((a, b));
            pairs.insert((b, a));
        }
        Ok(ConfusionTable { pairs })
    }

    pub fn contains(&self, a: CharId, b: CharId) -> bool {
        self.pairs.contains(&(a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantClass {
    SpellingVariant,
    OcrError,
}

impl std::fmt::Display for VariantClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VariantClass::SpellingVariant => "spelling-variant",
            VariantClass::OcrError => "ocr-error",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantCandidate {
    pub a: String,
    pub b: String,
    pub cosine: f64,
    pub edit_distance: usize,
    pub class: VariantClass,
    /// Some substitution is a known confusable letter pair.
    pub confusable: bool,
    pub count_a: u64,
    pub count_b: u64,
}

struct Zones<'a> {
    inv: &'a Inventory,
    vowels: HashSet<CharId>,
    hey: Option<CharId>,
    apostrophe: Option<CharId>,
}

impl<'a> Zones<'a> {
    fn new(inv: &'a Inventory) -> Self {
        Zones {
            inv,
            vowels: VOWEL_LETTERS.iter().filter_map(|n| inv.by_name(n)).collect(),
            hey: inv.by_name("hey"),
            apostrophe: inv.by_name("apostrophe"),
        }
    }

    fn diacritic_pair(&self, a: CharId, b: CharId) -> bool {
        let (ea, eb) = (self.inv.entry(a), self.inv.entry(b));
        let pointed = ea.class == CharClass::DiacriticComposed || eb.class == CharClass::DiacriticComposed;
        let same_base = ea.unicode.chars().next() == eb.unicode.chars().next();
        let reduces = self.inv.reduction(a, ReductionLevel::Two) == self.inv.reduction(b, ReductionLevel::Two);
        pointed && (same_base || reduces)
    }

    fn substitution(&self, a: CharId, b: CharId) -> bool {
        self.diacritic_pair(a, b) || (self.vowels.contains(&a) && self.vowels.contains(&b))
    }

    fn indel(&self, c: CharId) -> bool {
        self.vowels.contains(&c) || Some(c) == self.hey || Some(c) == self.apostrophe
    }
}

fn classify(zones: &Zones, confusion: &ConfusionTable, a: &[CharId], b: &[CharId]) -> (VariantClass, bool) {
    let ops = edit::edit_script(a, b);
    let mut variant = true;
    let mut confusable = false;
    for op in ops {
        match op {
            EditOp::Substitute(x, y) => {
                confusable |= confusion.contains(x, y);
                variant &= zones.substitution(x, y);
            }
            EditOp::Insert(c) | EditOp::Delete(c) => variant &= zones.indel(c),
        }
    }
    let class = if variant {
        VariantClass::SpellingVariant
    } else {
        VariantClass::OcrError
    };
    (class, confusable)
}

/// Word pairs that are close both in embedding space and in spelling.
pub fn variant_candidates(
    table: &EmbeddingTable,
    freq: &FrequencyTable,
    inventory: &Inventory,
    confusion: &ConfusionTable,
    min_cosine: f64,
    max_edit: usize,
) -> Vec<VariantCandidate> {
    let zones = Zones::new(inventory);
    let ids: Vec<Option<Vec<CharId>>> = table.vocab().iter().map(|t| inventory.clusters(t).ok()).collect();
    let mut out: Vec<VariantCandidate> = (0..table.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let zones = &zones;
            let ids = &ids;
            (i + 1..table.len()).filter_map(move |j| {
                let c = cosine(table.row(i), table.row(j)).ok()?;
                if c < min_cosine {
                    return None;
                }
                let (a, b) = (ids[i].as_ref()?, ids[j].as_ref()?);
                let dist = edit::distance_within(a, b, max_edit)?;
                let (class, confusable) = classify(zones, confusion, a, b);
                let (ta, tb) = (&table.vocab()[i], &table.vocab()[j]);
                Some(VariantCandidate {
                    a: ta.clone(),
                    b: tb.clone(),
                    cosine: c,
                    edit_distance: dist,
                    class,
                    confusable,
                    count_a: freq.get(ta),
                    count_b: freq.get(tb),
                })
            })
        })
        .collect();
    out.sort_by(|x, y| {
        y.cosine
            .total_cmp(&x.cosine)
            .then_with(|| x.a.cmp(&y.a))
            .then_with(|| x.b.cmp(&y.b))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, [f64; 2])]) -> EmbeddingTable {
        EmbeddingTable::new(
            rows.iter().map(|(t, _)| t.to_string()).collect(),
            2,
            rows.iter().flat_map(|(_, v)| v.iter().copied()).collect(),
        )
        .unwrap()
    }

    fn one(a: &str, b: &str) -> VariantCandidate {
        let inv = Inventory::builtin();
        let t = table(&[(a, [1.0, 0.1]), (b, [1.0, 0.12])]);
        let mut v = variant_candidates(&t, &FrequencyTable::new(), inv, &ConfusionTable::builtin(inv), 0.5, 2);
        assert_eq!(v.len(), 1);
        v.remove(0)
    }

    #[test]
    fn pointing_difference_is_a_variant() {
        // badaytung / badeytung
        let c = one("bPAdPYTwng", "bPAdYTwng");
        assert_eq!(c.class, VariantClass::SpellingVariant);
        assert_eq!(c.edit_distance, 1);
    }

    #[test]
    fn silent_hey_and_vowels_are_variants() {
        // ehnlikh / enlekh
        assert_eq!(one("ehnlyFx", "enleFx").class, VariantClass::SpellingVariant);
    }

    #[test]
    fn confusable_consonants_are_ocr() {
        // bur / bukh
        let c = one("bwr", "bwFx");
        assert_eq!(c.class, VariantClass::OcrError);
        assert!(c.confusable);
        let c = one("bwr", "bwd");
        assert_eq!(c.class, VariantClass::OcrError);
    }

    #[test]
    fn threshold_above_one_is_empty() {
        let inv = Inventory::builtin();
        let t = table(&[("bwr", [1.0, 0.0]), ("bwd", [1.0, 0.0])]);
        assert!(variant_candidates(&t, &FrequencyTable::new(), inv, &ConfusionTable::builtin(inv), 1.01, 3).is_empty());
    }
}
