//! Corpus quality checks: medial final forms, apostrophes read as commas,
//! heavily pointed documents and low-frequency likely misreadings.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{segment_sentences, Document, FrequencyTable, Sentence, Tokenizer};
use crate::edit;
use crate::script::{CharClass, CharId, Inventory};

#[derive(Debug, Clone, PartialEq)]
pub struct QaConfig {
    /// Minimum count of the apostrophe form behind a `w , x` triple.
    pub apostrophe_min_count: u64,
    /// Tokens at or below this count can be low-frequency suspects.
    pub low_freq_max: u64,
    /// A suspect's edit-distance-1 neighbor needs at least this count.
    pub neighbor_min_count: u64,
    /// Share of letters carrying points above which a document is flagged.
    pub pointed_rate: f64,
    /// Documents with fewer letters are not rated.
    pub pointed_min_letters: usize,
}

impl Default for QaConfig {
    fn default() -> Self {
        QaConfig {
            apostrophe_min_count: 20,
            low_freq_max: 5,
            neighbor_min_count: 100,
            pointed_rate: 0.3,
            pointed_min_letters: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedialFinalToken {
    pub token: String,
    pub count: u64,
    pub positions: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MedialFinalSection {
    pub tokens: Vec<MedialFinalToken>,
    pub occurrences: u64,
    pub singletons: usize,
}

impl MedialFinalSection {
    pub fn singleton_share(&self) -> f64 {
        if self.tokens.is_empty() {
            0.0
        } else {
            self.singletons as f64 / self.tokens.len() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApostropheCandidate {
    pub left: String,
    pub right: String,
    pub joined: String,
    pub occurrences: u64,
    pub joined_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointedDocument {
    pub doc_id: String,
    pub letters: usize,
    pub pointed: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowFrequencySuspect {
    pub token: String,
    pub count: u64,
    pub neighbor: String,
    pub neighbor_count: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QaReport {
    pub medial_final: MedialFinalSection,
    pub apostrophe_commas: Vec<ApostropheCandidate>,
    pub pointed_documents: Vec<PointedDocument>,
    pub low_frequency: Vec<LowFrequencySuspect>,
}

impl QaReport {
    pub fn is_clean(&self) -> bool {
        self.medial_final.tokens.is_empty()
            && self.apostrophe_commas.is_empty()
            && self.pointed_documents.is_empty()
            && self.low_frequency.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let m = &self.medial_final;
        let _ = writeln!(s, "[medial-final-forms]");
        let _ = writeln!(s, "distinct\t{}", m.tokens.len());
        let _ = writeln!(s, "occurrences\t{}", m.occurrences);
        let _ = writeln!(s, "singleton_share\t{:.4}", m.singleton_share());
        let _ = writeln!(s, "token\tcount\tpositions");
        for t in &m.tokens {
            let pos: Vec<String> = t.positions.iter().map(|(o, n)| format!("{o}:{n}")).collect();
            let _ = writeln!(s, "{}\t{}\t{}", t.token, t.count, pos.join(","));
        }
        let _ = writeln!(s, "\n[apostrophe-as-comma]");
        let _ = writeln!(s, "left\tright\tcandidate\toccurrences\tcandidate_count");
        for c in &self.apostrophe_commas {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}",
                c.left, c.right, c.joined, c.occurrences, c.joined_count
            );
        }
        let _ = writeln!(s, "\n[pointed-documents]");
        let _ = writeln!(s, "doc_id\tletters\tpointed\trate");
        for d in &self.pointed_documents {
            let _ = writeln!(s, "{}\t{}\t{}\t{:.4}", d.doc_id, d.letters, d.pointed, d.rate);
        }
        let _ = writeln!(s, "\n[low-frequency-suspects]");
        let _ = writeln!(s, "token\tcount\tneighbor\tneighbor_count");
        for l in &self.low_frequency {
            let _ = writeln!(s, "{}\t{}\t{}\t{}", l.token, l.count, l.neighbor, l.neighbor_count);
        }
        s
    }
}

fn is_word(inv: &Inventory, token: &str) -> Option<Vec<CharId>> {
    let ids = inv.clusters(token).ok()?;
    ids.iter()
        .any(|&id| inv.entry(id).class.is_letter())
        .then_some(ids)
}

pub fn qa_report(
    documents: &[Document],
    inventory: &Inventory,
    tokenizer: &Tokenizer,
    config: &QaConfig,
) -> QaReport {
    let sentences: Vec<Sentence> = documents
        .iter()
        .flat_map(|d| segment_sentences(&d.lines, tokenizer))
        .collect();
    let freq = FrequencyTable::from_sentences(&sentences);
    QaReport {
        medial_final: medial_final_forms(&freq, inventory),
        apostrophe_commas: apostrophe_commas(&sentences, &freq, inventory, config),
        pointed_documents: pointed_documents(documents, inventory, config),
        low_frequency: low_frequency_suspects(&freq, inventory, config),
    }
}

pub(crate) fn medial_final_forms(freq: &FrequencyTable, inv: &Inventory) -> MedialFinalSection {
    let mut section = MedialFinalSection::default();
    for (tok, count) in freq.sorted() {
        let Ok(found) = inv.find_medial_final_forms(tok) else {
            continue;
        };
        if found.is_empty() {
            continue;
        }
        section.occurrences += count;
        if count == 1 {
            section.singletons += 1;
        }
        section.tokens.push(MedialFinalToken {
            token: tok.to_string(),
            count,
            positions: found.into_iter().map(|(o, n)| (o, n.to_string())).collect(),
        });
    }
    section
}

fn apostrophe_commas(
    sentences: &[Sentence],
    freq: &FrequencyTable,
    inv: &Inventory,
    config: &QaConfig,
) -> Vec<ApostropheCandidate> {
    let mut hits: BTreeMap<(String, String), u64> = BTreeMap::new();
    for s in sentences {
        for w in s.tokens.windows(3) {
            if w[1] != "," || is_word(inv, &w[0]).is_none() || is_word(inv, &w[2]).is_none() {
                continue;
            }
            let joined = format!("{}'{}", w[0], w[2]);
            if freq.get(&joined) >= config.apostrophe_min_count {
                *hits.entry((w[0].clone(), w[2].clone())).or_insert(0) += 1;
            }
        }
    }
    let mut out: Vec<_> = hits
        .into_iter()
        .map(|((left, right), occurrences)| {
            let joined = format!("{left}'{right}");
            ApostropheCandidate {
                joined_count: freq.get(&joined),
                left,
                right,
                joined,
                occurrences,
            }
        })
        .collect();
    out.sort_by(|a, b| b.occurrences.cmp(&a.occurrences).then_with(|| a.joined.cmp(&b.joined)));
    out
}

fn pointed_documents(docs: &[Document], inv: &Inventory, config: &QaConfig) -> Vec<PointedDocument> {
    let mut out = Vec::new();
    for doc in docs {
        let (mut letters, mut pointed) = (0usize, 0usize);
        for line in &doc.lines {
            let Ok(pieces) = inv.decode(&line.text) else {
                continue;
            };
            for p in pieces {
                if let crate::script::Piece::Char { id, .. } = p {
                    let class = inv.entry(id).class;
                    if class.is_letter() {
                        letters += 1;
                        if class == CharClass::DiacriticComposed {
                            pointed += 1;
                        }
                    }
                }
            }
        }
        if letters < config.pointed_min_letters.max(1) {
            continue;
        }
        let rate = pointed as f64 / letters as f64;
        if rate > config.pointed_rate {
            out.push(PointedDocument {
                doc_id: doc.doc_id.clone(),
                letters,
                pointed,
                rate,
            });
        }
    }
    out
}

fn deletions(ids: &[CharId]) -> Vec<Vec<CharId>> {
    (0..ids.len())
        .map(|i| {
            let mut v = ids.to_vec();
            v.remove(i);
            v
        })
        .collect()
}

pub(crate) fn low_frequency_suspects(
    freq: &FrequencyTable,
    inv: &Inventory,
    config: &QaConfig,
) -> Vec<LowFrequencySuspect> {
    // symmetric-deletion index over the frequent words
    let mut frequent: Vec<(&str, u64, Vec<CharId>)> = Vec::new();
    let mut index: HashMap<Vec<CharId>, Vec<usize>> = HashMap::new();
    for (tok, n) in freq.sorted() {
        if n < config.neighbor_min_count {
            break;
        }
        let Some(ids) = is_word(inv, tok) else {
            continue;
        };
        let k = frequent.len();
        for d in deletions(&ids) {
            index.entry(d).or_default().push(k);
        }
        index.entry(ids.clone()).or_default().push(k);
        frequent.push((tok, n, ids));
    }

    let mut out = Vec::new();
    for (tok, n) in freq.sorted() {
        if n > config.low_freq_max {
            continue;
        }
        let Some(ids) = is_word(inv, tok) else {
            continue;
        };
        let mut best: Option<usize> = None;
        let keys = std::iter::once(ids.clone()).chain(deletions(&ids));
        for key in keys {
            for &k in index.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                if edit::distance(&ids, &frequent[k].2) != 1 {
                    continue;
                }
                // frequent is sorted by count then token, so the lowest index wins
                if best.is_none_or(|b| k < b) {
                    best = Some(k);
                }
            }
        }
        if let Some(k) = best {
            out.push(LowFrequencySuspect {
                token: tok.to_string(),
                count: n,
                neighbor: frequent[k].0.to_string(),
                neighbor_count: frequent[k].1,
            });
        }
    }
    out
}
