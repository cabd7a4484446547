use std::collections::BTreeMap;
use std::fmt;

use super::EvalError;

pub const PUNCTUATION_TAG: &str = "PUNC";

/// Percentage of positions where the tags agree.
pub fn token_accuracy<S: AsRef<str>>(gold: &[S], predicted: &[S]) -> Result<f64, EvalError> {
    check_lengths(gold.len(), predicted.len())?;
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let correct = gold.iter().zip(predicted).filter(|(g, p)| g.as_ref() == p.as_ref()).count();
    Ok(100.0 * correct as f64 / gold.len() as f64)
}

fn check_lengths(expected: usize, found: usize) -> Result<(), EvalError> {
    if expected == found {
        Ok(())
    } else {
        Err(EvalError::LengthMismatch { expected, found })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TagScore {
    /// Gold occurrences.
    pub count: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

impl TagScore {
    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> Option<f64> {
        let (p, r) = (self.precision()?, self.recall()?);
        Some(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
    }

    fn add(&mut self, o: &TagScore) {
        self.count += o.count;
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subgroup {
    Total,
    NoPunc,
    Tilde,
}

impl Subgroup {
    pub const ALL: [Subgroup; 3] = [Subgroup::Total, Subgroup::NoPunc, Subgroup::Tilde];

    pub fn label(self) -> &'static str {
        match self {
            Subgroup::Total => "Total",
            Subgroup::NoPunc => "no PUNC",
            Subgroup::Tilde => "tilde",
        }
    }

    pub fn contains(self, tag: &str) -> bool {
        match self {
            Subgroup::Total => true,
            Subgroup::NoPunc => tag != PUNCTUATION_TAG,
            Subgroup::Tilde => tag.contains('~'),
        }
    }
}

/// Confusion counts for one evaluation section.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FoldMetrics {
    pub tokens: usize,
    pub correct: usize,
    /// Every tag seen in gold or predictions.
    pub tags: BTreeMap<String, TagScore>,
}

impl FoldMetrics {
    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.correct, self.tokens)
    }

    pub fn add_sequence<S: AsRef<str>>(&mut self, gold: &[S], predicted: &[S]) -> Result<(), EvalError> {
        check_lengths(gold.len(), predicted.len())?;
        for (g, p) in gold.iter().zip(predicted) {
            let (g, p) = (g.as_ref(), p.as_ref());
            self.tokens += 1;
            self.tags.entry(g.to_string()).or_default().count += 1;
            if g == p {
                self.correct += 1;
                self.tags.get_mut(g).unwrap().tp += 1;
            } else {
                self.tags.get_mut(g).unwrap().fn_ += 1;
                self.tags.entry(p.to_string()).or_default().fp += 1;
            }
        }
        Ok(())
    }

    /// Tags with gold occurrences, in tag order.
    pub fn rows(&self) -> impl Iterator<Item = (&str, &TagScore)> {
        self.tags.iter().filter(|(_, s)| s.count > 0).map(|(t, s)| (t.as_str(), s))
    }

    /// Summed counts over the group's tags; its F1 is the micro average.
    pub fn subgroup(&self, group: Subgroup) -> TagScore {
        let mut total = TagScore::default();
        for (_, s) in self.tags.iter().filter(|(t, _)| group.contains(t)) {
            total.add(s);
        }
        total
    }
}

pub fn per_tag_f1<S: AsRef<str>>(gold: &[S], predicted: &[S]) -> Result<FoldMetrics, EvalError> {
    let mut m = FoldMetrics::default();
    m.add_sequence(gold, predicted)?;
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub mean: f64,
    /// Sample standard deviation; absent for a single value.
    pub std: Option<f64>,
    pub n: usize,
}

impl Cell {
    pub fn from_values(values: &[f64]) -> Option<Cell> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
        Some(Cell { mean, std, n })
    }

    pub fn parse(s: &str) -> Option<(f64, Option<f64>)> {
        let s = s.trim();
        match s.split_once(" (") {
            Some((m, rest)) => Some((m.parse().ok()?, Some(rest.strip_suffix(')')?.parse().ok()?))),
            None => Some((s.parse().ok()?, None)),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.std {
            Some(sd) => write!(f, "{:.2} ({:.2})", self.mean, sd),
            None => write!(f, "{:.2}", self.mean),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    /// Mean gold count over the folds where the row is present.
    pub count: f64,
    pub f1: Option<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub fold_accuracy: Vec<f64>,
    pub accuracy: Option<Cell>,
    /// Total, no PUNC and tilde first, then tags by descending mean count.
    pub rows: Vec<ReportRow>,
}

pub fn aggregate_folds(folds: &[FoldMetrics]) -> MetricsReport {
    let fold_accuracy: Vec<f64> = folds.iter().filter_map(|f| f.accuracy()).collect();
    let mut rows = Vec::new();
    for g in Subgroup::ALL {
        let scores: Vec<TagScore> = folds.iter().map(|f| f.subgroup(g)).filter(|s| s.count > 0).collect();
        rows.push(row(g.label(), &scores));
    }
    let mut per_tag: BTreeMap<&str, Vec<TagScore>> = BTreeMap::new();
    for f in folds {
        for (t, s) in f.rows() {
            per_tag.entry(t).or_default().push(*s);
        }
    }
    let mut tag_rows: Vec<ReportRow> = per_tag.iter().map(|(t, s)| row(t, s)).collect();
    tag_rows.sort_by(|a, b| b.count.total_cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
    rows.extend(tag_rows);
    MetricsReport {
        accuracy: Cell::from_values(&fold_accuracy),
        fold_accuracy,
        rows,
    }
}

fn row(label: &str, scores: &[TagScore]) -> ReportRow {
    let count = if scores.is_empty() {
        0.0
    } else {
        scores.iter().map(|s| s.count as f64).sum::<f64>() / scores.len() as f64
    };
    let f1s: Vec<f64> = scores.iter().filter_map(|s| s.f1()).collect();
    ReportRow {
        label: label.to_string(),
        count,
        f1: Cell::from_values(&f1s),
    }
}

fn cell_text(c: &Option<Cell>) -> String {
    c.as_ref().map(|c| c.to_string()).unwrap_or_else(|| "-".into())
}

impl MetricsReport {
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(3).max(3);
        let mut s = format!("{:<width$}  {:>9}  {}\n", "tag", "count", "F1");
        for r in &self.rows {
            s.push_str(&format!("{:<width$}  {:>9.1}  {}\n", r.label, r.count, cell_text(&r.f1)));
        }
        s.push_str("# mean (standard deviation) over folds, n-1 denominator; tags absent from a fold are left out of its mean\n");
        s
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("tag\tcount\tf1_mean\tf1_std\tfolds\n");
        for r in &self.rows {
            let (m, sd, n) = match &r.f1 {
                Some(c) => (
                    format!("{:.4}", c.mean),
                    c.std.map(|v| format!("{v:.4}")).unwrap_or_default(),
                    c.n,
                ),
                None => (String::new(), String::new(), 0),
            };
            s.push_str(&format!("{}\t{:.2}\t{m}\t{sd}\t{n}\n", r.label, r.count));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(token_accuracy(&["A", "B"], &["A", "B"]).unwrap(), 100.0);
        assert_eq!(token_accuracy(&["A", "B", "C", "D"], &["A", "B", "C", "A"]).unwrap(), 75.0);
        assert!(matches!(
            token_accuracy(&["A"], &["A", "B"]),
            Err(EvalError::LengthMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn hand_confusion_matrix() {
        let m = per_tag_f1(&["A", "A", "B"], &["A", "B", "B"]).unwrap();
        let a = m.tags["A"];
        let b = m.tags["B"];
        assert!((a.f1().unwrap() - 200.0 / 3.0).abs() < 1e-9);
        assert!((b.f1().unwrap() - 200.0 / 3.0).abs() < 1e-9);
        assert!((m.subgroup(Subgroup::Total).f1().unwrap() - m.accuracy().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn never_predicted_tag_has_no_f1() {
        let m = per_tag_f1(&["A", "B"], &["A", "A"]).unwrap();
        assert_eq!(m.tags["B"].precision(), None);
        assert_eq!(m.tags["B"].f1(), None);
        assert_eq!(m.tags["B"].recall(), Some(0.0));
    }

    #[test]
    fn aggregate_examples() {
        let folds: Vec<f64> = vec![97.0, 99.0];
        let c = Cell::from_values(&folds).unwrap();
        assert_eq!(c.to_string(), "98.00 (1.41)");
        let same = Cell::from_values(&[95.5; 10]).unwrap();
        assert_eq!(same.to_string(), "95.50 (0.00)");
        assert_eq!(Cell::from_values(&[88.0]).unwrap().to_string(), "88.00");
        assert_eq!(Cell::parse("98.26 (0.23)"), Some((98.26, Some(0.23))));
        assert_eq!(Cell::parse("98.26"), Some((98.26, None)));
    }

    #[test]
    fn report_layout() {
        let f1 = per_tag_f1(&["N", "N", "PUNC", "V~PRO"], &["N", "V", "PUNC", "V~PRO"]).unwrap();
        let f2 = per_tag_f1(&["N", "N", "N", "PUNC"], &["N", "N", "N", "PUNC"]).unwrap();
        let r = aggregate_folds(&[f1, f2]);
        let labels: Vec<&str> = r.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["Total", "no PUNC", "tilde", "N", "PUNC", "V~PRO"]);
        assert_eq!(r.rows[2].count, 1.0);
        assert_eq!(r.rows[2].f1.unwrap().n, 1);
        assert_eq!(r.rows[3].count, 2.5);
        assert!(r.render().contains("Total"));
        assert_eq!(r.to_tsv().lines().count(), 7);
    }
}
