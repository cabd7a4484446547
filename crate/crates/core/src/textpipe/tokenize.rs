use std::collections::HashSet;
use std::sync::OnceLock;

use thiserror::Error;

const BUILTIN_PUNCTUATION: &str = include_str!("../../data/punctuation.tsv");

#[derive(Debug, Error)]
pub enum PunctuationError {
    #[error("punctuation line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("reading punctuation table: {0}")]
    Io(#[from] std::io::Error),
}

/// Whitespace tokenizer that detaches a closed set of punctuation marks.
///
/// Apostrophes and hyphens stay inside words. Every period is detached,
/// including periods that end abbreviations. A run of three or more
/// periods is kept as a single ellipsis token.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    marks: HashSet<char>,
    terminators: HashSet<char>,
}

impl Tokenizer {
    pub fn builtin() -> &'static Tokenizer {
        static TOK: OnceLock<Tokenizer> = OnceLock::new();
        TOK.get_or_init(|| Tokenizer::parse(BUILTIN_PUNCTUATION).expect("builtin punctuation is valid"))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, PunctuationError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, PunctuationError> {
        let mut marks = HashSet::new();
        let mut terminators = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |msg: &str| PunctuationError::Malformed {
                line: i + 1,
                msg: msg.to_string(),
            };
            let (mark, role) = line.split_once('\t').ok_or_else(|| malformed("expected 2 columns"))?;
            let mut chars = mark.chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_punctuation() => c,
                _ => return Err(malformed("mark must be one ascii punctuation character")),
            };
            if c == '\'' || c == '-' {
                return Err(malformed("apostrophes and hyphens are never split"));
            }
            match role.trim() {
                "terminator" => {
                    terminators.insert(c);
                }
                "punctuation" => {}
                _ => return Err(malformed("role must be terminator or punctuation")),
            }
            marks.insert(c);
        }
        Ok(Tokenizer { marks, terminators })
    }

    pub fn is_mark(&self, c: char) -> bool {
        self.marks.contains(&c)
    }

    /// True for single-character terminator tokens; an ellipsis is not one.
    pub fn is_terminator(&self, token: &str) -> bool {
        let mut chars = token.chars();
        matches!((chars.next(), chars.next()), (Some(c), None) if self.terminators.contains(&c))
    }

    pub fn tokenize(&self, line: &str) -> Vec<String> {
        let mut out = Vec::new();
        for chunk in line.split_whitespace() {
            let chars: Vec<char> = chunk.chars().collect();
            let mut word = String::new();
            let mut i = 0;
            while i < chars.len() {
                let c = chars[i];
                if !self.is_mark(c) {
                    word.push(c);
                    i += 1;
                    continue;
                }
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                let run = chars[i..].iter().take_while(|&&d| d == '.').count();
                if c == '.' && run >= 3 {
                    out.push(chars[i..i + run].iter().collect());
                    i += run;
                } else {
                    out.push(c.to_string());
                    i += 1;
                }
            }
            if !word.is_empty() {
                out.push(word);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tok(s: &str) -> Vec<String> {
        Tokenizer::builtin().tokenize(s)
    }

    #[test]
    fn detaches_final_period() {
        assert_eq!(tok("bwFx."), ["bwFx", "."]);
    }

    #[test]
    fn keeps_apostrophes_and_hyphens() {
        assert_eq!(tok("AmT'Fn"), ["AmT'Fn"]);
        assert_eq!(tok("Ar Fc-yZSrAl,"), ["Ar", "Fc-yZSrAl", ","]);
    }

    #[test]
    fn whitespace_split() {
        assert_eq!(tok("a b"), ["a", "b"]);
        assert!(tok("   ").is_empty());
    }

    #[test]
    fn abbreviation_period_is_split_anyway() {
        assert_eq!(tok("d.r. x"), ["d", ".", "r", ".", "x"]);
    }

    #[test]
    fn quotes_and_parens() {
        assert_eq!(tok("{a} (b)!"), ["{", "a", "}", "(", "b", ")", "!"]);
        assert_eq!(tok("a...."), ["a", "...."]);
        assert_eq!(tok("a.."), ["a", ".", "."]);
    }

    #[test]
    fn table_rejects_apostrophe() {
        assert!(Tokenizer::parse("'\tpunctuation\n").is_err());
    }

    proptest! {
        #[test]
        fn idempotent_on_rejoined_output(s in "[Abdlmn'.,?!:;(){} \\-]{0,40}") {
            let once = tok(&s);
            let twice = tok(&once.join(" "));
            prop_assert_eq!(once, twice);
        }
    }
}
