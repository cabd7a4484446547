use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unbalanced parentheses at byte {0}")]
    UnbalancedParens(usize),
    #[error("missing node label at byte {0}")]
    EmptyLabel(usize),
    #[error("malformed node at byte {0}")]
    MalformedNode(usize),
}

/// A bracketed parse tree. The outermost node of a treebank entry may have
/// an empty label; every other label is non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Node { label: String, children: Vec<Tree> },
    Leaf { tag: String, word: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Open(usize),
    Close(usize),
    Atom(usize, &'a str),
}

fn lex(text: &str) -> Vec<Tok<'_>> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                toks.push(Tok::Open(i));
                i += 1;
            }
            b')' => {
                toks.push(Tok::Close(i));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !matches!(bytes[i], b'(' | b')') && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                toks.push(Tok::Atom(start, &text[start..i]));
            }
        }
    }
    toks
}

struct Parser<'a> {
    toks: Vec<Tok<'a>>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn node(&mut self, top: bool) -> Result<Tree, ParseError> {
        let Some(Tok::Open(open)) = self.toks.get(self.pos).copied() else {
            unreachable!("node() is called at an opening parenthesis");
        };
        self.pos += 1;
        let label = match self.toks.get(self.pos).copied() {
            Some(Tok::Atom(_, a)) => {
                self.pos += 1;
                a.to_string()
            }
            Some(Tok::Open(at)) if !top => return Err(ParseError::EmptyLabel(at)),
            Some(Tok::Open(_)) => String::new(),
            Some(Tok::Close(at)) => return Err(ParseError::EmptyLabel(at)),
            None => return Err(ParseError::UnbalancedParens(open)),
        };
        match self.toks.get(self.pos).copied() {
            Some(Tok::Atom(_, word)) => {
                self.pos += 1;
                match self.toks.get(self.pos).copied() {
                    Some(Tok::Close(_)) => {
                        self.pos += 1;
                        if label.is_empty() {
                            return Err(ParseError::EmptyLabel(open));
                        }
                        Ok(Tree::Leaf {
                            tag: label,
                            word: word.to_string(),
                        })
                    }
                    None => Err(ParseError::UnbalancedParens(open)),
                    Some(Tok::Open(at) | Tok::Atom(at, _)) => Err(ParseError::MalformedNode(at)),
                }
            }
            Some(Tok::Close(at)) => Err(ParseError::MalformedNode(at)),
            None => Err(ParseError::UnbalancedParens(open)),
            Some(Tok::Open(_)) => {
                let mut children = Vec::new();
                loop {
                    match self.toks.get(self.pos).copied() {
                        Some(Tok::Open(_)) => children.push(self.node(false)?),
                        Some(Tok::Close(_)) => {
                            self.pos += 1;
                            return Ok(Tree::Node { label, children });
                        }
                        Some(Tok::Atom(at, _)) => return Err(ParseError::MalformedNode(at)),
                        None => return Err(ParseError::UnbalancedParens(open)),
                    }
                }
            }
        }
    }
}

/// Parses whitespace-separated bracketed trees.
pub fn parse_trees(text: &str) -> Result<Vec<Tree>, ParseError> {
    let mut p = Parser {
        toks: lex(text),
        pos: 0,
    };
    let mut trees = Vec::new();
    while let Some(&t) = p.toks.get(p.pos) {
        match t {
            Tok::Open(_) => trees.push(p.node(true)?),
            Tok::Close(at) => return Err(ParseError::UnbalancedParens(at)),
            Tok::Atom(at, _) => return Err(ParseError::MalformedNode(at)),
        }
    }
    Ok(trees)
}

impl Tree {
    pub fn label(&self) -> &str {
        match self {
            Tree::Node { label, .. } => label,
            Tree::Leaf { tag, .. } => tag,
        }
    }

    /// Every leaf in document order, including metadata leaves.
    pub fn leaves(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            Tree::Leaf { tag, word } => out.push((tag, word)),
            Tree::Node { children, .. } => children.iter().for_each(|c| c.collect(out)),
        }
    }

    /// The word of an `ID` leaf directly under the root.
    pub fn sentence_id(&self) -> Option<&str> {
        let Tree::Node { children, .. } = self else {
            return None;
        };
        children.iter().find_map(|c| match c {
            Tree::Leaf { tag, word } if tag == "ID" => Some(word.as_str()),
            _ => None,
        })
    }

    pub fn to_bracketed(&self) -> String {
        let mut s = String::new();
        self.write(&mut s);
        s
    }

    fn write(&self, s: &mut String) {
        match self {
            Tree::Leaf { tag, word } => {
                let _ = write!(s, "({tag} {word})");
            }
            Tree::Node { label, children } => {
                s.push('(');
                s.push_str(label);
                for c in children {
                    s.push(' ');
                    c.write(s);
                }
                s.push(')');
            }
        }
    }
}
