//! A small s-expression reader that remembers where every datum started.

use crate::error::{Error, Result};
use crate::trees::{cl_tr, FiniteTree, Seq};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom { text: String, pos: Pos },
    List { items: Vec<Sexp>, pos: Pos },
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom { pos, .. } | Sexp::List { pos, .. } => *pos,
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        let p = self.pos();
        Error::Parse { line: p.line, col: p.col, msg: msg.into() }
    }

    pub fn atom(&self) -> Result<&str> {
        match self {
            Sexp::Atom { text, .. } => Ok(text),
            Sexp::List { .. } => Err(self.error("expected an atom")),
        }
    }

    pub fn nat(&self) -> Result<u64> {
        self.atom()?
            .parse()
            .map_err(|_| self.error("expected a natural number"))
    }

    pub fn items(&self) -> Result<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Ok(items),
            Sexp::Atom { .. } => Err(self.error("expected a list")),
        }
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Sexp::List { items, .. } => match items.first() {
                Some(Sexp::Atom { text, .. }) => Some(text),
                _ => None,
            },
            Sexp::Atom { .. } => None,
        }
    }

    /// The arguments of a list `(head ...)`, or a positioned error naming what was expected.
    pub fn form(&self, head: &str) -> Result<&[Sexp]> {
        if self.head() == Some(head) {
            Ok(&self.items()?[1..])
        } else {
            Err(self.error(format!("expected ({head} ...)")))
        }
    }
}

pub trait FromSexp: Sized {
    fn from_sexp(sexp: &Sexp) -> Result<Self>;
}

/// Parses exactly one datum from `text` into `T`.
pub fn parse<T: FromSexp>(text: &str) -> Result<T> {
    T::from_sexp(&read(text)?)
}

pub fn read(text: &str) -> Result<Sexp> {
    let mut reader = Reader::new(text);
    reader.skip_blank();
    let datum = reader.datum()?;
    reader.skip_blank();
    if let Some(p) = reader.peek_pos() {
        return Err(Error::Parse { line: p.line, col: p.col, msg: "trailing input after datum".into() });
    }
    Ok(datum)
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn here(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek_pos(&mut self) -> Option<Pos> {
        self.chars.peek().map(|_| Pos { line: self.line, col: self.col })
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn datum(&mut self) -> Result<Sexp> {
        let pos = self.here();
        let fail = |msg: &str| Error::Parse { line: pos.line, col: pos.col, msg: msg.into() };
        match self.chars.peek() {
            None => Err(fail("unexpected end of input")),
            Some(')') => Err(fail("unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => return Err(fail("unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List { items, pos });
                        }
                        Some(_) => items.push(self.datum()?),
                    }
                }
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Sexp::Atom { text, pos })
            }
        }
    }
}

impl FromSexp for Seq {
    fn from_sexp(sexp: &Sexp) -> Result<Self> {
        let args = sexp.form("seq")?;
        Ok(Seq::new(args.iter().map(Sexp::nat).collect::<Result<_>>()?))
    }
}

impl FromSexp for FiniteTree {
    fn from_sexp(sexp: &Sexp) -> Result<Self> {
        let args = sexp.form("tree")?;
        Ok(cl_tr(args.iter().map(Seq::from_sexp).collect::<Result<Vec<_>>>()?))
    }
}
