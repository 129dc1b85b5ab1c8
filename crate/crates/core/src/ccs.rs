//! A small CCS frontend: parsing and operational expansion into an [`Lts`].
//!
//! Supported operators are inaction `0`, action prefix `a.P` / `'a.P` /
//! `tau.P`, choice `P + Q`, parallel composition `P | Q`, restriction
//! `P \ {a, b}` and references to named definitions. Relabeling and
//! replication are not supported.
//!
//! Names of process definitions start with an upper-case letter. A bare
//! lower-case identifier (or a bare co-action `'a`) in process position is
//! shorthand for `a.0`, so `pl.sp.aEats` reads as `pl.sp.aEats.0`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::lts::{Lts, LtsBuilder, TAU_NAME};

/// Default cap on explored states.
pub const DEFAULT_STATE_BOUND: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CcsError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unbound process name `{name}`")]
    Unbound {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: co-action `'{name}` in restriction set (restrict the channel `{name}` instead)")]
    CoactionInRestriction {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: `{name}` defined twice")]
    Redefined {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("unknown root process `{0}`")]
    UnknownRoot(String),
    #[error("state-space bound exceeded: more than {0} states reachable")]
    BoundExceeded(usize),
    #[error("unguarded recursion through `{0}`")]
    UnguardedRecursion(String),
}

/// An action label: silent, input-style name `a`, or co-name `'a`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Act {
    Tau,
    Name(String),
    CoName(String),
}

impl Act {
    pub fn channel(&self) -> Option<&str> {
        match self {
            Act::Tau => None,
            Act::Name(c) | Act::CoName(c) => Some(c),
        }
    }

    fn complements(&self, other: &Act) -> bool {
        matches!((self, other),
            (Act::Name(a), Act::CoName(b)) | (Act::CoName(a), Act::Name(b)) if a == b)
    }
}

impl fmt::Display for Act {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Act::Tau => write!(f, "{TAU_NAME}"),
            Act::Name(a) => write!(f, "{a}"),
            Act::CoName(a) => write!(f, "'{a}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Nil,
    Prefix(Act, Box<Term>),
    Choice(Box<Term>, Box<Term>),
    Parallel(Box<Term>, Box<Term>),
    Restrict(Box<Term>, BTreeSet<String>),
    Name(String),
}

impl fmt::Display for Term {
    /// Fully parenthesized form, used as the canonical state name.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Nil => write!(f, "0"),
            Term::Prefix(a, t) => write!(f, "{a}.{t}"),
            Term::Choice(l, r) => write!(f, "({l}+{r})"),
            Term::Parallel(l, r) => write!(f, "({l}|{r})"),
            Term::Restrict(t, set) => {
                let chans: Vec<&str> = set.iter().map(String::as_str).collect();
                write!(f, "({t}\\{{{}}})", chans.join(","))
            }
            Term::Name(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CcsProgram {
    definitions: BTreeMap<String, Term>,
    order: Vec<String>,
}

impl CcsProgram {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.definitions.get(name)
    }

    /// Definition names in source order.
    pub fn names(&self) -> &[String] {
        &self.order
    }

    pub fn definitions(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.order
            .iter()
            .map(move |n| (n.as_str(), &self.definitions[n]))
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Zero,
    Dot,
    Plus,
    Bar,
    Backslash,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Eq,
    Quote,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Zero => write!(f, "`0`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Bar => write!(f, "`|`"),
            Tok::Backslash => write!(f, "`\\`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Quote => write!(f, "`'`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, CcsError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&d) = chars.peek() {
                if d == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    s.push(d);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            if s == "0" {
                out.push((Tok::Zero, pos));
            } else if s.starts_with(|d: char| d.is_ascii_digit()) {
                return Err(CcsError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    message: format!("identifier `{s}` must not start with a digit"),
                });
            } else {
                out.push((Tok::Ident(s), pos));
            }
            continue;
        }
        let tok = match c {
            '.' => Tok::Dot,
            '+' => Tok::Plus,
            '|' => Tok::Bar,
            '\\' => Tok::Backslash,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '\'' => Tok::Quote,
            other => {
                return Err(CcsError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        chars.next();
        col += 1;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    references: Vec<(String, Pos)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: String) -> Result<T, CcsError> {
        let p = self.pos();
        Err(CcsError::Syntax {
            line: p.line,
            col: p.col,
            message,
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), CcsError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<String, CcsError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {other}")),
        }
    }

    fn term(&mut self) -> Result<Term, CcsError> {
        let mut t = self.par()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let r = self.par()?;
            t = Term::Choice(Box::new(t), Box::new(r));
        }
        Ok(t)
    }

    fn par(&mut self) -> Result<Term, CcsError> {
        let mut t = self.restr()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let r = self.restr()?;
            t = Term::Parallel(Box::new(t), Box::new(r));
        }
        Ok(t)
    }

    fn restr(&mut self) -> Result<Term, CcsError> {
        let mut t = self.prefix()?;
        while *self.peek() == Tok::Backslash {
            self.bump();
            self.expect(Tok::LBrace)?;
            let mut set = BTreeSet::new();
            loop {
                if *self.peek() == Tok::Quote {
                    let p = self.pos();
                    self.bump();
                    let name = self.ident()?;
                    return Err(CcsError::CoactionInRestriction {
                        name,
                        line: p.line,
                        col: p.col,
                    });
                }
                let name = self.ident()?;
                if name == TAU_NAME {
                    return self.error("`tau` cannot be restricted".into());
                }
                set.insert(name);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
            t = Term::Restrict(Box::new(t), set);
        }
        Ok(t)
    }

    fn action(&mut self) -> Result<Act, CcsError> {
        if *self.peek() == Tok::Quote {
            self.bump();
            let name = self.ident()?;
            if name == TAU_NAME {
                return self.error("`tau` has no co-action".into());
            }
            Ok(Act::CoName(name))
        } else {
            let name = self.ident()?;
            Ok(if name == TAU_NAME {
                Act::Tau
            } else {
                Act::Name(name)
            })
        }
    }

    fn prefix(&mut self) -> Result<Term, CcsError> {
        let mut acts = Vec::new();
        let atom = loop {
            match self.peek().clone() {
                Tok::Quote => {
                    let a = self.action()?;
                    if *self.peek() == Tok::Dot {
                        self.bump();
                        acts.push(a);
                    } else {
                        break Term::Prefix(a, Box::new(Term::Nil));
                    }
                }
                Tok::Ident(name) => {
                    if *self.peek2() == Tok::Dot {
                        let a = self.action()?;
                        self.bump();
                        acts.push(a);
                    } else if is_process_name(&name) {
                        let p = self.pos();
                        self.bump();
                        self.references.push((name.clone(), p));
                        break Term::Name(name);
                    } else {
                        let a = self.action()?;
                        break Term::Prefix(a, Box::new(Term::Nil));
                    }
                }
                Tok::Zero => {
                    self.bump();
                    break Term::Nil;
                }
                Tok::LParen => {
                    self.bump();
                    let t = self.term()?;
                    self.expect(Tok::RParen)?;
                    break t;
                }
                other => return self.error(format!("expected a process, found {other}")),
            }
        };
        Ok(acts
            .into_iter()
            .rev()
            .fold(atom, |t, a| Term::Prefix(a, Box::new(t))))
    }
}

fn is_process_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase())
}

/// Parses a sequence of `Name = term` definitions.
pub fn parse_ccs(text: &str) -> Result<CcsProgram, CcsError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        references: Vec::new(),
    };
    let mut prog = CcsProgram::default();
    let mut def_pos = HashMap::new();
    while *p.peek() != Tok::Eof {
        let pos = p.pos();
        let name = p.ident()?;
        if !is_process_name(&name) {
            return Err(CcsError::Syntax {
                line: pos.line,
                col: pos.col,
                message: format!("definition name `{name}` must start with an upper-case letter"),
            });
        }
        p.expect(Tok::Eq)?;
        let body = p.term()?;
        if def_pos.insert(name.clone(), pos).is_some() {
            return Err(CcsError::Redefined {
                name,
                line: pos.line,
                col: pos.col,
            });
        }
        prog.order.push(name.clone());
        prog.definitions.insert(name, body);
    }
    for (name, pos) in &p.references {
        if !prog.definitions.contains_key(name) {
            return Err(CcsError::Unbound {
                name: name.clone(),
                line: pos.line,
                col: pos.col,
            });
        }
    }
    Ok(prog)
}

impl CcsProgram {
    /// Outgoing SOS steps of `t`.
    pub fn steps(&self, t: &Term) -> Result<Vec<(Act, Term)>, CcsError> {
        self.steps_at(t, &mut Vec::new())
    }

    // `unfolding` holds the names expanded since the last prefix; meeting one
    // of them again means the recursion is unguarded.
    fn steps_at<'a>(
        &'a self,
        t: &Term,
        unfolding: &mut Vec<&'a str>,
    ) -> Result<Vec<(Act, Term)>, CcsError> {
        Ok(match t {
            Term::Nil => Vec::new(),
            Term::Prefix(a, cont) => vec![(a.clone(), (**cont).clone())],
            Term::Choice(l, r) => {
                let mut s = self.steps_at(l, unfolding)?;
                s.extend(self.steps_at(r, unfolding)?);
                s
            }
            Term::Parallel(l, r) => {
                let ls = self.steps_at(l, unfolding)?;
                let rs = self.steps_at(r, unfolding)?;
                let mut s = Vec::new();
                for (a, l2) in &ls {
                    s.push((a.clone(), Term::Parallel(Box::new(l2.clone()), r.clone())));
                }
                for (b, r2) in &rs {
                    s.push((b.clone(), Term::Parallel(l.clone(), Box::new(r2.clone()))));
                }
                for (a, l2) in &ls {
                    for (b, r2) in &rs {
                        if a.complements(b) {
                            s.push((
                                Act::Tau,
                                Term::Parallel(Box::new(l2.clone()), Box::new(r2.clone())),
                            ));
                        }
                    }
                }
                s
            }
            Term::Restrict(inner, set) => self
                .steps_at(inner, unfolding)?
                .into_iter()
                .filter(|(a, _)| a.channel().is_none_or(|c| !set.contains(c)))
                .map(|(a, t2)| (a, Term::Restrict(Box::new(t2), set.clone())))
                .collect(),
            Term::Name(n) => {
                let (name, body) = self
                    .definitions
                    .get_key_value(n)
                    .ok_or_else(|| CcsError::UnknownRoot(n.clone()))?;
                if unfolding.contains(&name.as_str()) {
                    return Err(CcsError::UnguardedRecursion(n.clone()));
                }
                unfolding.push(name);
                let s = self.steps_at(body, unfolding);
                unfolding.pop();
                s?
            }
        })
    }
}

/// Expands the fragment reachable from `roots` into an [`Lts`].
///
/// Roots are named after their definitions; every other state is named by
/// its fully parenthesized term. Exploration is breadth-first with
/// successors in SOS order, so the result is deterministic.
pub fn expand_lts(prog: &CcsProgram, roots: &[&str], bound: usize) -> Result<Lts, CcsError> {
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut terms: Vec<Term> = Vec::new();
    let mut queue = VecDeque::new();
    let mut b = LtsBuilder::new();
    for root in roots {
        if prog.get(root).is_none() {
            return Err(CcsError::UnknownRoot(root.to_string()));
        }
        let t = Term::Name(root.to_string());
        if !index.contains_key(&t) {
            index.insert(t.clone(), terms.len());
            b.process(&t.to_string());
            terms.push(t.clone());
            queue.push_back(t);
        }
    }
    if terms.len() > bound {
        return Err(CcsError::BoundExceeded(bound));
    }
    while let Some(t) = queue.pop_front() {
        let src = t.to_string();
        for (a, t2) in prog.steps(&t)? {
            if !index.contains_key(&t2) {
                if terms.len() >= bound {
                    return Err(CcsError::BoundExceeded(bound));
                }
                index.insert(t2.clone(), terms.len());
                b.process(&t2.to_string());
                terms.push(t2.clone());
                queue.push_back(t2.clone());
            }
            b.transition(&src, &a.to_string(), &t2.to_string());
        }
    }
    Ok(b.build())
}
