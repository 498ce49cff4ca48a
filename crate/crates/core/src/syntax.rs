//! Text forms for groups and elements.
//!
//! Groups: `Z`, `Z^m`, `Z/n`, `H`, `H(Z/k)`, `S3`, products `A x B`, and one
//! outer `A wr B`; parentheses group. Elements: `5`, `(2,3)`, `3 mod 5`,
//! `H(a,b,c)`; wreath elements `{<B>: <A>, ...}@<B>`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groups::{Elem, Group};
use crate::wreath::{WreathElement, WreathProduct};

pub const GROUP_GRAMMAR: &str = "group := factor ['wr' factor]; factor := atom ('x' atom)*; \
atom := Z | Z^m | Z/n | H | H(Z/k) | S3 | '(' factor ')'";
pub const ELEMENT_GRAMMAR: &str = "element := int | '(' int, ... ')' | int 'mod' n | 'H(' a,b,c ')'; \
wreath element := '{' [B-elt ':' A-elt {, ...}] '}' '@' B-elt";

#[derive(Debug, Clone)]
pub enum GroupSpec {
    Plain(Arc<Group>),
    Wreath(WreathProduct),
}

impl GroupSpec {
    pub fn label(&self) -> String {
        match self {
            GroupSpec::Plain(g) => g.label().to_string(),
            GroupSpec::Wreath(w) => w.to_string(),
        }
    }

    pub fn as_wreath(&self) -> Result<&WreathProduct> {
        match self {
            GroupSpec::Wreath(w) => Ok(w),
            GroupSpec::Plain(g) => Err(Error::UnsupportedDescriptor(format!(
                "{} is not a wreath product",
                g.label()
            ))),
        }
    }

    pub fn as_plain(&self) -> Result<&Arc<Group>> {
        match self {
            GroupSpec::Plain(g) => Ok(g),
            GroupSpec::Wreath(w) => Err(Error::UnsupportedDescriptor(format!("{w} is a wreath product"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Num(u64),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = cs[start..i].iter().collect();
            out.push(Tok::Num(
                t.parse().map_err(|_| Error::Parse(format!("number too large: {t}")))?,
            ));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < cs.len() && cs[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Word(cs[start..i].iter().collect()));
        } else if "()/^".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!(
                "unexpected '{c}' in group; expected {GROUP_GRAMMAR}"
            )));
        }
    }
    Ok(out)
}

struct GroupParser {
    toks: Vec<Tok>,
    pos: usize,
}

impl GroupParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "expected {t:?} in group; grammar: {GROUP_GRAMMAR}"
            )))
        }
    }

    fn num(&mut self) -> Result<u64> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(Error::Parse(format!(
                "expected a number in group; grammar: {GROUP_GRAMMAR}"
            ))),
        }
    }

    fn group(&mut self) -> Result<GroupSpec> {
        let a = self.factor()?;
        if self.eat(&Tok::Word("wr".into())) {
            let b = self.factor()?;
            if self.peek().is_some() {
                return Err(Error::UnsupportedDescriptor("iterated wreath products".into()));
            }
            return Ok(GroupSpec::Wreath(WreathProduct::new(a, b)));
        }
        Ok(GroupSpec::Plain(a))
    }

    fn factor(&mut self) -> Result<Arc<Group>> {
        let mut parts = vec![self.atom()?];
        while self.eat(&Tok::Word("x".into())) {
            parts.push(self.atom()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Group::product(parts)
        })
    }

    fn atom(&mut self) -> Result<Arc<Group>> {
        let t = self.peek().cloned();
        self.pos += 1;
        match t {
            Some(Tok::Sym('(')) => {
                let g = self.factor()?;
                self.expect(Tok::Sym(')'))?;
                Ok(g)
            }
            Some(Tok::Word(w)) if w == "Z" => {
                if self.eat(&Tok::Sym('/')) {
                    let n = self.num()?;
                    if n == 0 {
                        return Err(Error::Parse("Z/0 is not allowed; write Z".into()));
                    }
                    Ok(Group::cyclic(n))
                } else if self.eat(&Tok::Sym('^')) {
                    let m = self.num()?;
                    if m == 0 {
                        return Ok(Group::cyclic(1));
                    }
                    Ok(Group::free_abelian(m as usize))
                } else {
                    Ok(Group::free_abelian(1))
                }
            }
            Some(Tok::Word(w)) if w == "H" => {
                if self.eat(&Tok::Sym('(')) {
                    self.expect(Tok::Word("Z".into()))?;
                    self.expect(Tok::Sym('/'))?;
                    let k = self.num()?;
                    self.expect(Tok::Sym(')'))?;
                    if k == 0 {
                        return Err(Error::Parse("H(Z/0) is not allowed; write H".into()));
                    }
                    Ok(Group::heisenberg_mod(k))
                } else {
                    Ok(Group::heisenberg())
                }
            }
            Some(Tok::Word(w)) if w == "S3" => Ok(Group::symmetric3()),
            other => Err(Error::Parse(format!(
                "unexpected {other:?} in group; grammar: {GROUP_GRAMMAR}"
            ))),
        }
    }
}

pub fn parse_group(s: &str) -> Result<GroupSpec> {
    let mut p = GroupParser { toks: lex(s)?, pos: 0 };
    let g = p.group()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!(
            "trailing input in group '{s}'; grammar: {GROUP_GRAMMAR}"
        )));
    }
    Ok(g)
}

/// Splits at commas not nested in brackets.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_int(s: &str) -> Result<i64> {
    s.trim().parse().map_err(|_| {
        Error::Parse(format!(
            "expected an integer, got '{}'; grammar: {ELEMENT_GRAMMAR}",
            s.trim()
        ))
    })
}

fn raw_coords(s: &str) -> Result<Vec<i64>> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix("H(").and_then(|r| r.strip_suffix(')')) {
        return split_top(inner, ',').into_iter().map(parse_int).collect();
    }
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let mut out = Vec::new();
        for part in split_top(inner, ',') {
            out.extend(raw_coords(part)?);
        }
        return Ok(out);
    }
    if let Some((v, m)) = s.split_once("mod") {
        let (v, m) = (parse_int(v)?, parse_int(m)?);
        if m <= 0 {
            return Err(Error::Parse(format!("modulus must be positive in '{s}'")));
        }
        return Ok(vec![v.rem_euclid(m)]);
    }
    Ok(vec![parse_int(s)?])
}

pub fn parse_element(g: &Group, s: &str) -> Result<Elem> {
    let raw = raw_coords(s)?;
    let e = g.canonicalize(&raw)?;
    if s.contains("mod") {
        // `v mod m` must name a residue modulo the group's own order
        if let (Some(o), Some((_, m))) = (g.order(), s.split_once("mod")) {
            if parse_int(m)? as u64 != o {
                return Err(Error::InvalidElement(format!(
                    "'{}' is not an element of {}",
                    s.trim(),
                    g.label()
                )));
            }
        }
    }
    Ok(e)
}

pub fn parse_wreath_element(w: &WreathProduct, s: &str) -> Result<WreathElement> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad wreath element '{s}'; grammar: {ELEMENT_GRAMMAR}"));
    let body = s.strip_prefix('{').ok_or_else(bad)?;
    let close = body.find('}').ok_or_else(bad)?;
    let (inner, rest) = (&body[..close], &body[close + 1..]);
    let top = rest.trim().strip_prefix('@').ok_or_else(bad)?;
    let mut pairs = Vec::new();
    if !inner.trim().is_empty() {
        for entry in split_top(inner, ',') {
            let parts = split_top(entry, ':');
            if parts.len() != 2 {
                return Err(bad());
            }
            pairs.push((parse_element(w.acting(), parts[0])?, parse_element(w.base(), parts[1])?));
        }
    }
    w.element(pairs, parse_element(w.acting(), top)?)
}
