//! The free metabelian group of rank m inside `Z^m wr Z^m`.
//!
//! Words are written with `x1 x2 ...` for generators and `X1 X2 ...` for their
//! inverses; `[u,v]` is `u v u^-1 v^-1`, `(u)` groups, and `^k` raises a letter,
//! bracket or group to an integer power.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::conjugacy::{conj_abelian_a_wreath, ConjVerdict};
use crate::error::{Error, Result};
use crate::groups::{Elem, Group};
use crate::wreath::{WreathElement, WreathProduct};

pub const WORD_GRAMMAR: &str =
    "word := factor*; factor := atom ['^' int]; atom := x<i> | X<i> | 1 | '[' word ',' word ']' | '(' word ')'";

/// A freely reduced word; letters are (generator index from 1, +1 or -1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeWord {
    rank: usize,
    letters: Vec<(u32, i8)>,
}

impl FreeWord {
    pub fn new(rank: usize, letters: Vec<(u32, i8)>) -> Result<FreeWord> {
        for &(g, s) in &letters {
            if g == 0 || g as usize > rank || (s != 1 && s != -1) {
                return Err(Error::InvalidElement(format!("letter ({g},{s}) in rank {rank}")));
            }
        }
        let mut w = FreeWord {
            rank,
            letters: Vec::new(),
        };
        w.push_all(letters);
        Ok(w)
    }

    pub fn identity(rank: usize) -> FreeWord {
        FreeWord {
            rank,
            letters: Vec::new(),
        }
    }

    /// The generator `x_i`, counted from 1.
    pub fn generator(rank: usize, i: u32) -> Result<FreeWord> {
        FreeWord::new(rank, vec![(i, 1)])
    }

    fn push_all(&mut self, letters: impl IntoIterator<Item = (u32, i8)>) {
        for (g, s) in letters {
            match self.letters.last() {
                Some(&(h, t)) if h == g && t == -s => {
                    self.letters.pop();
                }
                _ => self.letters.push((g, s)),
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[(u32, i8)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn with_rank(mut self, rank: usize) -> FreeWord {
        self.rank = self.rank.max(rank);
        self
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.clone().with_rank(other.rank);
        out.push_all(other.letters.iter().copied());
        out
    }

    pub fn inv(&self) -> FreeWord {
        FreeWord {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|&(g, s)| (g, -s)).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> FreeWord {
        let base = if k < 0 { self.inv() } else { self.clone() };
        let mut out = FreeWord::identity(self.rank);
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `u v u^-1 v^-1`
    pub fn commutator(u: &FreeWord, v: &FreeWord) -> FreeWord {
        u.mul(v).mul(&u.inv()).mul(&v.inv())
    }

    /// `u w u^-1`
    pub fn conjugate_by(&self, u: &FreeWord) -> FreeWord {
        u.mul(self).mul(&u.inv())
    }

    pub fn exponent_sums(&self) -> Vec<i64> {
        let mut out = vec![0; self.rank];
        for &(g, s) in &self.letters {
            out[g as usize - 1] += s as i64;
        }
        out
    }

    /// Parses a word; the rank is the larger of `min_rank` and the largest index used.
    pub fn parse(s: &str, min_rank: usize) -> Result<FreeWord> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let w = p.word()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected character"));
        }
        Ok(w.with_rank(min_rank))
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|&(g, s)| if s > 0 { format!("x{g}") } else { format!("X{g}") })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for FreeWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<FreeWord> {
        FreeWord::parse(s, 1)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at column {} in word", self.pos + 1))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_whitespace() || self.src[self.pos] == b'*') {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<i64> {
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("expected a number"))
    }

    fn word(&mut self) -> Result<FreeWord> {
        let mut out = FreeWord::identity(1);
        while let Some(c) = self.peek() {
            if matches!(c, b',' | b']' | b')') {
                break;
            }
            let f = self.factor()?;
            out = out.mul(&f);
        }
        Ok(out)
    }

    fn factor(&mut self) -> Result<FreeWord> {
        let atom = match self.peek() {
            Some(c @ (b'x' | b'X')) => {
                self.pos += 1;
                let i = self.number()?;
                if i < 1 || i > u32::MAX as i64 {
                    return Err(self.err("generator index must be positive"));
                }
                let s = if c == b'x' { 1 } else { -1 };
                FreeWord::new(i as usize, vec![(i as u32, s)])?
            }
            Some(b'1') => {
                self.pos += 1;
                FreeWord::identity(1)
            }
            Some(b'[') => {
                self.pos += 1;
                let u = self.word()?;
                if self.peek() != Some(b',') {
                    return Err(self.err("expected ','"));
                }
                self.pos += 1;
                let v = self.word()?;
                if self.peek() != Some(b']') {
                    return Err(self.err("expected ']'"));
                }
                self.pos += 1;
                FreeWord::commutator(&u, &v)
            }
            Some(b'(') => {
                self.pos += 1;
                let u = self.word()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                u
            }
            _ => return Err(self.err("expected x<i>, X<i>, '[' or '('")),
        };
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.number()?;
            return Ok(atom.pow(k));
        }
        Ok(atom)
    }
}

/// `Z^m wr Z^m`, the target of the embedding.
pub fn magnus_group(m: usize) -> WreathProduct {
    WreathProduct::new(Group::free_abelian(m), Group::free_abelian(m))
}

fn unit(m: usize, i: usize, s: i64) -> Vec<i64> {
    let mut v = vec![0; m];
    v[i] = s;
    v
}

/// Image of `w` under `x_i -> ({0 -> e_i}, a_i)`.
pub fn magnus_embed(w: &FreeWord) -> WreathElement {
    let m = w.rank();
    let mut pos = vec![0i64; m];
    let mut base: BTreeMap<Vec<i64>, Vec<i64>> = BTreeMap::new();
    for &(g, s) in w.letters() {
        let i = g as usize - 1;
        if s < 0 {
            pos[i] -= 1;
        }
        let slot = base.entry(pos.clone()).or_insert_with(|| vec![0; m]);
        for (a, b) in slot.iter_mut().zip(unit(m, i, s as i64)) {
            *a += b;
        }
        if s > 0 {
            pos[i] += 1;
        }
    }
    let pairs = base
        .into_iter()
        .filter(|(_, v)| v.iter().any(|&c| c != 0))
        .map(|(k, v)| (Elem::from_slice(&k), Elem::from_slice(&v)))
        .collect();
    WreathElement::new(pairs, Elem::from_slice(&pos))
}

pub fn metabelian_is_identity(w: &FreeWord) -> bool {
    let x = magnus_embed(w);
    x.base.is_empty() && x.top.as_slice().iter().all(|&c| c == 0)
}

/// Decides conjugacy of the images of `w1` and `w2` in the free metabelian group.
pub fn metabelian_conjugate(w1: &FreeWord, w2: &FreeWord) -> Result<ConjVerdict> {
    let m = w1.rank().max(w2.rank());
    let (w1, w2) = (w1.clone().with_rank(m), w2.clone().with_rank(m));
    conj_abelian_a_wreath(&magnus_group(m), &magnus_embed(&w1), &magnus_embed(&w2))
}
