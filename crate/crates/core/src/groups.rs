//! Concrete finitely generated groups with canonical element forms.
//!
//! Every element is a flat vector of integer coordinates (`Elem`). The
//! coordinates are always canonical for the owning [`Group`], so two elements
//! are equal as group elements exactly when their payloads are equal.
//!
//! | kind              | payload                                  |
//! |-------------------|------------------------------------------|
//! | `Z/n`             | least nonnegative residue                |
//! | `Z^m`             | the integer vector                       |
//! | `Z/d1 x .. x Z/dk`| residues per factor                      |
//! | products          | concatenated component payloads          |
//! | `H` (Heisenberg)  | `(a, b, c)` for `[[1,a,c],[0,1,b],[0,0,1]]` |
//! | `H(Z/k)`          | the same entries reduced mod `k`         |
//! | `Z^m / L`         | the HNF box representative               |
//! | table             | row index into the multiplication table  |

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::lattice::Hnf;

/// Default bound on the number of elements any enumeration may visit.
pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Elem(pub SmallVec<[i64; 4]>);

impl Elem {
    pub fn from_slice(xs: &[i64]) -> Elem {
        Elem(SmallVec::from_slice(xs))
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// An explicit finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyTable {
    n: usize,
    mul: Vec<u32>,
    identity: u32,
    inverse: Vec<u32>,
    abelian: bool,
}

impl CayleyTable {
    pub fn new(rows: Vec<Vec<u32>>) -> Result<CayleyTable> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidElement("table must be square and nonempty".into()));
        }
        if rows.iter().flatten().any(|&x| x as usize >= n) {
            return Err(Error::InvalidElement("table entry out of range".into()));
        }
        let mul: Vec<u32> = rows.into_iter().flatten().collect();
        let at = |a: usize, b: usize| mul[a * n + b] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or_else(|| Error::InvalidElement("table has no identity".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let h = (0..n)
                .find(|&h| at(g, h) == identity && at(h, g) == identity)
                .ok_or_else(|| Error::InvalidElement(format!("element {g} has no inverse")))?;
            inverse.push(h as u32);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(Error::InvalidElement("table is not associative".into()));
                    }
                }
            }
        }
        let abelian = (0..n).all(|a| (0..n).all(|b| at(a, b) == at(b, a)));
        Ok(CayleyTable {
            n,
            mul,
            identity: identity as u32,
            inverse,
            abelian,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn op(&self, a: i64, b: i64) -> i64 {
        self.mul[a as usize * self.n + b as usize] as i64
    }
}

#[derive(Debug, Clone)]
pub enum GroupKind {
    FiniteCyclic(u64),
    FreeAbelian(usize),
    /// Invariant factors `d_1 | d_2 | ... | d_k`.
    FiniteAbelian(Vec<u64>),
    DirectProduct(Vec<Arc<Group>>),
    HeisenbergZ,
    /// Congruence quotient of the integral Heisenberg group.
    HeisenbergMod(u64),
    /// `Z^m / L` for a full-rank sublattice `L`.
    Lattice(Hnf),
    FiniteTable(Arc<CayleyTable>),
}

#[derive(Debug, Clone)]
pub struct Group {
    kind: GroupKind,
    generators: Vec<Elem>,
    label: String,
    width: usize,
    offsets: Vec<usize>,
}

impl PartialEq for Group {
    fn eq(&self, other: &Group) -> bool {
        self.label == other.label && self.width == other.width && self.generators == other.generators
    }
}

impl Eq for Group {}

fn unit(width: usize, i: usize, v: i64) -> Elem {
    let mut e = Elem(SmallVec::from_elem(0, width));
    e.0[i] = v;
    e
}

impl Group {
    fn build(kind: GroupKind, generators: Vec<Elem>, label: String, width: usize) -> Arc<Group> {
        let offsets = match &kind {
            GroupKind::DirectProduct(parts) => {
                let mut acc = 0;
                parts
                    .iter()
                    .map(|p| {
                        let o = acc;
                        acc += p.width;
                        o
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        Arc::new(Group {
            kind,
            generators,
            label,
            width,
            offsets,
        })
    }

    pub fn cyclic(n: u64) -> Arc<Group> {
        assert!(n >= 1, "cyclic group order must be positive");
        let gens = if n > 1 {
            vec![Elem::from_slice(&[1])]
        } else {
            Vec::new()
        };
        Group::build(GroupKind::FiniteCyclic(n), gens, format!("Z/{n}"), 1)
    }

    pub fn free_abelian(m: usize) -> Arc<Group> {
        let gens = (0..m).map(|i| unit(m, i, 1)).collect();
        let label = match m {
            1 => "Z".to_string(),
            _ => format!("Z^{m}"),
        };
        Group::build(GroupKind::FreeAbelian(m), gens, label, m)
    }

    pub fn finite_abelian(factors: Vec<u64>) -> Result<Arc<Group>> {
        if factors.iter().any(|&d| d < 1) || factors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidElement(format!(
                "invariant factors must divide each other: {factors:?}"
            )));
        }
        let k = factors.len();
        let gens = (0..k).filter(|&i| factors[i] > 1).map(|i| unit(k, i, 1)).collect();
        let label = factors.iter().map(|d| format!("Z/{d}")).collect::<Vec<_>>().join(" x ");
        Ok(Group::build(GroupKind::FiniteAbelian(factors), gens, label, k))
    }

    pub fn product(parts: Vec<Arc<Group>>) -> Arc<Group> {
        let width: usize = parts.iter().map(|p| p.width).sum();
        let ids: Vec<Elem> = parts.iter().map(|p| p.identity()).collect();
        // each factor generator, padded with the identities of the other factors
        let mut gens = Vec::new();
        for (pi, p) in parts.iter().enumerate() {
            for g in &p.generators {
                let mut e = Elem::default();
                for (qi, id) in ids.iter().enumerate() {
                    let src = if qi == pi { g } else { id };
                    e.0.extend_from_slice(src.as_slice());
                }
                gens.push(e);
            }
        }
        let label = parts
            .iter()
            .map(|p| match p.kind {
                GroupKind::DirectProduct(_) | GroupKind::FiniteAbelian(_) => format!("({})", p.label),
                _ => p.label.clone(),
            })
            .collect::<Vec<_>>()
            .join(" x ");
        Group::build(GroupKind::DirectProduct(parts), gens, label, width)
    }

    pub fn heisenberg() -> Arc<Group> {
        let gens = vec![Elem::from_slice(&[1, 0, 0]), Elem::from_slice(&[0, 1, 0])];
        Group::build(GroupKind::HeisenbergZ, gens, "H".into(), 3)
    }

    pub fn heisenberg_mod(k: u64) -> Arc<Group> {
        assert!(k >= 1);
        let gens = if k > 1 {
            vec![Elem::from_slice(&[1, 0, 0]), Elem::from_slice(&[0, 1, 0])]
        } else {
            Vec::new()
        };
        Group::build(GroupKind::HeisenbergMod(k), gens, format!("H(Z/{k})"), 3)
    }

    pub fn lattice_quotient(hnf: Hnf) -> Arc<Group> {
        let m = hnf.rank();
        let mut gens: Vec<Elem> = Vec::new();
        for i in 0..m {
            let mut v = vec![0; m];
            v[i] = 1;
            let r = hnf.reduce(&v);
            let e = Elem::from_slice(&r);
            if r.iter().any(|&x| x != 0) && !gens.contains(&e) {
                gens.push(e);
            }
        }
        let label = format!("Z^{m}/{hnf}");
        Group::build(GroupKind::Lattice(hnf), gens, label, m)
    }

    pub fn table(table: CayleyTable, generators: Vec<u32>, label: &str) -> Result<Arc<Group>> {
        if generators.iter().any(|&g| g as usize >= table.len()) {
            return Err(Error::InvalidElement("generator out of range".into()));
        }
        let gens = generators.iter().map(|&g| Elem::from_slice(&[g as i64])).collect();
        let g = Group::build(GroupKind::FiniteTable(Arc::new(table)), gens, label.into(), 1);
        // generating set must reach everything
        let reached = g.ball(g.order().unwrap_or(0) as usize, DEFAULT_CAP)?;
        if reached.len() as u64 != g.order().unwrap_or(0) {
            return Err(Error::InvalidElement(
                "generators do not generate the table group".into(),
            ));
        }
        Ok(g)
    }

    /// The symmetric group on three letters, as an explicit table.
    /// Elements are the permutations of `[0,1,2]` in lexicographic order.
    pub fn symmetric3() -> Arc<Group> {
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap() as u32;
        let rows = perms
            .iter()
            .map(|a| perms.iter().map(|b| index([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        let table = CayleyTable::new(rows).expect("S3 table is a group");
        Group::table(table, vec![1, 3], "S3").expect("S3 generators")
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    /// Generators together with their inverses, deduplicated, in a fixed order.
    pub fn symmetric_generators(&self) -> Vec<Elem> {
        let mut out: Vec<Elem> = Vec::new();
        for g in &self.generators {
            for x in [g.clone(), self.inv(g)] {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out
    }

    fn parts(&self) -> Option<&[Arc<Group>]> {
        match &self.kind {
            GroupKind::DirectProduct(p) => Some(p),
            _ => None,
        }
    }

    fn component<'a>(&self, e: &'a [i64], i: usize) -> &'a [i64] {
        let parts = self.parts().expect("product");
        &e[self.offsets[i]..self.offsets[i] + parts[i].width]
    }

    pub fn identity(&self) -> Elem {
        match &self.kind {
            GroupKind::FiniteTable(t) => Elem::from_slice(&[t.identity as i64]),
            GroupKind::DirectProduct(parts) => {
                let mut e = Elem::default();
                for p in parts {
                    e.0.extend_from_slice(p.identity().as_slice());
                }
                e
            }
            _ => Elem(SmallVec::from_elem(0, self.width)),
        }
    }

    pub fn is_identity(&self, e: &Elem) -> bool {
        match &self.kind {
            GroupKind::FiniteTable(t) => e.0[0] == t.identity as i64,
            GroupKind::DirectProduct(parts) => parts
                .iter()
                .enumerate()
                .all(|(i, p)| p.is_identity(&Elem::from_slice(self.component(e.as_slice(), i)))),
            _ => e.0.iter().all(|&x| x == 0),
        }
    }

    /// Product of canonical elements. Both arguments must belong to this group.
    pub fn op(&self, a: &Elem, b: &Elem) -> Elem {
        match &self.kind {
            GroupKind::FiniteCyclic(n) => Elem::from_slice(&[(a.0[0] + b.0[0]) % *n as i64]),
            GroupKind::FreeAbelian(_) => Elem(a.0.iter().zip(b.0.iter()).map(|(x, y)| x + y).collect()),
            GroupKind::FiniteAbelian(d) => Elem(
                a.0.iter()
                    .zip(b.0.iter())
                    .zip(d.iter())
                    .map(|((x, y), m)| (x + y) % *m as i64)
                    .collect(),
            ),
            GroupKind::DirectProduct(parts) => {
                let mut e = Elem::default();
                for (i, p) in parts.iter().enumerate() {
                    let x = Elem::from_slice(self.component(a.as_slice(), i));
                    let y = Elem::from_slice(self.component(b.as_slice(), i));
                    e.0.extend_from_slice(p.op(&x, &y).as_slice());
                }
                e
            }
            GroupKind::HeisenbergZ => {
                Elem::from_slice(&[a.0[0] + b.0[0], a.0[1] + b.0[1], a.0[2] + b.0[2] + a.0[0] * b.0[1]])
            }
            GroupKind::HeisenbergMod(k) => {
                let k = *k as i64;
                Elem::from_slice(&[
                    (a.0[0] + b.0[0]) % k,
                    (a.0[1] + b.0[1]) % k,
                    (a.0[2] + b.0[2] + a.0[0] * b.0[1]) % k,
                ])
            }
            GroupKind::Lattice(h) => {
                let mut v: Vec<i64> = a.0.iter().zip(b.0.iter()).map(|(x, y)| x + y).collect();
                h.reduce_in_place(&mut v);
                Elem::from_slice(&v)
            }
            GroupKind::FiniteTable(t) => Elem::from_slice(&[t.op(a.0[0], b.0[0])]),
        }
    }

    pub fn inv(&self, a: &Elem) -> Elem {
        match &self.kind {
            GroupKind::FiniteCyclic(n) => Elem::from_slice(&[(-a.0[0]).rem_euclid(*n as i64)]),
            GroupKind::FreeAbelian(_) => Elem(a.0.iter().map(|x| -x).collect()),
            GroupKind::FiniteAbelian(d) => Elem(
                a.0.iter()
                    .zip(d.iter())
                    .map(|(x, m)| (-x).rem_euclid(*m as i64))
                    .collect(),
            ),
            GroupKind::DirectProduct(parts) => {
                let mut e = Elem::default();
                for (i, p) in parts.iter().enumerate() {
                    let x = Elem::from_slice(self.component(a.as_slice(), i));
                    e.0.extend_from_slice(p.inv(&x).as_slice());
                }
                e
            }
            GroupKind::HeisenbergZ => Elem::from_slice(&[-a.0[0], -a.0[1], -a.0[2] + a.0[0] * a.0[1]]),
            GroupKind::HeisenbergMod(k) => {
                let k = *k as i64;
                Elem::from_slice(&[
                    (-a.0[0]).rem_euclid(k),
                    (-a.0[1]).rem_euclid(k),
                    (-a.0[2] + a.0[0] * a.0[1]).rem_euclid(k),
                ])
            }
            GroupKind::Lattice(h) => {
                let mut v: Vec<i64> = a.0.iter().map(|x| -x).collect();
                h.reduce_in_place(&mut v);
                Elem::from_slice(&v)
            }
            GroupKind::FiniteTable(t) => Elem::from_slice(&[t.inverse[a.0[0] as usize] as i64]),
        }
    }

    /// `a b a^-1`.
    pub fn conj(&self, a: &Elem, b: &Elem) -> Elem {
        self.op(&self.op(a, b), &self.inv(a))
    }

    /// Reduces raw coordinates to the canonical payload, validating their shape.
    pub fn canonicalize(&self, raw: &[i64]) -> Result<Elem> {
        if raw.len() != self.width {
            return Err(Error::InvalidElement(format!(
                "{} expects {} coordinates, got {}",
                self.label,
                self.width,
                raw.len()
            )));
        }
        Ok(match &self.kind {
            GroupKind::FiniteCyclic(n) => Elem::from_slice(&[raw[0].rem_euclid(*n as i64)]),
            GroupKind::FreeAbelian(_) | GroupKind::HeisenbergZ => Elem::from_slice(raw),
            GroupKind::FiniteAbelian(d) => {
                Elem(raw.iter().zip(d.iter()).map(|(x, m)| x.rem_euclid(*m as i64)).collect())
            }
            GroupKind::DirectProduct(parts) => {
                let mut e = Elem::default();
                for (i, p) in parts.iter().enumerate() {
                    e.0.extend_from_slice(p.canonicalize(self.component(raw, i))?.as_slice());
                }
                e
            }
            GroupKind::HeisenbergMod(k) => Elem(raw.iter().map(|x| x.rem_euclid(*k as i64)).collect()),
            GroupKind::Lattice(h) => Elem::from_slice(&h.reduce(raw)),
            GroupKind::FiniteTable(t) => {
                if raw[0] < 0 || raw[0] as usize >= t.len() {
                    return Err(Error::InvalidElement(format!(
                        "{} has no element {}",
                        self.label, raw[0]
                    )));
                }
                Elem::from_slice(raw)
            }
        })
    }

    pub fn contains(&self, e: &Elem) -> bool {
        matches!(self.canonicalize(e.as_slice()), Ok(c) if c == *e)
    }

    pub fn is_abelian(&self) -> bool {
        match &self.kind {
            GroupKind::FiniteCyclic(_)
            | GroupKind::FreeAbelian(_)
            | GroupKind::FiniteAbelian(_)
            | GroupKind::Lattice(_) => true,
            GroupKind::DirectProduct(parts) => parts.iter().all(|p| p.is_abelian()),
            GroupKind::HeisenbergZ => false,
            GroupKind::HeisenbergMod(k) => *k == 1,
            GroupKind::FiniteTable(t) => t.abelian,
        }
    }

    /// `Some(|G|)` for finite groups, `None` for infinite ones.
    pub fn order(&self) -> Option<u64> {
        match &self.kind {
            GroupKind::FiniteCyclic(n) => Some(*n),
            GroupKind::FreeAbelian(m) => (*m == 0).then_some(1),
            GroupKind::FiniteAbelian(d) => Some(d.iter().product()),
            GroupKind::DirectProduct(parts) => parts.iter().map(|p| p.order()).product(),
            GroupKind::HeisenbergZ => None,
            GroupKind::HeisenbergMod(k) => Some(k * k * k),
            GroupKind::Lattice(h) => Some(h.index()),
            GroupKind::FiniteTable(t) => Some(t.len() as u64),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.order().is_some()
    }

    /// All elements of a finite group in sorted canonical order.
    pub fn elements(&self) -> Result<Vec<Elem>> {
        let order = self.order().ok_or(Error::NotFinite)?;
        if order as usize > DEFAULT_CAP {
            return Err(Error::CapExceeded { cap: DEFAULT_CAP });
        }
        let boxes: Vec<Vec<i64>> = match &self.kind {
            GroupKind::FiniteCyclic(n) => vec![(0..*n as i64).collect()],
            GroupKind::FreeAbelian(_) => vec![],
            GroupKind::FiniteAbelian(d) => d.iter().map(|m| (0..*m as i64).collect()).collect(),
            GroupKind::HeisenbergMod(k) => vec![(0..*k as i64).collect(); 3],
            GroupKind::Lattice(h) => (0..h.rank()).map(|i| (0..h.diag(i)).collect()).collect(),
            GroupKind::FiniteTable(t) => vec![(0..t.len() as i64).collect()],
            GroupKind::HeisenbergZ => unreachable!(),
            GroupKind::DirectProduct(parts) => {
                let lists = parts.iter().map(|p| p.elements()).collect::<Result<Vec<_>>>()?;
                let mut out = vec![Elem::default()];
                for list in lists {
                    let mut next = Vec::with_capacity(out.len() * list.len());
                    for prefix in &out {
                        for e in &list {
                            let mut x = prefix.clone();
                            x.0.extend_from_slice(e.as_slice());
                            next.push(x);
                        }
                    }
                    out = next;
                }
                out.sort();
                return Ok(out);
            }
        };
        let mut out = vec![Elem::default()];
        for b in boxes {
            let mut next = Vec::with_capacity(out.len() * b.len());
            for prefix in &out {
                for x in &b {
                    let mut e = prefix.clone();
                    e.0.push(*x);
                    next.push(e);
                }
            }
            out = next;
        }
        out.sort();
        Ok(out)
    }

    pub fn power(&self, e: &Elem, k: i64) -> Elem {
        let (mut base, mut k) = if k < 0 {
            (self.inv(e), -(k as i128))
        } else {
            (e.clone(), k as i128)
        };
        let mut acc = self.identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.op(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.op(&base, &base);
            }
        }
        acc
    }

    /// Order of an element, `None` if it has infinite order.
    pub fn element_order(&self, e: &Elem) -> Option<u64> {
        match &self.kind {
            GroupKind::FreeAbelian(_) | GroupKind::HeisenbergZ => self.is_identity(e).then_some(1),
            GroupKind::DirectProduct(parts) => {
                let mut acc = 1u64;
                for (i, p) in parts.iter().enumerate() {
                    let o = p.element_order(&Elem::from_slice(self.component(e.as_slice(), i)))?;
                    acc = lcm(acc, o);
                }
                Some(acc)
            }
            _ => {
                let id = self.identity();
                let mut x = e.clone();
                let mut k = 1u64;
                while x != id {
                    x = self.op(&x, e);
                    k += 1;
                }
                Some(k)
            }
        }
    }

    /// Some `k` with `b^k = g`, or `None` when `g` is not in `<b>`.
    /// For `b` of infinite order the exponent is unique; for finite order
    /// it is the least nonnegative one.
    pub fn cyclic_log(&self, g: &Elem, b: &Elem) -> Option<i64> {
        if let Some(n) = self.element_order(b) {
            let mut x = self.identity();
            for k in 0..n {
                if x == *g {
                    return Some(k as i64);
                }
                x = self.op(&x, b);
            }
            return None;
        }
        let k = match &self.kind {
            GroupKind::FreeAbelian(_) => linear_log(g.as_slice(), b.as_slice())?,
            GroupKind::HeisenbergZ => {
                if b.0[0] != 0 || b.0[1] != 0 {
                    linear_log(&g.0[..2], &b.0[..2])?
                } else {
                    if g.0[0] != 0 || g.0[1] != 0 {
                        return None;
                    }
                    linear_log(&g.0[2..], &b.0[2..])?
                }
            }
            GroupKind::DirectProduct(parts) => {
                let i = (0..parts.len()).find(|&i| {
                    parts[i]
                        .element_order(&Elem::from_slice(self.component(b.as_slice(), i)))
                        .is_none()
                })?;
                let gi = Elem::from_slice(self.component(g.as_slice(), i));
                let bi = Elem::from_slice(self.component(b.as_slice(), i));
                parts[i].cyclic_log(&gi, &bi)?
            }
            _ => unreachable!("finite kinds handled above"),
        };
        (self.power(b, k) == *g).then_some(k)
    }

    pub fn in_cyclic(&self, g: &Elem, b: &Elem) -> bool {
        self.cyclic_log(g, b).is_some()
    }

    /// Word length from a closed form when one exists for the standard generators.
    fn closed_form_length(&self, e: &Elem) -> Option<usize> {
        match &self.kind {
            GroupKind::FiniteCyclic(n) => {
                let r = e.0[0] as u64;
                Some(r.min(n - r) as usize)
            }
            GroupKind::FreeAbelian(_) => Some(e.0.iter().map(|x| x.unsigned_abs() as usize).sum()),
            GroupKind::FiniteAbelian(d) => Some(
                e.0.iter()
                    .zip(d.iter())
                    .map(|(x, m)| (*x as u64).min(m - *x as u64) as usize)
                    .sum(),
            ),
            GroupKind::DirectProduct(parts) => {
                let mut total = 0;
                for (i, p) in parts.iter().enumerate() {
                    total += p.closed_form_length(&Elem::from_slice(self.component(e.as_slice(), i)))?;
                }
                Some(total)
            }
            _ => None,
        }
    }

    /// Geodesic length by breadth-first search, `None` if not reached within `radius_cap`.
    pub fn word_length(&self, e: &Elem, radius_cap: usize) -> Option<usize> {
        if self.is_identity(e) {
            return Some(0);
        }
        let gens = self.symmetric_generators();
        let mut seen: HashSet<Elem> = HashSet::new();
        let id = self.identity();
        seen.insert(id.clone());
        let mut frontier = vec![id];
        for r in 1..=radius_cap {
            let mut next = Vec::new();
            for x in &frontier {
                for s in &gens {
                    let y = self.op(x, s);
                    if y == *e {
                        return Some(r);
                    }
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            if next.is_empty() || seen.len() > DEFAULT_CAP {
                return None;
            }
            frontier = next;
        }
        None
    }

    /// Word length, from a closed form when available and BFS otherwise.
    pub fn length(&self, e: &Elem) -> Option<usize> {
        self.closed_form_length(e).or_else(|| self.word_length(e, 256))
    }

    /// All elements of word length at most `n`, sorted.
    pub fn ball(&self, n: usize, cap: usize) -> Result<Vec<Elem>> {
        let gens = self.symmetric_generators();
        let layers = bfs_layers(self.identity(), &gens, |x, s| self.op(x, s), n, cap)?;
        let mut out: Vec<Elem> = layers.into_iter().flatten().collect();
        out.sort();
        Ok(out)
    }

    /// Decides conjugacy when this group supports it.
    pub fn are_conjugate(&self, g: &Elem, h: &Elem) -> Option<bool> {
        if self.is_abelian() {
            return Some(g == h);
        }
        match &self.kind {
            GroupKind::HeisenbergZ => {
                // conjugation shifts the central coordinate by multiples of gcd(a, b)
                if g.0[0] != h.0[0] || g.0[1] != h.0[1] {
                    return Some(false);
                }
                let d = gcd(g.0[0].unsigned_abs(), g.0[1].unsigned_abs()) as i64;
                Some(if d == 0 {
                    g.0[2] == h.0[2]
                } else {
                    (g.0[2] - h.0[2]) % d == 0
                })
            }
            GroupKind::DirectProduct(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    let gi = Elem::from_slice(self.component(g.as_slice(), i));
                    let hi = Elem::from_slice(self.component(h.as_slice(), i));
                    if !p.are_conjugate(&gi, &hi)? {
                        return Some(false);
                    }
                }
                Some(true)
            }
            _ => {
                let all = self.elements().ok()?;
                Some(all.iter().any(|c| self.conj(c, g) == *h))
            }
        }
    }

    /// Data for viewing an abelian group as `Z^rank / R`: the rank and the
    /// generators of `R`. Payload coordinates are the `Z^rank` coordinates.
    pub fn abelian_presentation(&self) -> Option<(usize, Vec<Vec<i64>>)> {
        match &self.kind {
            GroupKind::FiniteCyclic(n) => Some((1, vec![vec![*n as i64]])),
            GroupKind::FreeAbelian(m) => Some((*m, Vec::new())),
            GroupKind::FiniteAbelian(d) => {
                let k = d.len();
                Some((k, (0..k).map(|i| unit(k, i, d[i] as i64).0.to_vec()).collect()))
            }
            GroupKind::Lattice(h) => Some((h.rank(), h.rows().to_vec())),
            GroupKind::DirectProduct(parts) => {
                let mut rels = Vec::new();
                let mut offset = 0;
                for p in parts {
                    let (r, prels) = p.abelian_presentation()?;
                    for rel in prels {
                        let mut v = vec![0; self.width];
                        v[offset..offset + r].copy_from_slice(&rel);
                        rels.push(v);
                    }
                    offset += r;
                }
                Some((self.width, rels))
            }
            _ => None,
        }
    }

    pub fn format(&self, e: &Elem) -> String {
        let xs = e.as_slice();
        match &self.kind {
            GroupKind::HeisenbergZ | GroupKind::HeisenbergMod(_) => format!("H({},{},{})", xs[0], xs[1], xs[2]),
            _ if xs.len() == 1 => xs[0].to_string(),
            _ => format!("({})", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
        }
    }

    /// Wraps a raw payload into a checked element owned by this group.
    pub fn element(self: &Arc<Self>, raw: &[i64]) -> Result<GroupElement> {
        Ok(GroupElement {
            owner: Arc::clone(self),
            elem: self.canonicalize(raw)?,
        })
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// An element together with the group it lives in.
#[derive(Debug, Clone)]
pub struct GroupElement {
    owner: Arc<Group>,
    elem: Elem,
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        same_owner(&self.owner, &other.owner) && self.elem == other.elem
    }
}

impl Eq for GroupElement {}

fn same_owner(a: &Arc<Group>, b: &Arc<Group>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl GroupElement {
    pub fn owner(&self) -> &Arc<Group> {
        &self.owner
    }

    pub fn elem(&self) -> &Elem {
        &self.elem
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        if !same_owner(&self.owner, &other.owner) {
            return Err(Error::MixedOwners);
        }
        Ok(GroupElement {
            owner: Arc::clone(&self.owner),
            elem: self.owner.op(&self.elem, &other.elem),
        })
    }

    pub fn inv(&self) -> GroupElement {
        GroupElement {
            owner: Arc::clone(&self.owner),
            elem: self.owner.inv(&self.elem),
        }
    }

    pub fn word_length(&self, radius_cap: usize) -> Option<usize> {
        self.owner.word_length(&self.elem, radius_cap)
    }
}

/// True iff `c` commutes with `b`.
pub fn centralizer_contains(b: &GroupElement, c: &GroupElement) -> Result<bool> {
    Ok(b.mul(c)? == c.mul(b)?)
}

/// Breadth-first layers of the Cayley graph: `layers[r]` holds the elements at
/// distance exactly `r`, for `r <= radius`.
pub fn bfs_layers<T, F>(start: T, gens: &[T], op: F, radius: usize, cap: usize) -> Result<Vec<Vec<T>>>
where
    T: Clone + Eq + Hash,
    F: Fn(&T, &T) -> T,
{
    let mut seen: HashMap<T, ()> = HashMap::new();
    seen.insert(start.clone(), ());
    let mut layers = vec![vec![start]];
    for _ in 0..radius {
        let mut next = Vec::new();
        for x in layers.last().unwrap() {
            for s in gens {
                let y = op(x, s);
                if !seen.contains_key(&y) {
                    seen.insert(y.clone(), ());
                    next.push(y);
                }
            }
        }
        if seen.len() > cap {
            return Err(Error::CapExceeded { cap });
        }
        if next.is_empty() {
            break;
        }
        layers.push(next);
    }
    Ok(layers)
}

fn linear_log(g: &[i64], b: &[i64]) -> Option<i64> {
    let i = b.iter().position(|&x| x != 0);
    match i {
        None => g.iter().all(|&x| x == 0).then_some(0),
        Some(i) => {
            if g[i] % b[i] != 0 {
                return None;
            }
            let k = g[i] / b[i];
            g.iter().zip(b.iter()).all(|(x, y)| *x == k * y).then_some(k)
        }
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(xs: &[i64]) -> Elem {
        Elem::from_slice(xs)
    }

    #[test]
    fn mul_examples() {
        let z = Group::free_abelian(1);
        assert_eq!(z.op(&e(&[3]), &e(&[4])), e(&[7]));
        let z5 = Group::cyclic(5);
        assert_eq!(z5.op(&e(&[3]), &e(&[4])), e(&[2]));
        let h = Group::heisenberg();
        assert_eq!(h.op(&e(&[1, 0, 0]), &e(&[0, 1, 0])), e(&[1, 1, 1]));
    }

    /// Explicit 3x3 integer matrix product, independent of the coordinate formula.
    fn matrix(x: &Elem) -> [[i64; 3]; 3] {
        [[1, x.0[0], x.0[2]], [0, 1, x.0[1]], [0, 0, 1]]
    }

    fn matmul(a: [[i64; 3]; 3], b: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
        let mut c = [[0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        c
    }

    #[test]
    fn heisenberg_matches_matrix_product() {
        let h = Group::heisenberg();
        let ball = h.ball(3, DEFAULT_CAP).unwrap();
        for a in &ball {
            for b in ball.iter().step_by(3) {
                assert_eq!(matrix(&h.op(a, b)), matmul(matrix(a), matrix(b)));
                assert_eq!(matrix(&h.op(a, &h.inv(a))), matrix(&h.identity()));
            }
        }
    }

    #[test]
    fn word_length_examples() {
        let z = Group::free_abelian(1);
        assert_eq!(z.word_length(&e(&[0]), 10), Some(0));
        assert_eq!(z.word_length(&e(&[5]), 10), Some(5));
        assert_eq!(z.word_length(&e(&[5]), 4), None);
        let z2 = Group::free_abelian(2);
        assert_eq!(z2.word_length(&e(&[2, 3]), 10), Some(5));
    }

    #[test]
    fn ball_examples() {
        let z = Group::free_abelian(1);
        assert_eq!(
            z.ball(2, DEFAULT_CAP).unwrap(),
            vec![e(&[-2]), e(&[-1]), e(&[0]), e(&[1]), e(&[2])]
        );
        let z3 = Group::cyclic(3);
        assert_eq!(z3.ball(1, DEFAULT_CAP).unwrap(), vec![e(&[0]), e(&[1]), e(&[2])]);
        let z2 = Group::free_abelian(2);
        assert_eq!(
            z2.ball(1, DEFAULT_CAP).unwrap(),
            vec![e(&[-1, 0]), e(&[0, -1]), e(&[0, 0]), e(&[0, 1]), e(&[1, 0])]
        );
        assert_eq!(z2.ball(40, 100), Err(Error::CapExceeded { cap: 100 }));
    }

    #[test]
    fn taxicab_ball_sizes() {
        for m in 1..=2usize {
            let g = Group::free_abelian(m);
            for n in 0..=6usize {
                let expected = if m == 1 { 2 * n + 1 } else { 2 * n * n + 2 * n + 1 };
                assert_eq!(g.ball(n, DEFAULT_CAP).unwrap().len(), expected);
            }
        }
    }

    #[test]
    fn cyclic_group_has_n_elements() {
        for n in 1..10 {
            assert_eq!(Group::cyclic(n).elements().unwrap().len(), n as usize);
        }
    }

    #[test]
    fn centralizer_examples() {
        let h = Group::heisenberg();
        let x = h.element(&[1, 0, 0]).unwrap();
        let y = h.element(&[0, 1, 0]).unwrap();
        let z = h.element(&[0, 0, 1]).unwrap();
        assert!(!centralizer_contains(&x, &y).unwrap());
        assert!(centralizer_contains(&x, &z).unwrap());
        assert!(centralizer_contains(&h.element(&[3, -2, 7]).unwrap(), &z).unwrap());
        let z5 = Group::cyclic(5);
        let a = z5.element(&[2]).unwrap();
        let b = z5.element(&[4]).unwrap();
        assert!(centralizer_contains(&a, &b).unwrap());
        let other = Group::cyclic(7).element(&[1]).unwrap();
        assert_eq!(a.mul(&other), Err(Error::MixedOwners));
        assert_eq!(centralizer_contains(&a, &other), Err(Error::MixedOwners));
    }

    #[test]
    fn cyclic_log_cases() {
        let z2 = Group::free_abelian(2);
        assert_eq!(z2.cyclic_log(&e(&[4, -6]), &e(&[2, -3])), Some(2));
        assert_eq!(z2.cyclic_log(&e(&[4, -5]), &e(&[2, -3])), None);
        let h = Group::heisenberg();
        let b = e(&[1, 1, 0]);
        let b3 = h.power(&b, 3);
        assert_eq!(h.cyclic_log(&b3, &b), Some(3));
        assert_eq!(h.cyclic_log(&e(&[3, 3, 0]), &b), None);
        let z6 = Group::cyclic(6);
        assert_eq!(z6.cyclic_log(&e(&[4]), &e(&[2])), Some(2));
        assert_eq!(z6.cyclic_log(&e(&[3]), &e(&[2])), None);
        let mixed = Group::product(vec![Group::free_abelian(1), Group::cyclic(2)]);
        assert_eq!(mixed.cyclic_log(&e(&[3, 1]), &e(&[1, 1])), Some(3));
        assert_eq!(mixed.cyclic_log(&e(&[2, 1]), &e(&[1, 1])), None);
    }

    #[test]
    fn heisenberg_conjugacy_matches_search() {
        let h = Group::heisenberg();
        let ball = h.ball(2, DEFAULT_CAP).unwrap();
        let conjugators = h.ball(4, DEFAULT_CAP).unwrap();
        for g in &ball {
            for k in &ball {
                let found = conjugators.iter().any(|c| h.conj(c, g) == *k);
                if found {
                    assert_eq!(h.are_conjugate(g, k), Some(true));
                }
                if h.are_conjugate(g, k) == Some(false) {
                    assert!(!found);
                }
            }
        }
    }

    #[test]
    fn table_validation() {
        assert!(CayleyTable::new(vec![vec![0, 1], vec![1, 1]]).is_err());
        let s3 = Group::symmetric3();
        assert_eq!(s3.order(), Some(6));
        assert!(!s3.is_abelian());
        let all = s3.elements().unwrap();
        for a in &all {
            assert_eq!(s3.op(a, &s3.inv(a)), s3.identity());
        }
    }

    #[test]
    fn closed_form_lengths_agree_with_bfs() {
        let groups = vec![
            Group::cyclic(7),
            Group::free_abelian(2),
            Group::finite_abelian(vec![2, 4]).unwrap(),
            Group::product(vec![Group::cyclic(3), Group::free_abelian(1)]),
        ];
        for g in groups {
            for x in g.ball(4, DEFAULT_CAP).unwrap() {
                assert_eq!(g.closed_form_length(&x), g.word_length(&x, 10), "{} {:?}", g, x);
            }
        }
    }

    #[test]
    fn lattice_quotient_is_finite_abelian() {
        let h = Hnf::from_rows(vec![vec![2, 1], vec![0, 3]]).unwrap();
        let q = Group::lattice_quotient(h);
        assert_eq!(q.order(), Some(6));
        assert_eq!(q.elements().unwrap().len(), 6);
        assert_eq!(q.ball(10, DEFAULT_CAP).unwrap().len(), 6);
        assert_eq!(q.label(), "Z^2/[[2,1],[0,3]]");
    }
}
