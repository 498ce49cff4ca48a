//! Restricted wreath products `A wr B`.
//!
//! An element is a pair `(f, b)` where `f: B -> A` is finitely supported and
//! `b` lies in `B`. Multiplication follows
//! `(f, b)(g, c) = (f . (b.g), bc)` with `(b.g)(x) = g(b^-1 x)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groups::{bfs_layers, Elem, Group, GroupKind};

/// Finitely supported map `B -> A`: strictly sorted keys, no identity values.
pub type BaseMap = Vec<(Elem, Elem)>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct WreathElement {
    pub base: BaseMap,
    pub top: Elem,
}

impl WreathElement {
    pub fn new(base: BaseMap, top: Elem) -> WreathElement {
        WreathElement { base, top }
    }

    pub fn support(&self) -> impl Iterator<Item = &Elem> {
        self.base.iter().map(|(k, _)| k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WreathProduct {
    base: Arc<Group>,
    acting: Arc<Group>,
    abelian_base: bool,
}

impl fmt::Display for WreathProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})wr({})", self.base.label(), self.acting.label())
    }
}

fn sorted(map: BTreeMap<Elem, Elem>) -> BaseMap {
    map.into_iter().collect()
}

impl WreathProduct {
    pub fn new(base: Arc<Group>, acting: Arc<Group>) -> WreathProduct {
        let abelian_base = base.is_abelian();
        WreathProduct {
            base,
            acting,
            abelian_base,
        }
    }

    /// `Z/2 wr Z`.
    pub fn lamplighter() -> WreathProduct {
        WreathProduct::new(Group::cyclic(2), Group::free_abelian(1))
    }

    pub fn base(&self) -> &Arc<Group> {
        &self.base
    }

    pub fn acting(&self) -> &Arc<Group> {
        &self.acting
    }

    pub fn abelian_base(&self) -> bool {
        self.abelian_base
    }

    fn require_abelian(&self) -> Result<()> {
        if self.abelian_base {
            Ok(())
        } else {
            Err(Error::NonAbelianBase)
        }
    }

    /// `|A|^|B| |B|` when both factors are finite.
    pub fn order(&self) -> Option<u128> {
        let a = self.base.order()? as u128;
        let b = self.acting.order()?;
        a.checked_pow(u32::try_from(b).ok()?)?.checked_mul(b as u128)
    }

    pub fn identity(&self) -> WreathElement {
        WreathElement::new(Vec::new(), self.acting.identity())
    }

    pub fn is_identity(&self, x: &WreathElement) -> bool {
        x.base.is_empty() && self.acting.is_identity(&x.top)
    }

    /// Validates shape: canonical keys and values, sorted keys, no identity values.
    pub fn contains(&self, x: &WreathElement) -> bool {
        self.acting.contains(&x.top)
            && x.base.windows(2).all(|w| w[0].0 < w[1].0)
            && x.base
                .iter()
                .all(|(k, v)| self.acting.contains(k) && self.base.contains(v) && !self.base.is_identity(v))
    }

    /// Builds an element from unsorted raw pairs, combining repeated keys.
    pub fn element(&self, pairs: Vec<(Elem, Elem)>, top: Elem) -> Result<WreathElement> {
        let top = self.acting.canonicalize(top.as_slice())?;
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            let k = self.acting.canonicalize(k.as_slice())?;
            let v = self.base.canonicalize(v.as_slice())?;
            let slot = map.entry(k).or_insert_with(|| self.base.identity());
            *slot = self.base.op(slot, &v);
        }
        map.retain(|_, v| !self.base.is_identity(v));
        Ok(WreathElement::new(sorted(map), top))
    }

    pub fn mul(&self, x: &WreathElement, y: &WreathElement) -> WreathElement {
        let mut map: BTreeMap<Elem, Elem> = x.base.iter().cloned().collect();
        for (s, v) in &y.base {
            let key = self.acting.op(&x.top, s);
            match map.get_mut(&key) {
                Some(slot) => {
                    *slot = self.base.op(slot, v);
                    if self.base.is_identity(slot) {
                        map.remove(&key);
                    }
                }
                None => {
                    map.insert(key, v.clone());
                }
            }
        }
        WreathElement::new(sorted(map), self.acting.op(&x.top, &y.top))
    }

    /// `mul` after checking both arguments belong to this product.
    pub fn checked_mul(&self, x: &WreathElement, y: &WreathElement) -> Result<WreathElement> {
        if !self.contains(x) || !self.contains(y) {
            return Err(Error::MixedOwners);
        }
        Ok(self.mul(x, y))
    }

    pub fn inv(&self, x: &WreathElement) -> WreathElement {
        let t = self.acting.inv(&x.top);
        let map: BTreeMap<Elem, Elem> = x
            .base
            .iter()
            .map(|(s, v)| (self.acting.op(&t, s), self.base.inv(v)))
            .collect();
        WreathElement::new(sorted(map), t)
    }

    /// `w x w^-1`.
    pub fn conj(&self, x: &WreathElement, w: &WreathElement) -> WreathElement {
        self.mul(&self.mul(w, x), &self.inv(w))
    }

    /// The translated map `c.f`, i.e. `x -> f(c^-1 x)`.
    pub fn translate(&self, f: &[(Elem, Elem)], c: &Elem) -> BaseMap {
        let map: BTreeMap<Elem, Elem> = f.iter().map(|(s, v)| (self.acting.op(c, s), v.clone())).collect();
        sorted(map)
    }

    /// Pointwise product `f g` of base maps.
    pub fn base_mul(&self, f: &[(Elem, Elem)], g: &[(Elem, Elem)]) -> BaseMap {
        let mut map: BTreeMap<Elem, Elem> = f.iter().cloned().collect();
        for (s, v) in g {
            let slot = map.entry(s.clone()).or_insert_with(|| self.base.identity());
            *slot = self.base.op(slot, v);
        }
        map.retain(|_, v| !self.base.is_identity(v));
        sorted(map)
    }

    pub fn base_inv(&self, f: &[(Elem, Elem)]) -> BaseMap {
        f.iter().map(|(s, v)| (s.clone(), self.base.inv(v))).collect()
    }

    /// The commutator `[h, b] = h . (b.h^-1)` of a base map with a top element.
    pub fn commutator(&self, h: &[(Elem, Elem)], b: &Elem) -> BaseMap {
        self.base_mul(h, &self.translate(&self.base_inv(h), b))
    }

    /// Groups support points into `<b>`-cosets `<b> t`. Each class is
    /// listed in key order; classes are ordered by their least key.
    pub fn cosets<'a>(&self, keys: impl IntoIterator<Item = &'a Elem>, b: &Elem) -> Vec<Vec<Elem>> {
        let mut classes: Vec<Vec<Elem>> = Vec::new();
        for k in keys {
            let home = classes.iter_mut().find(|c| {
                let d = self.acting.op(k, &self.acting.inv(&c[0]));
                self.acting.in_cyclic(&d, b)
            });
            match home {
                Some(c) => c.push(k.clone()),
                None => classes.push(vec![k.clone()]),
            }
        }
        for c in &mut classes {
            c.sort();
        }
        classes.sort();
        classes
    }

    /// Product of `f` over the orbit `<b> t`.
    pub fn tilde(&self, f: &[(Elem, Elem)], b: &Elem, t: &Elem) -> Result<Elem> {
        self.require_abelian()?;
        let mut acc = self.base.identity();
        for (s, v) in f {
            let d = self.acting.op(s, &self.acting.inv(t));
            if self.acting.in_cyclic(&d, b) {
                acc = self.base.op(&acc, v);
            }
        }
        Ok(acc)
    }

    /// True iff `f` lies in `K_b = {[h, b]}`, i.e. every coset product vanishes.
    pub fn in_kb(&self, f: &[(Elem, Elem)], b: &Elem) -> Result<bool> {
        self.require_abelian()?;
        for class in self.cosets(f.iter().map(|(k, _)| k), b) {
            if !self.base.is_identity(&self.tilde(f, b, &class[0])?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Moves each coset's total onto its least support point. The result
    /// differs from `f` by an element of `K_b`, so `(f', b)` is conjugate
    /// to `(f, b)` by a base element (see [`WreathProduct::solve_commutator`]).
    pub fn reduce_support(&self, f: &[(Elem, Elem)], b: &Elem) -> Result<BaseMap> {
        self.require_abelian()?;
        let mut out = Vec::new();
        for class in self.cosets(f.iter().map(|(k, _)| k), b) {
            let total = self.tilde(f, b, &class[0])?;
            if !self.base.is_identity(&total) {
                out.push((class[0].clone(), total));
            }
        }
        out.sort();
        Ok(out)
    }

    /// Some `h` with `[h, b] = k`, or `None` when `k` is not in `K_b`.
    pub fn solve_commutator(&self, k: &[(Elem, Elem)], b: &Elem) -> Result<Option<BaseMap>> {
        self.require_abelian()?;
        let a = &self.base;
        let bg = &self.acting;
        let value = |x: &Elem| {
            k.binary_search_by(|(s, _)| s.cmp(x))
                .map(|i| k[i].1.clone())
                .unwrap_or_else(|_| a.identity())
        };
        let mut h: BTreeMap<Elem, Elem> = BTreeMap::new();
        let order = bg.element_order(b);
        for class in self.cosets(k.iter().map(|(s, _)| s), b) {
            let s0 = &class[0];
            let s0_inv = bg.inv(s0);
            let exps: Vec<i64> = class
                .iter()
                .map(|s| bg.cyclic_log(&bg.op(s, &s0_inv), b).expect("same coset"))
                .collect();
            let (lo, hi) = match order {
                Some(n) => (0, n as i64),
                None => (*exps.iter().min().unwrap(), *exps.iter().max().unwrap() + 1),
            };
            let mut acc = a.identity();
            for i in lo..hi {
                let x = bg.op(&bg.power(b, i), s0);
                acc = a.op(&acc, &value(&x));
                if !a.is_identity(&acc) {
                    h.insert(x, acc.clone());
                }
            }
            if !a.is_identity(&acc) {
                return Ok(None);
            }
        }
        Ok(Some(sorted(h)))
    }

    /// Standard generators: `(delta_1 -> a, 1)` for generators `a` of `A`
    /// and `(empty, b)` for generators `b` of `B`.
    pub fn generators(&self) -> Vec<WreathElement> {
        let one = self.acting.identity();
        let mut out: Vec<WreathElement> = self
            .base
            .generators()
            .iter()
            .map(|a| WreathElement::new(vec![(one.clone(), a.clone())], one.clone()))
            .collect();
        out.extend(
            self.acting
                .generators()
                .iter()
                .map(|b| WreathElement::new(Vec::new(), b.clone())),
        );
        out
    }

    pub fn symmetric_generators(&self) -> Vec<WreathElement> {
        let mut out: Vec<WreathElement> = Vec::new();
        for g in self.generators() {
            for x in [self.inv(&g), g] {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out.sort();
        out
    }

    /// Word-metric layers around the identity.
    pub fn spheres(&self, radius: usize, cap: usize) -> Result<Vec<Vec<WreathElement>>> {
        let gens = self.symmetric_generators();
        bfs_layers(self.identity(), &gens, |x, s| self.mul(x, s), radius, cap)
    }

    /// Elements of word length at most `n`, sorted.
    pub fn ball(&self, n: usize, cap: usize) -> Result<Vec<WreathElement>> {
        let mut out: Vec<WreathElement> = self.spheres(n, cap)?.into_iter().flatten().collect();
        out.sort();
        Ok(out)
    }

    /// Elements with `norm <= n`, sorted. Equals [`WreathProduct::ball`] for `B = Z`.
    pub fn norm_ball(&self, n: usize, cap: usize) -> Result<Vec<WreathElement>> {
        let mut out = self.ball(n, cap)?;
        out.retain(|x| self.norm(x) <= n);
        Ok(out)
    }

    /// Word length for `B = Z`; an upper bound otherwise.
    ///
    /// Over `Z` the cursor starts at 0, must sweep `[l, r]` covering the support
    /// and end at the top `m`; the cheaper of "left end first" and "right end
    /// first" is optimal. Elsewhere a nearest-neighbour tour is used.
    pub fn norm(&self, x: &WreathElement) -> usize {
        let lamps: usize = x
            .base
            .iter()
            .map(|(_, v)| self.base.length(v).unwrap_or(usize::MAX / 4))
            .sum();
        let walk = match self.acting.kind() {
            GroupKind::FreeAbelian(1) => {
                let m = x.top.0[0];
                let l = x.base.first().map_or(0, |(k, _)| k.0[0]).min(0).min(m);
                let r = x.base.last().map_or(0, |(k, _)| k.0[0]).max(0).max(m);
                let left_first = -l + (r - l) + (r - m);
                let right_first = r + (r - l) + (m - l);
                left_first.min(right_first) as usize
            }
            _ => self.tour_length(x),
        };
        walk + lamps
    }

    fn tour_length(&self, x: &WreathElement) -> usize {
        let bg = &self.acting;
        let dist = |p: &Elem, q: &Elem| bg.length(&bg.op(&bg.inv(p), q)).unwrap_or(usize::MAX / 4);
        let mut pending: Vec<&Elem> = x.base.iter().map(|(k, _)| k).collect();
        let mut here = bg.identity();
        let mut total = 0;
        while !pending.is_empty() {
            let (i, d) = pending
                .iter()
                .enumerate()
                .map(|(i, p)| (i, dist(&here, p)))
                .min_by_key(|&(i, d)| (d, i))
                .unwrap();
            total += d;
            here = pending.remove(i).clone();
        }
        total + dist(&here, &x.top)
    }

    /// Every element of a finite wreath product, sorted.
    pub fn elements(&self, cap: usize) -> Result<Vec<WreathElement>> {
        let order = self.order().ok_or(Error::NotFinite)?;
        if order > cap as u128 {
            return Err(Error::CapExceeded { cap });
        }
        let a_all = self.base.elements()?;
        let b_all = self.acting.elements()?;
        let mut maps: Vec<BaseMap> = vec![Vec::new()];
        for key in &b_all {
            let mut next = Vec::with_capacity(maps.len() * a_all.len());
            for m in &maps {
                for v in &a_all {
                    let mut m2 = m.clone();
                    if !self.base.is_identity(v) {
                        m2.push((key.clone(), v.clone()));
                    }
                    next.push(m2);
                }
            }
            maps = next;
        }
        let mut out = Vec::with_capacity(order as usize);
        for m in &maps {
            for t in &b_all {
                out.push(WreathElement::new(m.clone(), t.clone()));
            }
        }
        out.sort();
        Ok(out)
    }

    /// Literal form `{k:v, k:v}@top`.
    pub fn format(&self, x: &WreathElement) -> String {
        let body: Vec<String> = x
            .base
            .iter()
            .map(|(k, v)| format!("{}:{}", self.acting.format(k), self.base.format(v)))
            .collect();
        format!("{{{}}}@{}", body.join(", "), self.acting.format(&x.top))
    }
}
