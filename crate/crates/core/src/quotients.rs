//! Finite quotients: co-C subgroup enumeration for the supported groups and
//! the induced quotients `(A/M) wr (B/N)` of wreath products.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groups::{Elem, Group, GroupKind};
use crate::lattice::Hnf;
use crate::wreath::{BaseMap, WreathElement, WreathProduct};

/// The class of finite groups quotients are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    AllFinite,
    PGroups(u64),
}

impl Family {
    pub fn admits(&self, order: u64) -> bool {
        match self {
            Family::AllFinite => order >= 1,
            Family::PGroups(p) => is_power_of(order, *p),
        }
    }
}

pub fn is_power_of(mut n: u64, p: u64) -> bool {
    if n == 0 || p < 2 {
        return false;
    }
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::AllFinite => f.write_str("all"),
            Family::PGroups(p) => write!(f, "p{p}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        let s = s.trim();
        if s == "all" {
            return Ok(Family::AllFinite);
        }
        let p = s
            .strip_prefix('p')
            .and_then(|d| d.parse::<u64>().ok())
            .ok_or_else(|| Error::Parse(format!("family must be `all` or `p<prime>`, got `{s}`")))?;
        if !is_prime(p) {
            return Err(Error::Parse(format!("{p} is not prime")));
        }
        Ok(Family::PGroups(p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum MapKind {
    /// Reduction of abelian coordinates modulo a sublattice.
    Lattice(Hnf),
    /// Heisenberg entries modulo `k`.
    Congruence(u64),
    Identity,
    Trivial,
}

/// A surjection from a group onto a finite group.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    source: Arc<Group>,
    target: Arc<Group>,
    kind: MapKind,
}

impl QuotientMap {
    pub fn identity(source: Arc<Group>) -> Result<QuotientMap> {
        if !source.is_finite() {
            return Err(Error::NotFinite);
        }
        Ok(QuotientMap {
            target: Arc::clone(&source),
            source,
            kind: MapKind::Identity,
        })
    }

    pub fn trivial(source: Arc<Group>) -> QuotientMap {
        QuotientMap {
            source,
            target: Group::cyclic(1),
            kind: MapKind::Trivial,
        }
    }

    /// `Z^r / R -> Z^r / L` for a lattice `L` containing the relations `R`.
    pub fn lattice(source: Arc<Group>, hnf: Hnf) -> Result<QuotientMap> {
        let (rank, rels) = source
            .abelian_presentation()
            .ok_or_else(|| Error::UnsupportedDescriptor(source.label().to_string()))?;
        if hnf.rank() != rank || !rels.iter().all(|r| hnf.contains(r)) {
            return Err(Error::InvalidElement(format!(
                "{hnf} does not contain the relations of {}",
                source.label()
            )));
        }
        let target = if rank == 1 {
            Group::cyclic(hnf.diag(0) as u64)
        } else {
            Group::lattice_quotient(hnf.clone())
        };
        Ok(QuotientMap {
            source,
            target,
            kind: MapKind::Lattice(hnf),
        })
    }

    pub fn congruence(source: Arc<Group>, k: u64) -> Result<QuotientMap> {
        if !matches!(source.kind(), GroupKind::HeisenbergZ) || k == 0 {
            return Err(Error::UnsupportedDescriptor(source.label().to_string()));
        }
        Ok(QuotientMap {
            source,
            target: Group::heisenberg_mod(k),
            kind: MapKind::Congruence(k),
        })
    }

    pub fn source(&self) -> &Arc<Group> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Group> {
        &self.target
    }

    pub fn index(&self) -> u64 {
        self.target.order().expect("quotient targets are finite")
    }

    pub fn descriptor(&self) -> String {
        self.target.label().to_string()
    }

    /// True iff the map is an isomorphism.
    pub fn is_injective(&self) -> bool {
        self.source.order() == Some(self.index())
    }

    pub fn apply(&self, g: &Elem) -> Elem {
        match &self.kind {
            MapKind::Lattice(h) => Elem::from_slice(&h.reduce(g.as_slice())),
            MapKind::Congruence(k) => Elem(g.0.iter().map(|x| x.rem_euclid(*k as i64)).collect()),
            MapKind::Identity => g.clone(),
            MapKind::Trivial => self.target.identity(),
        }
    }

    pub fn in_kernel(&self, g: &Elem) -> bool {
        self.target.is_identity(&self.apply(g))
    }

    /// True iff the map is injective on the word-metric ball of radius `n`.
    pub fn injective_on_ball(&self, n: usize, cap: usize) -> Result<bool> {
        let ball = self.source.ball(n, cap)?;
        let mut seen = HashSet::with_capacity(ball.len());
        Ok(ball.iter().all(|g| seen.insert(self.apply(g))))
    }
}

impl fmt::Display for QuotientMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// Quotients of `desc` lying in `family` with index at most `max_index`,
/// ordered by index and then descriptor text.
pub fn enumerate_coc(desc: &Arc<Group>, family: Family, max_index: u64) -> Result<Vec<QuotientMap>> {
    let mut out = Vec::new();
    if let Some((rank, rels)) = desc.abelian_presentation() {
        let diag_ok = |d: u64| family.admits(d);
        for hnf in Hnf::enumerate(rank, max_index, diag_ok) {
            if rels.iter().all(|r| hnf.contains(r)) {
                out.push(QuotientMap::lattice(Arc::clone(desc), hnf)?);
            }
        }
    } else if matches!(desc.kind(), GroupKind::HeisenbergZ) {
        let mut k = 1u64;
        while k.saturating_mul(k).saturating_mul(k) <= max_index {
            if family.admits(k) {
                out.push(QuotientMap::congruence(Arc::clone(desc), k)?);
            }
            k += 1;
        }
    } else if let Some(order) = desc.order() {
        if max_index >= 1 {
            out.push(QuotientMap::trivial(Arc::clone(desc)));
        }
        if order > 1 && order <= max_index && family.admits(order) {
            out.push(QuotientMap::identity(Arc::clone(desc))?);
        }
    } else {
        return Err(Error::UnsupportedDescriptor(desc.label().to_string()));
    }
    out.sort_by_cached_key(|q| (q.index(), q.descriptor()));
    Ok(out)
}

/// The map `A wr B -> (A/M) wr (B/N)`. Without a base quotient the target base is `A` itself.
#[derive(Debug, Clone)]
pub struct WreathQuotientMap {
    source: WreathProduct,
    target: WreathProduct,
    base_quot: Option<QuotientMap>,
    act_quot: QuotientMap,
}

impl WreathQuotientMap {
    pub fn source(&self) -> &WreathProduct {
        &self.source
    }

    pub fn target(&self) -> &WreathProduct {
        &self.target
    }

    pub fn base_quot(&self) -> Option<&QuotientMap> {
        self.base_quot.as_ref()
    }

    pub fn act_quot(&self) -> &QuotientMap {
        &self.act_quot
    }

    /// `|A/M|^|B/N| |B/N|`, `None` when infinite or too large for `u128`.
    pub fn index(&self) -> Option<u128> {
        self.target.order()
    }

    /// True when the base collapses, so the map is the retraction onto `B/N`.
    pub fn is_retraction(&self) -> bool {
        self.target.base().order() == Some(1)
    }

    pub fn descriptor(&self) -> String {
        if self.is_retraction() {
            self.target.acting().label().to_string()
        } else {
            self.target.to_string()
        }
    }

    fn apply_base(&self, f: &[(Elem, Elem)]) -> BaseMap {
        let pairs = f
            .iter()
            .map(|(s, v)| {
                let v = match &self.base_quot {
                    Some(q) => q.apply(v),
                    None => v.clone(),
                };
                (self.act_quot.apply(s), v)
            })
            .collect();
        self.target
            .element(pairs, self.target.acting().identity())
            .expect("images are canonical")
            .base
    }

    pub fn apply(&self, x: &WreathElement) -> WreathElement {
        WreathElement::new(self.apply_base(&x.base), self.act_quot.apply(&x.top))
    }
}

impl fmt::Display for WreathQuotientMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// Extends `q: B -> B/N` to `A wr B -> A wr (B/N)` by multiplying `f` over each coset.
pub fn extend_quotient(w: &WreathProduct, q: &QuotientMap) -> Result<WreathQuotientMap> {
    if !w.abelian_base() {
        return Err(Error::NonAbelianBase);
    }
    check_acting(w, q)?;
    Ok(WreathQuotientMap {
        source: w.clone(),
        target: WreathProduct::new(Arc::clone(w.base()), Arc::clone(q.target())),
        base_quot: None,
        act_quot: q.clone(),
    })
}

/// The composite `A wr B -> (A/M) wr (B/N)`. A nonabelian base is allowed
/// only when `q_b` is injective or `q_a` is trivial.
pub fn product_quotient(w: &WreathProduct, q_a: &QuotientMap, q_b: &QuotientMap) -> Result<WreathQuotientMap> {
    check_acting(w, q_b)?;
    if q_a.source() != w.base() && **q_a.source() != **w.base() {
        return Err(Error::MixedOwners);
    }
    if !w.abelian_base() && !q_b.is_injective() && q_a.index() > 1 {
        return Err(Error::NonAbelianBase);
    }
    Ok(WreathQuotientMap {
        source: w.clone(),
        target: WreathProduct::new(Arc::clone(q_a.target()), Arc::clone(q_b.target())),
        base_quot: Some(q_a.clone()),
        act_quot: q_b.clone(),
    })
}

fn check_acting(w: &WreathProduct, q: &QuotientMap) -> Result<()> {
    if **q.source() != **w.acting() {
        return Err(Error::MixedOwners);
    }
    Ok(())
}

/// All wreath-shaped quotients `(A/M) wr (B/N)` of index at most `max_index`
/// in `family`, ordered by index and then descriptor text. A trivial `A/M`
/// gives the retraction onto `B/N`.
pub fn wreath_quotients(w: &WreathProduct, family: Family, max_index: u64) -> Result<Vec<WreathQuotientMap>> {
    let qbs = enumerate_coc(w.acting(), family, max_index)?;
    let qas = enumerate_coc(w.base(), family, max_index)?;
    let mut out = Vec::new();
    for qb in &qbs {
        let nb = qb.index();
        for qa in &qas {
            let index = (qa.index() as u128)
                .checked_pow(nb as u32)
                .and_then(|x| x.checked_mul(nb as u128));
            // qas is sorted by index, so every later qa is too large as well
            if !matches!(index, Some(i) if i <= max_index as u128) {
                break;
            }
            match product_quotient(w, qa, qb) {
                Ok(q) => out.push(q),
                Err(Error::NonAbelianBase) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    out.sort_by_cached_key(|q| (q.index(), q.descriptor()));
    Ok(out)
}

/// True iff the image cosets of `<q(b)>` are equal exactly when the source
/// cosets of `<b>` are, for all pairs from `s`.
pub fn separates_cosets(q: &QuotientMap, b: &Elem, s: &[Elem]) -> bool {
    let src = q.source();
    let tgt = q.target();
    let qb = q.apply(b);
    for (i, x) in s.iter().enumerate() {
        for y in &s[i + 1..] {
            let same_src = src.in_cyclic(&src.op(x, &src.inv(y)), b);
            let (qx, qy) = (q.apply(x), q.apply(y));
            let same_img = tgt.in_cyclic(&tgt.op(&qx, &tgt.inv(&qy)), &qb);
            if same_src != same_img {
                return false;
            }
        }
    }
    true
}

/// True iff `q` is injective on `s_f` and `s_g` together and no element of
/// the target translates `q(s_f)` onto `q(s_g)`.
pub fn separates_support_translation(q: &QuotientMap, s_f: &[Elem], s_g: &[Elem]) -> bool {
    let mut union: Vec<&Elem> = s_f.iter().chain(s_g.iter()).collect();
    union.sort();
    union.dedup();
    let images: HashSet<Elem> = union.iter().map(|x| q.apply(x)).collect();
    if images.len() != union.len() {
        return false;
    }
    let tgt = q.target();
    let img_f: Vec<Elem> = s_f.iter().map(|x| q.apply(x)).collect();
    let mut img_g: Vec<Elem> = s_g.iter().map(|x| q.apply(x)).collect();
    img_g.sort();
    img_g.dedup();
    let all = match tgt.elements() {
        Ok(all) => all,
        Err(_) => return false,
    };
    !all.iter().any(|t| {
        let mut moved: Vec<Elem> = img_f.iter().map(|x| tgt.op(t, x)).collect();
        moved.sort();
        moved.dedup();
        moved == img_g
    })
}

/// True iff `f` multiplies to the identity over every coset of `ker q`.
pub fn in_kn(w: &WreathProduct, q: &QuotientMap, f: &[(Elem, Elem)]) -> Result<bool> {
    let ext = extend_quotient(w, q)?;
    Ok(ext.apply_base(f).is_empty())
}
