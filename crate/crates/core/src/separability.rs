//! Measured separability functions (depths, residual girth, shortest
//! conjugators), closed-form bound evaluation, and the pro-p witness.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::conjugacy::{conj_abelian_a_wreath, conj_finite_wreath, separates};
use crate::error::{Error, Result};
use crate::groups::{Elem, Group, DEFAULT_CAP};
use crate::quotients::{
    enumerate_coc, is_power_of, product_quotient, wreath_quotients, Family, QuotientMap, WreathQuotientMap,
};
use crate::wreath::{WreathElement, WreathProduct};

/// A measured minimal index; `Unreached` sorts above every value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Depth {
    Value(u128),
    Unreached,
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Value(v) => write!(f, "{v}"),
            Depth::Unreached => f.write_str("unreached"),
        }
    }
}

/// Knobs shared by the measurement campaigns.
#[derive(Debug, Clone)]
pub struct MeasureConfig {
    pub max_index: u64,
    pub parallelism: usize,
    pub cap: usize,
    pub digit_cap: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            max_index: 4096,
            parallelism: 1,
            cap: DEFAULT_CAP,
            digit_cap: 10_000,
        }
    }
}

/// Exact conjugacy where a decider applies.
pub fn exactly_conjugate(w: &WreathProduct, x: &WreathElement, y: &WreathElement) -> Result<bool> {
    if w.base().is_finite() && w.acting().is_finite() {
        Ok(conj_finite_wreath(w, x, y)?.is_conjugate())
    } else {
        Ok(conj_abelian_a_wreath(w, x, y)?.is_conjugate())
    }
}

fn first_separating(quotients: &[WreathQuotientMap], x: &WreathElement, y: &WreathElement) -> Result<Depth> {
    for q in quotients {
        if separates(q, x, y)? {
            return Ok(Depth::Value(q.index().expect("finite quotient")));
        }
    }
    Ok(Depth::Unreached)
}

/// Least index of a wreath-shaped quotient in which `x` and `y` are not conjugate.
/// For infinite `B` this is an upper estimate of the true depth.
pub fn depth_conjugacy(
    w: &WreathProduct,
    x: &WreathElement,
    y: &WreathElement,
    family: Family,
    max_index: u64,
) -> Result<Depth> {
    match exactly_conjugate(w, x, y) {
        Ok(true) => return Err(Error::ArgumentsConjugate),
        Ok(false) | Err(Error::NonAbelianBase) | Err(Error::UnsupportedActingGroup(_)) => {}
        Err(e) => return Err(e),
    }
    let quotients = wreath_quotients(w, family, max_index)?;
    first_separating(&quotients, x, y)
}

/// Least index of a quotient of `b_group` in which `x` leaves the image of `<b>`.
pub fn depth_cyclic(b_group: &Arc<Group>, b: &Elem, x: &Elem, family: Family, max_index: u64) -> Result<Depth> {
    if b_group.in_cyclic(x, b) {
        return Err(Error::ArgumentInSubgroup);
    }
    let quotients = enumerate_coc(b_group, family, max_index)?;
    Ok(cyclic_depth_in(&quotients, b, x))
}

fn cyclic_depth_in(quotients: &[QuotientMap], b: &Elem, x: &Elem) -> Depth {
    quotients
        .iter()
        .find(|q| !q.target().in_cyclic(&q.apply(x), &q.apply(b)))
        .map_or(Depth::Unreached, |q| Depth::Value(q.index() as u128))
}

/// Least index of a quotient injective on the ball of radius `n`.
pub fn residual_girth(b_group: &Arc<Group>, family: Family, n: usize, max_index: u64, cap: usize) -> Result<Depth> {
    let ball = b_group.ball(n, cap)?;
    for q in enumerate_coc(b_group, family, max_index)? {
        let mut seen = std::collections::HashSet::with_capacity(ball.len());
        if ball.iter().all(|g| seen.insert(q.apply(g))) {
            return Ok(Depth::Value(q.index() as u128));
        }
    }
    Ok(Depth::Unreached)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Conj,
    Cyclic,
    Girth,
    Short,
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Conj => "conj",
            ProfileKind::Cyclic => "cyclic",
            ProfileKind::Girth => "girth",
            ProfileKind::Short => "short",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileRow {
    pub n: usize,
    pub measured: Depth,
    /// Pairs attaining the measured maximum.
    pub witness_count: u64,
    pub bound: Option<Bound>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthProfile {
    pub kind: ProfileKind,
    pub family: Family,
    pub rows: Vec<ProfileRow>,
}

pub const CSV_HEADER: &str = "kind,family,n,measured,bound,witness_count";

impl DepthProfile {
    pub fn with_bound(mut self, formula: &BoundFormula, digit_cap: usize) -> DepthProfile {
        for row in &mut self.rows {
            row.bound = Some(closed_form_bound(formula, row.n as u64, digit_cap));
        }
        self
    }

    /// Rows where the measured value exceeds the evaluated bound.
    pub fn violations(&self) -> Vec<&ProfileRow> {
        self.rows
            .iter()
            .filter(|r| match (&r.bound, r.measured) {
                (Some(Bound::Value(b)), Depth::Value(m)) => BigUint::from(m) > *b,
                (Some(Bound::Value(_)), Depth::Unreached) => true,
                _ => false,
            })
            .collect()
    }

    pub fn to_csv(&self, stamp: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(s) = stamp {
            out.push_str(&format!("# generated {s}\n"));
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let bound = r.bound.as_ref().map_or("-".to_string(), |b| b.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.kind, self.family, r.n, r.measured, bound, r.witness_count
            ));
        }
        out
    }
}

fn pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::PreconditionViolated(e.to_string()))
}

/// Turns per-pair values tagged with the radius at which the pair appears
/// into cumulative rows `0..=n_max` (max value, multiplicity of the max).
fn cumulative_rows(kind_items: Vec<(usize, Depth, u64)>, n_max: usize) -> Vec<ProfileRow> {
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut best: Option<Depth> = None;
        let mut count = 0u64;
        for (level, d, mult) in &kind_items {
            if *level > n {
                continue;
            }
            match best {
                Some(b) if b > *d => {}
                Some(b) if b == *d => count += mult,
                _ => {
                    best = Some(*d);
                    count = *mult;
                }
            }
        }
        rows.push(ProfileRow {
            n,
            measured: best.unwrap_or(Depth::Value(0)),
            witness_count: count,
            bound: None,
        });
    }
    rows
}

/// `Conj(n)`: the largest conjugacy depth over non-conjugate pairs in the
/// norm ball of radius `n`, for `n = 0..=n_max`.
pub fn conj_profile(w: &WreathProduct, n_max: usize, family: Family, cfg: &MeasureConfig) -> Result<DepthProfile> {
    let ball = w.norm_ball(n_max, cfg.cap)?;
    let norms: Vec<usize> = ball.iter().map(|x| w.norm(x)).collect();
    // conjugacy classes among ball elements; members listed by norm
    let mut reps: Vec<usize> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, x) in ball.iter().enumerate() {
        let mut home = None;
        for (c, &r) in reps.iter().enumerate() {
            if exactly_conjugate(w, &ball[r], x)? {
                home = Some(c);
                break;
            }
        }
        match home {
            Some(c) => members[c].push(i),
            None => {
                reps.push(i);
                members.push(vec![i]);
            }
        }
    }
    let quotients = wreath_quotients(w, family, cfg.max_index)?;
    let pairs: Vec<(usize, usize)> = (0..reps.len())
        .flat_map(|a| (a + 1..reps.len()).map(move |b| (a, b)))
        .collect();
    let depths: Vec<Result<Depth>> = pool(cfg.parallelism)?.install(|| {
        pairs
            .par_iter()
            .map(|&(a, b)| first_separating(&quotients, &ball[reps[a]], &ball[reps[b]]))
            .collect()
    });
    let depths = depths.into_iter().collect::<Result<Vec<_>>>()?;
    // within a radius, a class pair contributes |C1 ∩ ball| * |C2 ∩ ball| element pairs
    let in_radius = |c: usize, n: usize| members[c].iter().filter(|&&i| norms[i] <= n).count() as u64;
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut best: Option<Depth> = None;
        let mut count = 0u64;
        for (&(a, b), d) in pairs.iter().zip(depths.iter()) {
            let mult = in_radius(a, n) * in_radius(b, n);
            if mult == 0 {
                continue;
            }
            match best {
                Some(cur) if cur > *d => {}
                Some(cur) if cur == *d => count += mult,
                _ => {
                    best = Some(*d);
                    count = mult;
                }
            }
        }
        rows.push(ProfileRow {
            n,
            measured: best.unwrap_or(Depth::Value(0)),
            witness_count: count,
            bound: None,
        });
    }
    Ok(DepthProfile {
        kind: ProfileKind::Conj,
        family,
        rows,
    })
}

/// `Cyclic(n)`: the largest `depth_cyclic(b, x)` over `b, x` in the ball of
/// radius `n` with `x` outside `<b>`.
pub fn cyclic_profile(b_group: &Arc<Group>, n_max: usize, family: Family, cfg: &MeasureConfig) -> Result<DepthProfile> {
    let ball = b_group.ball(n_max, cfg.cap)?;
    let lengths: Vec<usize> = ball.iter().map(|g| b_group.length(g).unwrap_or(usize::MAX)).collect();
    let quotients = enumerate_coc(b_group, family, cfg.max_index)?;
    let pairs: Vec<(usize, usize)> = (0..ball.len())
        .flat_map(|i| (0..ball.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| !b_group.in_cyclic(&ball[j], &ball[i]))
        .collect();
    let items: Vec<(usize, Depth, u64)> = pool(cfg.parallelism)?.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| {
                (
                    lengths[i].max(lengths[j]),
                    cyclic_depth_in(&quotients, &ball[i], &ball[j]),
                    1,
                )
            })
            .collect()
    });
    Ok(DepthProfile {
        kind: ProfileKind::Cyclic,
        family,
        rows: cumulative_rows(items, n_max),
    })
}

/// Residual girth for `n = 0..=n_max`.
pub fn girth_profile(b_group: &Arc<Group>, n_max: usize, family: Family, cfg: &MeasureConfig) -> Result<DepthProfile> {
    let rows = (0..=n_max)
        .map(|n| {
            Ok(ProfileRow {
                n,
                measured: residual_girth(b_group, family, n, cfg.max_index, cfg.cap)?,
                witness_count: 1,
                bound: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DepthProfile {
        kind: ProfileKind::Girth,
        family,
        rows,
    })
}

/// `Short(n)`: the largest shortest-conjugator length over distinct conjugate
/// pairs in the ball of radius `n`. Unreached if some pair needs a conjugator
/// longer than `search_radius`.
pub fn short_profile(
    b_group: &Arc<Group>,
    n_max: usize,
    search_radius: usize,
    cfg: &MeasureConfig,
) -> Result<DepthProfile> {
    let ball = b_group.ball(n_max, cfg.cap)?;
    let lengths: Vec<usize> = ball.iter().map(|g| b_group.length(g).unwrap_or(usize::MAX)).collect();
    let mut pairs = Vec::new();
    for i in 0..ball.len() {
        for j in i + 1..ball.len() {
            match b_group.are_conjugate(&ball[i], &ball[j]) {
                Some(true) => pairs.push((i, j)),
                Some(false) => {}
                None => return Err(Error::UnsupportedActingGroup(b_group.label().to_string())),
            }
        }
    }
    let spheres = conjugator_spheres(b_group, search_radius, cfg.cap)?;
    let items: Vec<(usize, Depth, u64)> = pool(cfg.parallelism)?.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let (g, h) = (&ball[i], &ball[j]);
                let d = first_conjugator(b_group, &spheres, g, h)
                    .map_or(Depth::Unreached, |(r, _)| Depth::Value(r as u128));
                (lengths[i].max(lengths[j]), d, 1)
            })
            .collect()
    });
    Ok(DepthProfile {
        kind: ProfileKind::Short,
        family: Family::AllFinite,
        rows: cumulative_rows(items, n_max),
    })
}

fn conjugator_spheres(b_group: &Group, radius: usize, cap: usize) -> Result<Vec<Vec<Elem>>> {
    let gens = b_group.symmetric_generators();
    crate::groups::bfs_layers(b_group.identity(), &gens, |x, s| b_group.op(x, s), radius, cap)
}

fn first_conjugator(b_group: &Group, spheres: &[Vec<Elem>], g: &Elem, h: &Elem) -> Option<(usize, Elem)> {
    spheres
        .iter()
        .enumerate()
        .find_map(|(r, sphere)| sphere.iter().find(|c| b_group.conj(c, g) == *h).map(|c| (r, c.clone())))
}

/// Length of a shortest `c` with `c g c^-1 = h`, searching up to `radius`.
pub fn shortest_conjugator(
    b_group: &Group,
    g: &Elem,
    h: &Elem,
    radius: usize,
    cap: usize,
) -> Result<Option<(usize, Elem)>> {
    let spheres = conjugator_spheres(b_group, radius, cap)?;
    Ok(first_conjugator(b_group, &spheres, g, h))
}

/// A growth function supplied as a parameter of a bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Growth {
    Const(u64),
    /// `n^d`.
    Poly(u32),
    /// `ceil(log2 n)^k`, at least 1.
    Log(u32),
    /// Measured values at `n = 0, 1, ...`; the last entry is reused beyond the table.
    Table(Vec<u64>),
}

impl Growth {
    fn eval(&self, n: &BigUint, digit_cap: usize) -> Bound {
        match self {
            Growth::Const(c) => Bound::Value(BigUint::from(*c)),
            Growth::Poly(d) => pow_capped(n, &BigUint::from(*d), digit_cap),
            Growth::Log(k) => {
                let bits = if n <= &BigUint::one() {
                    1
                } else {
                    (n - 1u32).bits().max(1)
                };
                pow_capped(&BigUint::from(bits), &BigUint::from(*k), digit_cap)
            }
            Growth::Table(t) => {
                let i = n.to_usize().unwrap_or(usize::MAX).min(t.len().saturating_sub(1));
                Bound::Value(BigUint::from(t.get(i).copied().unwrap_or(0)))
            }
        }
    }
}

/// Functions of the acting and base groups feeding the general bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundParams {
    pub short_b: Growth,
    pub girth_b: Growth,
    pub cyclic_b: Growth,
    pub conj_b: Growth,
    pub conj_a: Growth,
}

/// Closed-form upper bounds for `Conj` of a wreath product, with all
/// suppressed constants set to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundFormula {
    /// `Conj_A(n)^(|B|^3)` for finite `B`.
    FiniteActing { b_order: u64, conj_a: Growth },
    /// `max{Conj_B(n), (Psi(n) Conj_A(Psi(n) n))^(Psi(n)^3)}` for infinite abelian `A`.
    InfiniteAbelianBase(BoundParams),
    /// `max{Conj_B(n), Psi(n) 2^Psi(n)}` for finite abelian `A`.
    FiniteAbelianBase(BoundParams),
    /// `n^(n^(n^2))` for abelian `B`.
    AbelianActing,
    /// `2^(n^(n^2))` for abelian `B` and finite `A`.
    AbelianActingFiniteBase,
    /// `n^(n^(n^d))` for nilpotent `B`.
    NilpotentActing(u32),
    /// `2^(n^(n^d))` for nilpotent `B` and finite `A`.
    NilpotentActingFiniteBase(u32),
}

impl BoundFormula {
    pub fn name(&self) -> &'static str {
        match self {
            BoundFormula::FiniteActing { .. } => "finite-acting",
            BoundFormula::InfiniteAbelianBase(_) => "infinite-base",
            BoundFormula::FiniteAbelianBase(_) => "finite-base",
            BoundFormula::AbelianActing => "abelian",
            BoundFormula::AbelianActingFiniteBase => "abelian-finite-base",
            BoundFormula::NilpotentActing(_) => "nilpotent",
            BoundFormula::NilpotentActingFiniteBase(_) => "nilpotent-finite-base",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Value(BigUint),
    /// More than the configured number of decimal digits.
    Overflow,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Value(v) => write!(f, "{v}"),
            Bound::Overflow => f.write_str("overflow"),
        }
    }
}

fn digits_ok(v: &BigUint, digit_cap: usize) -> bool {
    // bits * log10(2) under-estimates the digit count by at most one
    (v.bits() as f64 * std::f64::consts::LOG10_2) <= digit_cap as f64 || v.to_string().len() <= digit_cap
}

fn capped(v: BigUint, digit_cap: usize) -> Bound {
    if digits_ok(&v, digit_cap) {
        Bound::Value(v)
    } else {
        Bound::Overflow
    }
}

/// `base^exp`, or `Overflow` when the result would exceed `digit_cap` digits.
pub fn pow_capped(base: &BigUint, exp: &BigUint, digit_cap: usize) -> Bound {
    if exp.is_zero() {
        return Bound::Value(BigUint::one());
    }
    if base <= &BigUint::one() {
        return Bound::Value(base.clone());
    }
    let exp_f = exp.to_f64().unwrap_or(f64::INFINITY);
    // base >= 2^(bits-1), so this estimate is within a factor (bits/(bits-1)) of the truth
    let lower = (base.bits() - 1) as f64 * std::f64::consts::LOG10_2 * exp_f;
    if lower > digit_cap as f64 + 1.0 || exp.to_u32().is_none() {
        return Bound::Overflow;
    }
    capped(base.pow(exp.to_u32().unwrap()), digit_cap)
}

fn mul(a: &Bound, b: &Bound, digit_cap: usize) -> Bound {
    match (a, b) {
        (Bound::Value(x), Bound::Value(y)) => capped(x * y, digit_cap),
        _ => Bound::Overflow,
    }
}

fn pow(a: &Bound, b: &Bound, digit_cap: usize) -> Bound {
    match (a, b) {
        (Bound::Value(x), Bound::Value(y)) => pow_capped(x, y, digit_cap),
        // 0 and 1 stay put under any exponent
        (Bound::Value(x), Bound::Overflow) if x <= &BigUint::one() => Bound::Value(x.clone()),
        _ => Bound::Overflow,
    }
}

fn max(a: Bound, b: Bound) -> Bound {
    match (a, b) {
        (Bound::Value(x), Bound::Value(y)) => Bound::Value(x.max(y)),
        _ => Bound::Overflow,
    }
}

/// `Phi(n) = Short_B(n) + n` and `Psi(n) = RG_B(Phi(n)) Cyclic_B(Phi(n))^(Phi(n)^2)`.
fn psi(p: &BoundParams, n: &BigUint, digit_cap: usize) -> Bound {
    let phi = match p.short_b.eval(n, digit_cap) {
        Bound::Value(s) => Bound::Value(s + n),
        Bound::Overflow => return Bound::Overflow,
    };
    let Bound::Value(phi_v) = &phi else {
        return Bound::Overflow;
    };
    let girth = p.girth_b.eval(phi_v, digit_cap);
    let cyc = p.cyclic_b.eval(phi_v, digit_cap);
    let phi_sq = pow(&phi, &Bound::Value(BigUint::from(2u32)), digit_cap);
    mul(&girth, &pow(&cyc, &phi_sq, digit_cap), digit_cap)
}

/// Evaluates a bound at `n` exactly.
pub fn closed_form_bound(formula: &BoundFormula, n: u64, digit_cap: usize) -> Bound {
    let nb = BigUint::from(n);
    let two = BigUint::from(2u32);
    let tower = |top: &BigUint, d: u32| {
        // top^(n^(n^d))
        let inner = pow_capped(&nb, &BigUint::from(d), digit_cap);
        let mid = pow(&Bound::Value(nb.clone()), &inner, digit_cap);
        pow(&Bound::Value(top.clone()), &mid, digit_cap)
    };
    match formula {
        BoundFormula::FiniteActing { b_order, conj_a } => {
            let e = BigUint::from(*b_order).pow(3);
            pow(&conj_a.eval(&nb, digit_cap), &Bound::Value(e), digit_cap)
        }
        BoundFormula::InfiniteAbelianBase(p) => {
            let psi_n = psi(p, &nb, digit_cap);
            let inner = match &psi_n {
                Bound::Value(v) => {
                    let arg = v * &nb;
                    mul(&psi_n, &p.conj_a.eval(&arg, digit_cap), digit_cap)
                }
                Bound::Overflow => Bound::Overflow,
            };
            let e = pow(&psi_n, &Bound::Value(BigUint::from(3u32)), digit_cap);
            max(p.conj_b.eval(&nb, digit_cap), pow(&inner, &e, digit_cap))
        }
        BoundFormula::FiniteAbelianBase(p) => {
            let psi_n = psi(p, &nb, digit_cap);
            let t = mul(&psi_n, &pow(&Bound::Value(two.clone()), &psi_n, digit_cap), digit_cap);
            max(p.conj_b.eval(&nb, digit_cap), t)
        }
        BoundFormula::AbelianActing => tower(&nb, 2),
        BoundFormula::AbelianActingFiniteBase => tower(&two, 2),
        BoundFormula::NilpotentActing(d) => tower(&nb, *d),
        BoundFormula::NilpotentActingFiniteBase(d) => tower(&two, *d),
    }
}

/// One quotient checked by [`pro_p_nonsep_witness`].
#[derive(Debug, Clone)]
pub struct NonSepRow {
    pub j: u32,
    pub quotient: String,
    pub index: u128,
    /// A preimage `f` with `[f, b] = pi(h)` in the quotient, when one exists.
    pub preimage: Option<WreathElement>,
}

#[derive(Debug, Clone)]
pub struct NonSepReport {
    pub product: WreathProduct,
    pub b: i64,
    pub p: u64,
    pub h: WreathElement,
    pub h_in_kb: bool,
    pub rows: Vec<NonSepRow>,
}

impl NonSepReport {
    /// True iff `h` is outside `K_b` while every quotient image lies in the image of `K_b`.
    pub fn confirmed(&self) -> bool {
        !self.h_in_kb && self.rows.iter().all(|r| r.preimage.is_some())
    }
}

impl fmt::Display for NonSepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = &self.product;
        writeln!(f, "group {w}, b = {}, p = {}", self.b, self.p)?;
        writeln!(f, "h = {}", w.format(&self.h))?;
        writeln!(f, "h in K_b: {}", self.h_in_kb)?;
        for r in &self.rows {
            match &r.preimage {
                Some(pre) => writeln!(
                    f,
                    "j={} quotient={} index={} image in K_b: yes via f={}",
                    r.j,
                    r.quotient,
                    r.index,
                    format_base(pre)
                )?,
                None => writeln!(
                    f,
                    "j={} quotient={} index={} image in K_b: no",
                    r.j, r.quotient, r.index
                )?,
            }
        }
        write!(
            f,
            "verdict: {}",
            if self.confirmed() {
                "not separable"
            } else {
                "not confirmed"
            }
        )
    }
}

fn format_base(x: &WreathElement) -> String {
    let body: Vec<String> = x
        .base
        .iter()
        .map(|(k, v)| format!("{}:{}", fmt_elem(k), fmt_elem(v)))
        .collect();
    format!("{{{}}}", body.join(", "))
}

fn fmt_elem(e: &Elem) -> String {
    match e.as_slice() {
        [x] => x.to_string(),
        xs => format!("({})", xs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
    }
}

fn gcd_i(a: i64, b: i64) -> i64 {
    crate::groups::gcd(a.unsigned_abs(), b.unsigned_abs()) as i64
}

/// Shows that `h = [g, 1]` with `g = delta_0 -> a` is outside `K_b` in `A wr Z`
/// yet its image lies in the image of `K_b` in every quotient
/// `(A/M) wr (Z/p^j)`, `j <= k_max`, with `A/M` a p-group.
pub fn pro_p_nonsep_witness(a: &Arc<Group>, b: i64, p: u64, k_max: u32) -> Result<NonSepReport> {
    if b.abs() == 1 {
        return Err(Error::PreconditionViolated("b = ±1 generates Z".into()));
    }
    if gcd_i(b, p as i64) != 1 {
        return Err(Error::PreconditionViolated(format!("gcd({b}, {p}) != 1")));
    }
    let order = a.order().unwrap_or(0);
    if !a.is_abelian() || order < 2 || !is_power_of(order, p) {
        return Err(Error::PreconditionViolated(format!(
            "{} is not a nontrivial finite abelian {p}-group",
            a.label()
        )));
    }
    let z = Group::free_abelian(1);
    let w = WreathProduct::new(Arc::clone(a), Arc::clone(&z));
    let gen = a.generators()[0].clone();
    let g = vec![(Elem::from_slice(&[0]), gen)];
    let one = Elem::from_slice(&[1]);
    let h = WreathElement::new(w.commutator(&g, &one), z.identity());
    let bz = Elem::from_slice(&[b]);
    let h_in_kb = w.in_kb(&h.base, &bz)?;

    let mut rows = Vec::new();
    let qas = enumerate_coc(a, Family::PGroups(p), order)?;
    for j in 0..=k_max {
        let m = p
            .checked_pow(j)
            .ok_or_else(|| Error::PreconditionViolated("p^k_max overflows".into()))?;
        let qb = QuotientMap::lattice(Arc::clone(&z), crate::lattice::Hnf::diagonal(&[m]))?;
        for qa in &qas {
            let q = product_quotient(&w, qa, &qb)?;
            let t = q.target();
            let hb = q.apply(&h);
            let bb = qb.apply(&bz);
            let preimage = t.solve_commutator(&hb.base, &bb)?.map(|f| {
                debug_assert_eq!(t.commutator(&f, &bb), hb.base);
                WreathElement::new(f, t.acting().identity())
            });
            rows.push(NonSepRow {
                j,
                quotient: q.descriptor(),
                index: q.index().unwrap_or(u128::MAX),
                preimage,
            });
        }
    }
    Ok(NonSepReport {
        product: w,
        b,
        p,
        h,
        h_in_kb,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(xs: &[i64]) -> Elem {
        Elem::from_slice(xs)
    }

    fn lamp(keys: &[i64], top: i64) -> WreathElement {
        WreathElement::new(keys.iter().map(|&k| (e(&[k]), e(&[1]))).collect(), e(&[top]))
    }

    #[test]
    fn depth_conjugacy_examples() {
        let l = WreathProduct::lamplighter();
        let d = depth_conjugacy(&l, &lamp(&[0], 0), &lamp(&[0, 1], 0), Family::AllFinite, 64).unwrap();
        assert_eq!(d, Depth::Value(2));
        let zz = WreathProduct::new(Group::free_abelian(1), Group::free_abelian(1));
        let d = depth_conjugacy(&zz, &lamp(&[], 1), &lamp(&[], 2), Family::AllFinite, 64).unwrap();
        assert_eq!(d, Depth::Value(2));
        assert_eq!(
            depth_conjugacy(&l, &lamp(&[0], 0), &lamp(&[4], 0), Family::AllFinite, 64),
            Err(Error::ArgumentsConjugate)
        );
    }

    #[test]
    fn depth_cyclic_examples() {
        let z = Group::free_abelian(1);
        assert_eq!(
            depth_cyclic(&z, &e(&[2]), &e(&[3]), Family::AllFinite, 8).unwrap(),
            Depth::Value(2)
        );
        assert_eq!(
            depth_cyclic(&z, &e(&[2]), &e(&[3]), Family::PGroups(3), 81).unwrap(),
            Depth::Unreached
        );
        assert_eq!(
            depth_cyclic(&z, &e(&[0]), &e(&[1]), Family::AllFinite, 8).unwrap(),
            Depth::Value(2)
        );
        assert_eq!(
            depth_cyclic(&z, &e(&[2]), &e(&[4]), Family::AllFinite, 8),
            Err(Error::ArgumentInSubgroup)
        );
    }

    #[test]
    fn girth_examples() {
        let z = Group::free_abelian(1);
        assert_eq!(
            residual_girth(&z, Family::AllFinite, 3, 100, DEFAULT_CAP).unwrap(),
            Depth::Value(7)
        );
        assert_eq!(
            residual_girth(&z, Family::PGroups(2), 3, 100, DEFAULT_CAP).unwrap(),
            Depth::Value(8)
        );
        assert_eq!(
            residual_girth(&Group::heisenberg(), Family::AllFinite, 0, 100, DEFAULT_CAP).unwrap(),
            Depth::Value(1)
        );
    }

    #[test]
    fn bound_examples() {
        let v = |b: Bound| match b {
            Bound::Value(x) => x,
            Bound::Overflow => panic!("overflow"),
        };
        assert_eq!(
            v(closed_form_bound(&BoundFormula::AbelianActing, 2, 100)),
            BigUint::from(65536u32)
        );
        assert_eq!(
            v(closed_form_bound(&BoundFormula::AbelianActing, 1, 100)),
            BigUint::from(1u32)
        );
        let f = BoundFormula::FiniteActing {
            b_order: 2,
            conj_a: Growth::Poly(1),
        };
        assert_eq!(v(closed_form_bound(&f, 3, 100)), BigUint::from(6561u32));
        assert_eq!(closed_form_bound(&BoundFormula::AbelianActing, 3, 100), Bound::Overflow);
        assert_eq!(
            v(closed_form_bound(&BoundFormula::AbelianActingFiniteBase, 1, 100)),
            BigUint::from(2u32)
        );
    }

    #[test]
    fn pow_capped_matches_exact() {
        for b in 0..6u32 {
            for x in 0..12u32 {
                let exact = BigUint::from(b).pow(x);
                assert_eq!(
                    pow_capped(&BigUint::from(b), &BigUint::from(x), 50),
                    Bound::Value(exact)
                );
            }
        }
        assert_eq!(
            pow_capped(&BigUint::from(10u32), &BigUint::from(5u32), 5),
            Bound::Overflow
        );
        assert_eq!(
            pow_capped(&BigUint::from(10u32), &BigUint::from(4u32), 5),
            Bound::Value(BigUint::from(10000u32))
        );
    }

    #[test]
    fn general_bounds_evaluate() {
        let p = BoundParams {
            short_b: Growth::Const(0),
            girth_b: Growth::Poly(1),
            cyclic_b: Growth::Poly(1),
            conj_b: Growth::Const(1),
            conj_a: Growth::Log(1),
        };
        // n = 1: Phi = 1, Psi = 1 * 1^1 = 1, finite base: max(1, 1 * 2^1) = 2
        assert_eq!(
            closed_form_bound(&BoundFormula::FiniteAbelianBase(p.clone()), 1, 100),
            Bound::Value(BigUint::from(2u32))
        );
        // n = 2: Psi = 2 * 2^4 = 32, infinite base: (32 * log(64))^(32^3) overflows
        assert_eq!(
            closed_form_bound(&BoundFormula::InfiniteAbelianBase(p), 2, 100),
            Bound::Overflow
        );
    }

    #[test]
    fn profile_rows_are_monotone() {
        let l = WreathProduct::lamplighter();
        let cfg = MeasureConfig {
            max_index: 256,
            ..Default::default()
        };
        let prof = conj_profile(&l, 2, Family::AllFinite, &cfg).unwrap();
        assert_eq!(prof.rows[0].measured, Depth::Value(0));
        assert!(prof.rows.windows(2).all(|w| w[0].measured <= w[1].measured));
        let par = conj_profile(&l, 2, Family::AllFinite, &MeasureConfig { parallelism: 4, ..cfg }).unwrap();
        assert_eq!(prof, par);
    }

    #[test]
    fn shortest_conjugator_in_s3() {
        let s3 = Group::symmetric3();
        let gens = s3.generators().to_vec();
        for g in s3.elements().unwrap() {
            let (r, c) = shortest_conjugator(&s3, &g, &g, 3, 100).unwrap().unwrap();
            assert_eq!((r, c), (0, s3.identity()));
        }
        let (a, b) = (&gens[0], &gens[1]);
        if s3.are_conjugate(a, b) == Some(true) && a != b {
            let (r, c) = shortest_conjugator(&s3, a, b, 3, 100).unwrap().unwrap();
            assert!(r >= 1);
            assert_eq!(s3.conj(&c, a), *b);
        }
    }

    #[test]
    fn short_profile_abelian_is_zero() {
        let prof = short_profile(&Group::free_abelian(2), 3, 4, &MeasureConfig::default()).unwrap();
        assert!(prof.rows.iter().all(|r| r.measured == Depth::Value(0)));
    }

    #[test]
    fn nonsep_preconditions() {
        let a = Group::cyclic(3);
        assert!(matches!(
            pro_p_nonsep_witness(&a, 1, 3, 2),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            pro_p_nonsep_witness(&a, 3, 3, 2),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            pro_p_nonsep_witness(&Group::cyclic(6), 5, 3, 2),
            Err(Error::PreconditionViolated(_))
        ));
        let r = pro_p_nonsep_witness(&a, 2, 3, 3).unwrap();
        assert!(!r.h_in_kb);
        assert!(r.confirmed());
        assert_eq!(r.rows.len(), 8);
    }

    #[test]
    fn csv_format() {
        let prof = girth_profile(&Group::free_abelian(1), 2, Family::AllFinite, &MeasureConfig::default()).unwrap();
        assert_eq!(
            prof.to_csv(None),
            "kind,family,n,measured,bound,witness_count\ngirth,all,0,1,-,1\ngirth,all,1,3,-,1\ngirth,all,2,5,-,1\n"
        );
    }
}
