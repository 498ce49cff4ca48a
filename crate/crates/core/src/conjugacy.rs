//! Conjugacy in wreath products: exact deciders, a conjugator search and the
//! interleaved search/separation engine.

use std::collections::HashSet;
use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::groups::Elem;
use crate::quotients::{wreath_quotients, Family, WreathQuotientMap};
use crate::wreath::{BaseMap, WreathElement, WreathProduct};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotConjReason {
    /// The tops are not conjugate in the acting group.
    Tops,
    /// No translation carries one base map to the other.
    Translation,
    /// The coset profiles of the base maps do not match.
    Profile,
    /// Some orbit product pair is not conjugate in the base group.
    CosetProduct,
}

impl fmt::Display for NotConjReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NotConjReason::Tops => "tops",
            NotConjReason::Translation => "translation",
            NotConjReason::Profile => "profile",
            NotConjReason::CosetProduct => "coset-product",
        })
    }
}

#[derive(Debug, Clone)]
pub enum ConjStatus {
    Conjugate { witness: WreathElement },
    NotConjugate { reason: NotConjReason },
    Separated { quotient: WreathQuotientMap, index: u128 },
    Exhausted { radius: usize, index: u64 },
}

#[derive(Debug, Clone)]
pub struct ConjVerdict {
    pub status: ConjStatus,
    pub elapsed: Duration,
}

impl ConjVerdict {
    fn timed(start: Instant, status: ConjStatus) -> ConjVerdict {
        ConjVerdict {
            status,
            elapsed: start.elapsed(),
        }
    }

    pub fn is_conjugate(&self) -> bool {
        matches!(self.status, ConjStatus::Conjugate { .. })
    }

    /// True for verdicts that settle non-conjugacy.
    pub fn is_not_conjugate(&self) -> bool {
        matches!(
            self.status,
            ConjStatus::NotConjugate { .. } | ConjStatus::Separated { .. }
        )
    }

    pub fn witness(&self) -> Option<&WreathElement> {
        match &self.status {
            ConjStatus::Conjugate { witness } => Some(witness),
            _ => None,
        }
    }

    /// One-line report, e.g. `CONJ witness={}@1` or `SEP quotient=(Z/2)wr(Z/2) index=8`.
    pub fn line(&self, w: &WreathProduct) -> String {
        match &self.status {
            ConjStatus::Conjugate { witness } => format!("CONJ witness={}", w.format(witness)),
            ConjStatus::NotConjugate { reason } => format!("NOTCONJ reason={reason}"),
            ConjStatus::Separated { quotient, index } => {
                format!("SEP quotient={} index={index}", quotient.descriptor())
            }
            ConjStatus::Exhausted { radius, index } => format!("EXHAUSTED r={radius} i={index}"),
        }
    }
}

/// Breadth-first conjugator candidates, grown one sphere at a time.
pub struct ConjugatorSearch<'a> {
    w: &'a WreathProduct,
    gens: Vec<WreathElement>,
    seen: HashSet<WreathElement>,
    sphere: Vec<WreathElement>,
    radius: usize,
    cap: usize,
}

impl<'a> ConjugatorSearch<'a> {
    pub fn new(w: &'a WreathProduct, cap: usize) -> ConjugatorSearch<'a> {
        let id = w.identity();
        ConjugatorSearch {
            w,
            gens: w.symmetric_generators(),
            seen: HashSet::from([id.clone()]),
            sphere: vec![id],
            radius: 0,
            cap,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn sphere(&self) -> &[WreathElement] {
        &self.sphere
    }

    /// Moves to the next sphere.
    pub fn grow(&mut self) -> Result<()> {
        let mut next = Vec::new();
        for x in &self.sphere {
            for s in &self.gens {
                let y = self.w.mul(x, s);
                if self.seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        if self.seen.len() > self.cap {
            return Err(Error::CapExceeded { cap: self.cap });
        }
        self.sphere = next;
        self.radius += 1;
        Ok(())
    }

    /// A conjugator `c` in the current sphere with `c x c^-1 = y`.
    pub fn find_in_sphere(&self, x: &WreathElement, y: &WreathElement) -> Option<WreathElement> {
        self.sphere
            .iter()
            .find(|c| self.w.mul(c, x) == self.w.mul(y, c))
            .cloned()
    }
}

/// Precomputed ball of conjugators for repeated brute-force queries.
pub struct ConjugatorBall {
    spheres: Vec<Vec<WreathElement>>,
}

impl ConjugatorBall {
    pub fn new(w: &WreathProduct, radius: usize, cap: usize) -> Result<ConjugatorBall> {
        Ok(ConjugatorBall {
            spheres: w.spheres(radius, cap)?,
        })
    }

    pub fn radius(&self) -> usize {
        self.spheres.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.spheres.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The first conjugator in breadth-first order, if any.
    pub fn find(&self, w: &WreathProduct, x: &WreathElement, y: &WreathElement) -> Option<WreathElement> {
        self.spheres
            .iter()
            .flatten()
            .find(|c| w.mul(c, x) == w.mul(y, c))
            .cloned()
    }
}

/// Searches every conjugator of word length at most `radius`.
pub fn conj_bruteforce(
    w: &WreathProduct,
    x: &WreathElement,
    y: &WreathElement,
    radius: usize,
    cap: usize,
) -> Result<ConjVerdict> {
    let start = Instant::now();
    let ball = ConjugatorBall::new(w, radius, cap)?;
    let status = match ball.find(w, x, y) {
        Some(witness) => ConjStatus::Conjugate { witness },
        None => ConjStatus::Exhausted { radius, index: 0 },
    };
    Ok(ConjVerdict::timed(start, status))
}

fn map_value(f: &[(Elem, Elem)], key: &Elem) -> Option<Elem> {
    f.binary_search_by(|(k, _)| k.cmp(key)).ok().map(|i| f[i].1.clone())
}

/// Decides conjugacy when both `A` and `B` are finite.
///
/// Tops are matched by some `d` with `d b1 d^-1 = b2`. Along each orbit
/// `x_i = b^i t` the equation `c(x_i) f1(x_i) c(x_{i-1})^-1 = f2(x_i)` is
/// solvable iff the orbit products `f(x_{n-1})...f(x_0)` are conjugate in `A`.
pub fn conj_finite_wreath(w: &WreathProduct, x: &WreathElement, y: &WreathElement) -> Result<ConjVerdict> {
    let start = Instant::now();
    let (ag, bg) = (w.base(), w.acting());
    if !ag.is_finite() || !bg.is_finite() {
        return Err(Error::NotFinite);
    }
    let a_all = ag.elements()?;
    let b_all = bg.elements()?;
    let b2 = &y.top;
    let n = bg.element_order(b2).expect("finite group") as i64;
    let value = |f: &[(Elem, Elem)], key: &Elem| map_value(f, key).unwrap_or_else(|| ag.identity());

    // orbits of <b2> acting on B from the left, each as x_0 .. x_{n-1}
    let mut orbits: Vec<Vec<Elem>> = Vec::new();
    let mut covered: HashSet<Elem> = HashSet::new();
    for t in &b_all {
        if covered.contains(t) {
            continue;
        }
        let orbit: Vec<Elem> = (0..n).map(|i| bg.op(&bg.power(b2, i), t)).collect();
        covered.extend(orbit.iter().cloned());
        orbits.push(orbit);
    }
    let orbit_product = |f: &[(Elem, Elem)], orbit: &[Elem]| {
        orbit
            .iter()
            .rev()
            .fold(ag.identity(), |acc, p| ag.op(&acc, &value(f, p)))
    };

    let mut tops_match = false;
    'outer: for d in &b_all {
        if bg.conj(d, &x.top) != *b2 {
            continue;
        }
        tops_match = true;
        let shift = WreathElement::new(Vec::new(), d.clone());
        let f1 = w.conj(x, &shift).base;
        let f2 = &y.base;
        let mut c: Vec<(Elem, Elem)> = Vec::new();
        for orbit in &orbits {
            let q1 = orbit_product(&f1, orbit);
            let q2 = orbit_product(f2, orbit);
            let z = match a_all.iter().find(|z| ag.conj(z, &q1) == q2) {
                Some(z) => z.clone(),
                None => continue 'outer,
            };
            let mut prev = z;
            for p in orbit {
                let cur = ag.op(&ag.op(&value(f2, p), &prev), &ag.inv(&value(&f1, p)));
                c.push((p.clone(), cur.clone()));
                prev = cur;
            }
        }
        let c = w.element(c, bg.identity())?;
        let witness = w.mul(&c, &shift);
        debug_assert_eq!(w.conj(x, &witness), *y);
        return Ok(ConjVerdict::timed(start, ConjStatus::Conjugate { witness }));
    }
    let reason = if tops_match {
        NotConjReason::CosetProduct
    } else {
        NotConjReason::Tops
    };
    Ok(ConjVerdict::timed(start, ConjStatus::NotConjugate { reason }))
}

/// Translation candidates `t s^-1`, identity first, then in sorted order.
fn candidates(w: &WreathProduct, sf: &[Elem], sg: &[Elem]) -> Vec<Elem> {
    let bg = w.acting();
    let one = bg.identity();
    let mut out: Vec<Elem> = Vec::new();
    for s in sf.iter().chain(std::iter::once(&one)) {
        let s_inv = bg.inv(s);
        for t in sg.iter().chain(std::iter::once(&one)) {
            out.push(bg.op(t, &s_inv));
        }
    }
    out.sort();
    out.dedup();
    out.retain(|c| *c != one);
    out.insert(0, one);
    out
}

/// Decides conjugacy for abelian `A` and abelian `B`.
///
/// Conjugating `(f, b)` by `(h, c)` gives `((c.f) [h, b], b)`, so `(f, b) ~ (g, b)`
/// iff `g (c.f)^-1` lies in `K_b` for some `c`. Only finitely many `c`
/// matter: those carrying a support coset of `f` to one of `g`.
pub fn conj_abelian_a_wreath(w: &WreathProduct, x: &WreathElement, y: &WreathElement) -> Result<ConjVerdict> {
    let start = Instant::now();
    if !w.abelian_base() {
        return Err(Error::NonAbelianBase);
    }
    if !w.acting().is_abelian() {
        return Err(Error::UnsupportedActingGroup(w.acting().label().to_string()));
    }
    let done = |status| Ok(ConjVerdict::timed(start, status));
    if x.top != y.top {
        return done(ConjStatus::NotConjugate {
            reason: NotConjReason::Tops,
        });
    }
    let b = &x.top;
    if w.acting().is_identity(b) {
        let sf: Vec<Elem> = x.support().cloned().collect();
        let sg: Vec<Elem> = y.support().cloned().collect();
        if sf.len() == sg.len() {
            for c in candidates(w, &sf, &sg) {
                if w.translate(&x.base, &c) == y.base {
                    let witness = WreathElement::new(Vec::new(), c);
                    debug_assert_eq!(w.conj(x, &witness), *y);
                    return done(ConjStatus::Conjugate { witness });
                }
            }
        }
        return done(ConjStatus::NotConjugate {
            reason: NotConjReason::Translation,
        });
    }
    let fr = w.reduce_support(&x.base, b)?;
    let gr = w.reduce_support(&y.base, b)?;
    if fr.len() == gr.len() {
        let sf: Vec<Elem> = fr.iter().map(|(k, _)| k.clone()).collect();
        let sg: Vec<Elem> = gr.iter().map(|(k, _)| k.clone()).collect();
        for c in candidates(w, &sf, &sg) {
            let moved = w.translate(&x.base, &c);
            let diff: BaseMap = w.base_mul(&y.base, &w.base_inv(&moved));
            if let Some(h) = w.solve_commutator(&diff, b)? {
                let witness = WreathElement::new(h, c);
                debug_assert_eq!(w.conj(x, &witness), *y);
                return done(ConjStatus::Conjugate { witness });
            }
        }
    }
    done(ConjStatus::NotConjugate {
        reason: NotConjReason::Profile,
    })
}

/// Interleaves a conjugator search with a scan of finite wreath quotients.
///
/// Step `s` first tests the `s`-th quotient (so separation wins ties) and then
/// the conjugators of word length `s`. The first decisive outcome is returned.
pub fn malcev_mostowski(
    w: &WreathProduct,
    x: &WreathElement,
    y: &WreathElement,
    family: Family,
    max_index: u64,
    conj_radius: usize,
    cap: usize,
) -> Result<ConjVerdict> {
    let start = Instant::now();
    let quotients = if max_index == 0 {
        Vec::new()
    } else {
        wreath_quotients(w, family, max_index)?
    };
    let mut search = ConjugatorSearch::new(w, cap);
    let steps = quotients.len().max(conj_radius + 1);
    for s in 0..steps {
        if let Some(q) = quotients.get(s) {
            if separates(q, x, y)? {
                let index = q.index().expect("finite quotient");
                return Ok(ConjVerdict::timed(
                    start,
                    ConjStatus::Separated {
                        quotient: q.clone(),
                        index,
                    },
                ));
            }
        }
        if s <= conj_radius {
            if s > 0 {
                search.grow()?;
            }
            if let Some(witness) = search.find_in_sphere(x, y) {
                return Ok(ConjVerdict::timed(start, ConjStatus::Conjugate { witness }));
            }
        }
    }
    Ok(ConjVerdict::timed(
        start,
        ConjStatus::Exhausted {
            radius: conj_radius,
            index: max_index,
        },
    ))
}

/// True iff the images of `x` and `y` under `q` are not conjugate.
pub fn separates(q: &WreathQuotientMap, x: &WreathElement, y: &WreathElement) -> Result<bool> {
    let (qx, qy) = (q.apply(x), q.apply(y));
    Ok(!conj_finite_wreath(q.target(), &qx, &qy)?.is_conjugate())
}

/// Picks the exact decider that applies to `w`, falling back to `malcev_mostowski`.
pub fn decide(
    w: &WreathProduct,
    x: &WreathElement,
    y: &WreathElement,
    family: Family,
    max_index: u64,
    conj_radius: usize,
    cap: usize,
) -> Result<ConjVerdict> {
    if w.base().is_finite() && w.acting().is_finite() {
        conj_finite_wreath(w, x, y)
    } else if w.abelian_base() && w.acting().is_abelian() {
        conj_abelian_a_wreath(w, x, y)
    } else {
        malcev_mostowski(w, x, y, family, max_index, conj_radius, cap)
    }
}
