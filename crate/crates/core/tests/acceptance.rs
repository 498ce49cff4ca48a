//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p wreathlab-core --test acceptance`. The process exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wreathlab::conjugacy::{ConjStatus, ConjugatorBall};
use wreathlab::separability::{cyclic_profile, girth_profile, short_profile, Bound};
use wreathlab::*;

const SEED: u64 = 0x5eed_2024;
const CAP: usize = 2_000_000;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn e(xs: &[i64]) -> Elem {
    Elem::from_slice(xs)
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ salt)
}

fn check(violations: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok && violations.len() < 5 {
        violations.push(what());
    } else if !ok {
        violations.push(String::new());
    }
}

fn verdict(violations: Vec<String>, summary: String) -> Outcome {
    if violations.is_empty() {
        Ok(summary)
    } else {
        let shown: Vec<&String> = violations.iter().filter(|v| !v.is_empty()).collect();
        Err(format!("{} violations; first: {:?}", violations.len(), shown))
    }
}

fn within(elapsed: Duration, budget: Duration) -> std::result::Result<(), String> {
    if elapsed <= budget {
        Ok(())
    } else {
        Err(format!("runtime {elapsed:.2?} over budget {budget:?}"))
    }
}

/// Test-side oracle: the conjugacy class of `x` by letting every element act.
fn orbit(w: &WreathProduct, all: &[WreathElement], x: &WreathElement) -> HashSet<WreathElement> {
    all.iter().map(|g| w.mul(&w.mul(g, x), &w.inv(g))).collect()
}

fn criterion_1() -> Outcome {
    let mut violations = Vec::new();
    let mut pairs = 0usize;
    let cases = [(2, 2, 8), (2, 3, 24), (3, 2, 18), (2, 4, 64)];
    for (a, b, order) in cases {
        let w = WreathProduct::new(Group::cyclic(a), Group::cyclic(b));
        let all = w.elements(CAP).map_err(|e| e.to_string())?;
        check(&mut violations, all.len() == order, || {
            format!("|{w}| = {} != {order}", all.len())
        });
        let orbits: Vec<HashSet<WreathElement>> = all.iter().map(|x| orbit(&w, &all, x)).collect();
        for (i, x) in all.iter().enumerate() {
            for y in &all {
                pairs += 1;
                let v = conj_finite_wreath(&w, x, y).map_err(|e| e.to_string())?;
                let truth = orbits[i].contains(y);
                check(&mut violations, v.is_conjugate() == truth, || {
                    format!(
                        "{w}: {} vs {} decided {} but orbit says {truth}",
                        w.format(x),
                        w.format(y),
                        v.line(&w)
                    )
                });
                if let Some(c) = v.witness() {
                    check(&mut violations, w.conj(x, c) == *y, || {
                        format!("{w}: bad witness {}", w.format(c))
                    });
                }
            }
        }
    }
    verdict(violations, format!("{pairs} pairs agree with orbit enumeration"))
}

fn criterion_2() -> Outcome {
    let l = WreathProduct::lamplighter();
    let ball = l.norm_ball(4, CAP).map_err(|e| e.to_string())?;
    let conjugators = ConjugatorBall::new(&l, 8, CAP).map_err(|e| e.to_string())?;
    let mut violations = Vec::new();
    let (mut conj, mut sep) = (0usize, 0usize);
    for x in &ball {
        for y in &ball {
            let v = conj_abelian_a_wreath(&l, x, y).map_err(|e| e.to_string())?;
            let brute = conjugators.find(&l, x, y);
            check(&mut violations, v.is_conjugate() == brute.is_some(), || {
                format!(
                    "{} vs {}: decider {} brute {:?}",
                    l.format(x),
                    l.format(y),
                    v.line(&l),
                    brute.map(|c| l.format(&c))
                )
            });
            if v.is_conjugate() {
                conj += 1;
                continue;
            }
            let mm = malcev_mostowski(&l, x, y, Family::AllFinite, 64, 1, CAP).map_err(|e| e.to_string())?;
            let ok = matches!(mm.status, ConjStatus::Separated { index, .. } if index <= 64);
            check(&mut violations, ok, || {
                format!("{} vs {}: {}", l.format(x), l.format(y), mm.line(&l))
            });
            sep += 1;
        }
    }
    verdict(
        violations,
        format!(
            "{} ball elements, {conj} conjugate pairs confirmed by radius-8 search, {sep} separated with index <= 64",
            ball.len()
        ),
    )
}

fn random_map(r: &mut ChaCha8Rng, w: &WreathProduct, span: i64) -> BaseMap {
    let finite = w.base().order();
    let mut pairs = Vec::new();
    for _ in 0..r.gen_range(0..5) {
        let k = r.gen_range(-span..=span);
        let v = match finite {
            Some(n) => r.gen_range(1..n as i64),
            None => r.gen_range(-3..=3),
        };
        pairs.push((e(&[k]), e(&[v])));
    }
    w.element(pairs, e(&[0])).unwrap().base
}

/// Test-side coset sums of `f` over `<b>` in `Z`, reduced into `A`.
fn coset_sums(w: &WreathProduct, f: &BaseMap, b: i64) -> BTreeMap<i64, i64> {
    let mut sums = BTreeMap::new();
    for (k, v) in f {
        let key = if b == 0 {
            k.as_slice()[0]
        } else {
            k.as_slice()[0].rem_euclid(b.abs())
        };
        *sums.entry(key).or_insert(0) += v.as_slice()[0];
    }
    if let Some(n) = w.base().order() {
        for s in sums.values_mut() {
            *s = s.rem_euclid(n as i64);
        }
    }
    sums.retain(|_, s| *s != 0);
    sums
}

fn criterion_3() -> Outcome {
    let mut violations = Vec::new();
    let mut r = rng(3);
    for w in [
        WreathProduct::lamplighter(),
        WreathProduct::new(Group::free_abelian(1), Group::free_abelian(1)),
    ] {
        for _ in 0..200 {
            let h = random_map(&mut r, &w, 6);
            let b = r.gen_range(-4..=4);
            let k = w.commutator(&h, &e(&[b]));
            check(&mut violations, coset_sums(&w, &k, b).is_empty(), || {
                format!("{w}: oracle says [h,b] outside K_b")
            });
            check(&mut violations, w.in_kb(&k, &e(&[b])).unwrap(), || {
                format!(
                    "{w}: [{}, {b}] not in K_b",
                    w.format(&WreathElement::new(h.clone(), e(&[0])))
                )
            });
        }
        let ball = ConjugatorBall::new(&w, 6, CAP).map_err(|e| e.to_string())?;
        let mut tested = 0;
        while tested < 200 {
            let f = random_map(&mut r, &w, 6);
            let b = r.gen_range(-4..=4);
            if coset_sums(&w, &f, b).is_empty() {
                continue;
            }
            tested += 1;
            check(&mut violations, !w.in_kb(&f, &e(&[b])).unwrap(), || {
                format!("{w}: f in K_b despite nonzero coset sum")
            });
            let x = WreathElement::new(Vec::new(), e(&[b]));
            let y = WreathElement::new(f.clone(), e(&[b]));
            let found = ball.find(&w, &x, &y);
            check(&mut violations, found.is_none(), || {
                format!("{w}: conjugator {} found", w.format(&y))
            });
        }
    }
    verdict(
        violations,
        "400 commutators in K_b, 400 non-members without conjugators".into(),
    )
}

fn random_elem(r: &mut ChaCha8Rng, w: &WreathProduct) -> WreathElement {
    let m = w.acting().width();
    let finite = w.base().order();
    let mut pairs = Vec::new();
    for _ in 0..r.gen_range(0..5) {
        let k: Vec<i64> = (0..m).map(|_| r.gen_range(-4..=4)).collect();
        let v = match finite {
            Some(n) => r.gen_range(0..n as i64),
            None => r.gen_range(-3..=3),
        };
        pairs.push((e(&k), e(&[v])));
    }
    let top: Vec<i64> = (0..m).map(|_| r.gen_range(-4..=4)).collect();
    w.element(pairs, e(&top)).unwrap()
}

fn criterion_4() -> Outcome {
    let mut violations = Vec::new();
    let mut r = rng(4);
    let z = Group::free_abelian(1);
    let z2 = Group::free_abelian(2);
    let mut cases: Vec<(WreathProduct, QuotientMap)> = Vec::new();
    for a in [Group::cyclic(2), Group::free_abelian(1)] {
        for m in [2, 3] {
            let q = QuotientMap::lattice(Arc::clone(&z), Hnf::diagonal(&[m])).unwrap();
            cases.push((WreathProduct::new(Arc::clone(&a), Arc::clone(&z)), q));
        }
    }
    let index2: Vec<QuotientMap> = enumerate_coc(&z2, Family::AllFinite, 2)
        .unwrap()
        .into_iter()
        .filter(|q| q.index() == 2)
        .collect();
    // Z^2 has sigma(2) = 3 sublattices of index 2
    check(&mut violations, index2.len() == 3, || {
        format!("{} index-2 lattices", index2.len())
    });
    for q in index2 {
        cases.push((WreathProduct::new(Group::cyclic(2), Arc::clone(&z2)), q));
    }
    for (w, q) in &cases {
        let ext = extend_quotient(w, q).map_err(|e| e.to_string())?;
        let t = ext.target();
        let mut in_kn_hits = 0;
        for i in 0..200 {
            let (x, y) = (random_elem(&mut r, w), random_elem(&mut r, w));
            check(
                &mut violations,
                ext.apply(&w.mul(&x, &y)) == t.mul(&ext.apply(&x), &ext.apply(&y)),
                || {
                    format!(
                        "{w} -> {}: not multiplicative on {}, {}",
                        ext.descriptor(),
                        w.format(&x),
                        w.format(&y)
                    )
                },
            );
            // half the samples are pushed into K_N: f - n.f for a random n in N
            let mut f = x.base.clone();
            if i % 2 == 0 {
                let n = loop {
                    let c: Vec<i64> = (0..w.acting().width()).map(|_| r.gen_range(-4..=4)).collect();
                    if q.in_kernel(&e(&c)) {
                        break e(&c);
                    }
                };
                f = w.base_mul(&f, &w.base_inv(&w.translate(&f, &n)));
            }
            // test-side oracle: every N-coset sum vanishes
            let mut sums: BTreeMap<Elem, Elem> = BTreeMap::new();
            for (k, v) in &f {
                let slot = sums.entry(q.apply(k)).or_insert_with(|| w.base().identity());
                *slot = w.base().op(slot, v);
            }
            let oracle = sums.values().all(|v| w.base().is_identity(v));
            let image_empty = ext
                .apply(&WreathElement::new(f.clone(), w.acting().identity()))
                .base
                .is_empty();
            let kn = in_kn(w, q, &f).map_err(|e| e.to_string())?;
            in_kn_hits += oracle as usize;
            check(&mut violations, kn == image_empty && kn == oracle, || {
                format!(
                    "{w} mod {}: in_KN {kn}, empty image {image_empty}, oracle {oracle}",
                    q.descriptor()
                )
            });
        }
        check(&mut violations, in_kn_hits >= 100, || {
            format!("only {in_kn_hits} samples in K_N")
        });
    }
    verdict(violations, format!("{} quotients x 200 pairs", cases.len()))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut violations = Vec::new();
    let z = Group::free_abelian(1);
    // exhaustive: least admissible m with k -> k mod m injective on [-n, n]
    let oracle = |n: i64, admits: &dyn Fn(u64) -> bool| {
        (1u64..)
            .find(|&m| {
                admits(m)
                    && (-n..=n).map(|k| k.rem_euclid(m as i64)).collect::<HashSet<_>>().len() == (2 * n + 1) as usize
            })
            .unwrap()
    };
    for n in 0..=10i64 {
        let got = residual_girth(&z, Family::AllFinite, n as usize, 1024, CAP).unwrap();
        let want = oracle(n, &|_| true);
        check(
            &mut violations,
            got == Depth::Value(want as u128) && want == (2 * n + 1) as u64,
            || format!("RG(Z, all, {n}) = {got}, oracle {want}"),
        );
        for p in [2u64, 3, 5] {
            let got = residual_girth(&z, Family::PGroups(p), n as usize, 1024, CAP).unwrap();
            let want = oracle(n, &|m| {
                let mut m = m;
                while m % p == 0 {
                    m /= p;
                }
                m == 1
            });
            let closed = (0..).map(|k| p.pow(k)).find(|&q| q >= (2 * n + 1) as u64).unwrap();
            check(
                &mut violations,
                got == Depth::Value(want as u128) && want == closed,
                || format!("RG(Z, p{p}, {n}) = {got}, oracle {want}, closed form {closed}"),
            );
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    verdict(violations, "n = 0..10 exact for all, p2, p3, p5".into())
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut violations = Vec::new();
    let z = Group::free_abelian(1);
    let pro3 = depth_cyclic(&z, &e(&[2]), &e(&[3]), Family::PGroups(3), 81).unwrap();
    check(&mut violations, pro3 == Depth::Unreached, || {
        format!("pro-3 cyclic depth {pro3}")
    });
    let all = depth_cyclic(&z, &e(&[2]), &e(&[3]), Family::AllFinite, 81).unwrap();
    check(&mut violations, all == Depth::Value(2), || {
        format!("cyclic depth {all}")
    });

    let a = Group::cyclic(3);
    let report = pro_p_nonsep_witness(&a, 2, 3, 3).map_err(|e| e.to_string())?;
    // test-side: h is outside K_b iff some coset sum mod 2 is nonzero in Z/3
    let w = WreathProduct::new(Arc::clone(&a), Arc::clone(&z));
    check(
        &mut violations,
        !coset_sums(&w, &report.h.base, 2).is_empty() && !report.h_in_kb,
        || "h should lie outside K_b".into(),
    );
    let mut quotient_count = 0;
    for row in &report.rows {
        quotient_count += 1;
        let m = 3i64.pow(row.j);
        let Some(pre) = &row.preimage else {
            check(&mut violations, false, || {
                format!("{}: image of h not in image of K_b", row.quotient)
            });
            continue;
        };
        if !row.quotient.starts_with("Z/") {
            // recompute [f, b](x) = f(x) - f(x - b) in Z/3 on Z/m and compare with the image of h
            let val = |x: i64| -> i64 {
                pre.base
                    .iter()
                    .filter(|(k, _)| k.as_slice()[0] == x.rem_euclid(m))
                    .map(|(_, v)| v.as_slice()[0])
                    .sum()
            };
            for x in 0..m {
                let comm = (val(x) - val(x - 2)).rem_euclid(3);
                let h_img: i64 = report
                    .h
                    .base
                    .iter()
                    .filter(|(k, _)| k.as_slice()[0].rem_euclid(m) == x)
                    .map(|(_, v)| v.as_slice()[0])
                    .sum::<i64>()
                    .rem_euclid(3);
                check(&mut violations, comm == h_img, || {
                    format!("{}: preimage fails at {x}", row.quotient)
                });
            }
        }
    }
    check(&mut violations, report.confirmed(), || "report not confirmed".into());
    check(&mut violations, quotient_count == 8, || {
        format!("{quotient_count} quotients checked")
    });
    within(start.elapsed(), Duration::from_secs(30))?;
    verdict(
        violations,
        format!("pro-3 depth unreached, all-finite depth 2, {quotient_count} p-quotients confirm"),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let cfg = MeasureConfig {
        max_index: 4096,
        parallelism: 4,
        ..Default::default()
    };
    let mut lines = Vec::new();
    let mut violations = Vec::new();
    let cases = [
        (
            WreathProduct::lamplighter(),
            3usize,
            BoundFormula::AbelianActingFiniteBase,
        ),
        (
            WreathProduct::new(Group::free_abelian(1), Group::free_abelian(1)),
            2,
            BoundFormula::AbelianActing,
        ),
    ];
    for (w, n_max, formula) in cases {
        let prof = conj_profile(&w, n_max, Family::AllFinite, &cfg)
            .map_err(|e| e.to_string())?
            .with_bound(&formula, 10_000);
        for row in &prof.rows {
            let bound = row.bound.as_ref().map_or("-".to_string(), |b| match b {
                Bound::Value(v) if v.to_string().len() > 12 => format!("~10^{}", v.to_string().len() - 1),
                other => other.to_string(),
            });
            lines.push(format!("{w} n={} measured={} bound={bound}", row.n, row.measured));
        }
        for v in prof.violations() {
            violations.push(format!(
                "{w} n={}: measured {} exceeds bound {}",
                v.n,
                v.measured,
                v.bound.as_ref().unwrap()
            ));
        }
    }
    within(start.elapsed(), Duration::from_secs(600))?;
    for l in &lines {
        println!("    {l}");
    }
    if violations.is_empty() {
        Ok("all measured values within the bounds".into())
    } else {
        Err(format!("{} violations: {}", violations.len(), violations.join("; ")))
    }
}

fn random_word(r: &mut ChaCha8Rng, m: usize, max_len: usize) -> FreeWord {
    let len = r.gen_range(0..=max_len);
    let letters = (0..len)
        .map(|_| (r.gen_range(1..=m as u32), if r.gen_bool(0.5) { 1 } else { -1 }))
        .collect();
    FreeWord::new(m, letters).unwrap()
}

fn derived_element(r: &mut ChaCha8Rng, m: usize) -> FreeWord {
    let i = r.gen_range(1..=m as u32);
    let j = loop {
        let j = r.gen_range(1..=m as u32);
        if j != i {
            break j;
        }
    };
    let c = FreeWord::commutator(&FreeWord::generator(m, i).unwrap(), &FreeWord::generator(m, j).unwrap());
    c.conjugate_by(&random_word(r, m, 4))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut violations = Vec::new();
    let mut r = rng(8);
    for _ in 0..500 {
        let m = r.gen_range(1..=3);
        let (u, v) = (random_word(&mut r, m, 10), random_word(&mut r, m, 10));
        let g = magnus_group(m);
        let (eu, ev) = (magnus_embed(&u), magnus_embed(&v));
        check(&mut violations, magnus_embed(&u.mul(&v)) == g.mul(&eu, &ev), || {
            format!("not multiplicative on {u} * {v}")
        });
        check(
            &mut violations,
            eu.top.as_slice() == u.exponent_sums().as_slice(),
            || format!("top of {u} is not its exponent sums"),
        );
    }
    for _ in 0..20 {
        let m = r.gen_range(2..=3);
        // products of conjugated commutators of derived-subgroup elements
        let mut w = FreeWord::identity(m);
        for _ in 0..2 {
            let (c1, c2) = (
                derived_element(&mut r, m),
                derived_element(&mut r, m).mul(&derived_element(&mut r, m)),
            );
            w = w.mul(&FreeWord::commutator(&c1, &c2).conjugate_by(&random_word(&mut r, m, 4)));
        }
        check(&mut violations, metabelian_is_identity(&w), || {
            format!("second-derived element {w} maps to non-identity")
        });
        check(&mut violations, !w.is_empty(), || "degenerate sample".into());
    }
    let m = 5;
    let mut basic = 0;
    for i in 1..=m as u32 {
        for j in 1..=m as u32 {
            if i != j {
                basic += 1;
                let c = FreeWord::commutator(&FreeWord::generator(m, i).unwrap(), &FreeWord::generator(m, j).unwrap());
                check(&mut violations, !metabelian_is_identity(&c), || {
                    format!("{c} maps to the identity")
                });
            }
        }
    }
    check(&mut violations, basic == 20, || format!("{basic} basic commutators"));
    for _ in 0..100 {
        let m = r.gen_range(2..=3);
        let (w, u) = (random_word(&mut r, m, 8), random_word(&mut r, m, 6));
        let y = w.conjugate_by(&u);
        let v = metabelian_conjugate(&w, &y).map_err(|e| e.to_string())?;
        let g = magnus_group(m);
        let ok = v
            .witness()
            .is_some_and(|c| g.conj(&magnus_embed(&w), c) == magnus_embed(&y));
        check(&mut violations, ok, || format!("{w} vs {y}: {}", v.line(&g)));
    }
    let c = FreeWord::parse("[x1,x2]", 2).unwrap();
    let c2 = c.pow(2);
    let v = metabelian_conjugate(&c, &c2).map_err(|e| e.to_string())?;
    check(&mut violations, v.is_not_conjugate(), || {
        format!("[x1,x2] vs its square: {}", v.line(&magnus_group(2)))
    });
    let g = magnus_group(2);
    let brute = conj_bruteforce(&g, &magnus_embed(&c), &magnus_embed(&c2), 4, CAP).map_err(|e| e.to_string())?;
    check(&mut violations, !brute.is_conjugate(), || {
        "brute force found a conjugator".into()
    });
    within(start.elapsed(), Duration::from_secs(60))?;
    verdict(
        violations,
        format!("500 products, 20 + 20 kernel samples, 100 conjugate pairs, seed {SEED:#x}"),
    )
}

fn campaign_csvs(parallelism: usize) -> std::result::Result<Vec<String>, String> {
    let cfg = MeasureConfig {
        max_index: 512,
        parallelism,
        ..Default::default()
    };
    let z = Group::free_abelian(1);
    let err = |e: Error| e.to_string();
    Ok(vec![
        conj_profile(&WreathProduct::lamplighter(), 2, Family::AllFinite, &cfg)
            .map_err(err)?
            .with_bound(&BoundFormula::AbelianActingFiniteBase, 10_000)
            .to_csv(None),
        conj_profile(
            &WreathProduct::new(Arc::clone(&z), Arc::clone(&z)),
            2,
            Family::PGroups(2),
            &cfg,
        )
        .map_err(err)?
        .to_csv(None),
        cyclic_profile(&Group::free_abelian(2), 2, Family::AllFinite, &cfg)
            .map_err(err)?
            .to_csv(None),
        girth_profile(&z, 6, Family::PGroups(3), &cfg)
            .map_err(err)?
            .to_csv(None),
        short_profile(&Group::heisenberg(), 2, 4, &cfg)
            .map_err(err)?
            .to_csv(None),
    ])
}

fn criterion_9() -> Outcome {
    let mut violations = Vec::new();
    let first = campaign_csvs(1)?;
    let again = campaign_csvs(1)?;
    let wide = campaign_csvs(8)?;
    for (i, csv) in first.iter().enumerate() {
        check(&mut violations, *csv == again[i], || {
            format!("campaign {i} differs between sequential reruns")
        });
        check(&mut violations, *csv == wide[i], || {
            format!("campaign {i} differs between parallelism 1 and 8")
        });
    }
    verdict(
        violations,
        format!(
            "{} campaigns byte-identical across reruns and parallelism 1/8",
            first.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("finite-wreath oracle equivalence", criterion_1),
        ("lamplighter decider equivalence", criterion_2),
        ("K_b criterion", criterion_3),
        ("quotient machinery", criterion_4),
        ("residual girth exact values", criterion_5),
        ("pro-p phenomena", criterion_6),
        ("bound shape check", criterion_7),
        ("Magnus pipeline", criterion_8),
        ("determinism", criterion_9),
    ];
    let budgets = [10u64, 300, 600, 600, 1, 30, 600, 60, 600];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    println!("acceptance suite, seed {SEED:#x}");
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let result = run().and_then(|msg| within(start.elapsed(), Duration::from_secs(budgets[i])).map(|_| msg));
        let took = start.elapsed();
        match result {
            Ok(msg) => println!("PASS {n} {name}: {msg} ({took:.2?})"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {n} {name}: {msg} ({took:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
