//! Shared fixtures for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wreathlab::{Elem, FreeWord, Group, WreathElement, WreathProduct};

pub const SEED: u64 = 0xbe7c4;

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

pub fn z_wr_z() -> WreathProduct {
    WreathProduct::new(Group::free_abelian(1), Group::free_abelian(1))
}

/// A random element of `A wr Z` with `support` points in `[-span, span]`.
pub fn random_element(w: &WreathProduct, r: &mut ChaCha8Rng, support: usize, span: i64) -> WreathElement {
    let modulus = w.base().order();
    let pairs = (0..support)
        .map(|_| {
            let v = match modulus {
                Some(n) => r.gen_range(0..n as i64),
                None => r.gen_range(-5..=5),
            };
            (Elem::from_slice(&[r.gen_range(-span..=span)]), Elem::from_slice(&[v]))
        })
        .collect();
    w.element(pairs, Elem::from_slice(&[r.gen_range(-span..=span)]))
        .unwrap()
}

/// `x` together with a conjugate of it by a random element.
pub fn conjugate_pair(
    w: &WreathProduct,
    r: &mut ChaCha8Rng,
    support: usize,
    span: i64,
) -> (WreathElement, WreathElement) {
    let x = random_element(w, r, support, span);
    let c = random_element(w, r, support, span);
    let y = w.conj(&x, &c);
    (x, y)
}

pub fn random_word(r: &mut ChaCha8Rng, rank: usize, len: usize) -> FreeWord {
    let letters = (0..len)
        .map(|_| (r.gen_range(1..=rank as u32), if r.gen_bool(0.5) { 1 } else { -1 }))
        .collect();
    FreeWord::new(rank, letters).unwrap()
}
