//! Full-rank sublattices of `Z^m` in Hermite normal form.
//!
//! A sublattice is stored by the rows of an upper triangular basis matrix with
//! positive diagonal and every entry above the diagonal reduced into
//! `[0, d_j)` where `d_j` is the diagonal entry of its column. Each full-rank
//! sublattice has exactly one such basis, so equality of `Hnf` values is
//! equality of lattices.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hnf {
    rows: Vec<Vec<i64>>,
}

impl Hnf {
    /// Builds the lattice from HNF rows, rejecting anything not in canonical form.
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Option<Hnf> {
        let m = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m || row[i] <= 0 {
                return None;
            }
            if row[..i].iter().any(|&x| x != 0) {
                return None;
            }
            for j in i + 1..m {
                if row[j] < 0 || row[j] >= rows[j][j] {
                    return None;
                }
            }
        }
        Some(Hnf { rows })
    }

    pub fn diagonal(diag: &[u64]) -> Hnf {
        let m = diag.len();
        let rows = (0..m)
            .map(|i| (0..m).map(|j| if i == j { diag[i] as i64 } else { 0 }).collect())
            .collect();
        Hnf { rows }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn diag(&self, i: usize) -> i64 {
        self.rows[i][i]
    }

    /// `[Z^m : L]`, the product of the diagonal.
    pub fn index(&self) -> u64 {
        self.rows.iter().enumerate().map(|(i, r)| r[i] as u64).product()
    }

    /// Canonical coset representative of `v + L`, inside the box `prod [0, d_i)`.
    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let mut out = v.to_vec();
        self.reduce_in_place(&mut out);
        out
    }

    pub fn reduce_in_place(&self, v: &mut [i64]) {
        debug_assert_eq!(v.len(), self.rank());
        for (i, row) in self.rows.iter().enumerate() {
            let q = v[i].div_euclid(row[i]);
            if q != 0 {
                for j in i..v.len() {
                    v[j] -= q * row[j];
                }
            }
        }
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        let mut w = v.to_vec();
        self.reduce_in_place(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Every full-rank sublattice of `Z^rank` with index at most `max_index`,
    /// restricted to those whose diagonal entries all satisfy `diag_ok`.
    /// Sorted by `(index, rows)`.
    pub fn enumerate(rank: usize, max_index: u64, diag_ok: impl Fn(u64) -> bool) -> Vec<Hnf> {
        let mut out = Vec::new();
        if rank == 0 {
            if max_index >= 1 {
                out.push(Hnf { rows: Vec::new() });
            }
            return out;
        }
        let mut diag = vec![0u64; rank];
        enumerate_diagonals(&mut diag, 0, max_index, &diag_ok, &mut |d| {
            fill_upper(d, &mut out);
        });
        out.sort_by(|a, b| a.index().cmp(&b.index()).then_with(|| a.rows.cmp(&b.rows)));
        out
    }
}

fn enumerate_diagonals(
    diag: &mut Vec<u64>,
    pos: usize,
    budget: u64,
    diag_ok: &impl Fn(u64) -> bool,
    emit: &mut impl FnMut(&[u64]),
) {
    if pos == diag.len() {
        emit(diag);
        return;
    }
    for d in 1..=budget {
        if !diag_ok(d) {
            continue;
        }
        diag[pos] = d;
        enumerate_diagonals(diag, pos + 1, budget / d, diag_ok, emit);
    }
}

fn fill_upper(diag: &[u64], out: &mut Vec<Hnf>) {
    let m = diag.len();
    // free slots (i, j) with i < j, entry in [0, diag[j])
    let slots: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let mut base = Hnf::diagonal(diag);
    let mut counter = vec![0i64; slots.len()];
    loop {
        for (k, &(i, j)) in slots.iter().enumerate() {
            base.rows[i][j] = counter[k];
        }
        out.push(base.clone());
        let mut k = 0;
        loop {
            if k == slots.len() {
                return;
            }
            counter[k] += 1;
            if counter[k] < diag[slots[k].1] as i64 {
                break;
            }
            counter[k] = 0;
            k += 1;
        }
    }
}

impl fmt::Display for Hnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
