//! The coefficient calculus of the Ducci map.
//!
//! `a_{r,s}` is defined by `D^r(0, ..., 0, 1) = (a_{r,n}, a_{r,n-1}, ..., a_{r,1})`.
//! Row 0 is the indicator of `s = 1` and every later row follows the cyclic
//! Pascal rule `a_{r,s} = a_{r-1,s} + a_{r-1,s-1}`. Coordinate `i` of `D^r(x)`
//! is `sum_s a_{r,s} * x_{i+s-1}` with indices taken cyclically.
//!
//! The column index `s` is 1-based and is always normalized by
//! `s -> ((s - 1) mod n) + 1`, so any integer (including zero and negative
//! values) addresses a column.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::{DucciSystem, ResidueTuple};

/// Default cap on `(r_max + 1) * n` stored cells.
pub const DEFAULT_MAX_CELLS: u64 = 1 << 26;

/// Maps any integer column index to `1..=n`.
pub fn normalize_column(n: usize, s: i64) -> usize {
    ((s - 1).rem_euclid(n as i64) + 1) as usize
}

/// Rows `0..=r_max` of `a_{r,s} mod m`. Rows are extended on demand and kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffTable {
    sys: DucciSystem,
    max_cells: u64,
    rows: Vec<Vec<u64>>,
}

impl CoeffTable {
    pub fn new(sys: DucciSystem) -> Self {
        Self::with_cap(sys, DEFAULT_MAX_CELLS)
    }

    pub fn with_cap(sys: DucciSystem, max_cells: u64) -> Self {
        let mut row0 = vec![0; sys.len()];
        row0[0] = 1 % sys.modulus();
        Self {
            sys,
            max_cells,
            rows: vec![row0],
        }
    }

    pub fn system(&self) -> &DucciSystem {
        &self.sys
    }

    /// Highest row computed so far.
    pub fn r_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn extend_to(&mut self, r: usize) -> Result<()> {
        let cells = (r as u64 + 1).saturating_mul(self.sys.len() as u64);
        if cells > self.max_cells {
            return Err(Error::CapExceeded {
                what: "coefficient table",
                cap: self.max_cells,
            });
        }
        let n = self.sys.len();
        while self.rows.len() <= r {
            let prev = self.rows.last().unwrap();
            let next = (0..n)
                .map(|j| self.sys.add_mod(prev[j], prev[(j + n - 1) % n]))
                .collect();
            self.rows.push(next);
        }
        Ok(())
    }

    /// Row `r` as `[a_{r,1}, ..., a_{r,n}]`.
    pub fn row(&mut self, r: usize) -> Result<&[u64]> {
        self.extend_to(r)?;
        Ok(&self.rows[r])
    }

    /// `a_{r,s} mod m`.
    pub fn get(&mut self, r: usize, s: i64) -> Result<u64> {
        let col = normalize_column(self.sys.len(), s);
        Ok(self.row(r)?[col - 1])
    }

    /// Like [`get`](Self::get) but only reads rows already computed.
    pub fn cell(&self, r: usize, s: i64) -> Option<u64> {
        let col = normalize_column(self.sys.len(), s);
        self.rows.get(r).map(|row| row[col - 1])
    }

    /// `D^r(u)` evaluated through the coefficient expansion.
    pub fn apply(&mut self, u: &ResidueTuple, r: usize) -> Result<ResidueTuple> {
        self.sys.validate(u)?;
        let sys = self.sys;
        let n = sys.len();
        let row = self.row(r)?;
        let x = u.entries();
        let out = (0..n)
            .map(|i| {
                row.iter().enumerate().fold(0, |acc, (s, &a)| {
                    sys.add_mod(acc, sys.mul_mod(a, x[(i + s) % n]))
                })
            })
            .collect();
        Ok(ResidueTuple::from_raw(out))
    }

    pub fn view(&mut self, view: CoeffView) -> Result<u64> {
        let (r, s) = view.cell(&self.sys)?;
        self.get(r, s)
    }

    /// CSV with header `r,s,value`, rows ascending then columns ascending.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,s,value\n");
        for (r, row) in self.rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let _ = writeln!(out, "{r},{},{v}", j + 1);
            }
        }
        out
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }
}

/// Builds rows `0..=r_max`.
pub fn coeff_table(sys: &DucciSystem, r_max: usize) -> Result<CoeffTable> {
    let mut table = CoeffTable::new(*sys);
    table.extend_to(r_max)?;
    Ok(table)
}

pub fn coeff_at(sys: &DucciSystem, r: usize, s: i64) -> Result<u64> {
    CoeffTable::new(*sys).get(r, s)
}

pub fn apply_coeff_expansion(sys: &DucciSystem, u: &ResidueTuple, r: usize) -> Result<ResidueTuple> {
    CoeffTable::new(*sys).apply(u, r)
}

/// Shorthand for cells at rows that are multiples of `2^{k-1}`, for `n = 2^k`:
///
/// * `F { gamma, delta }` is `a_{gamma 2^{k-1}, delta}`
/// * `G { gamma, epsilon, delta }` is `a_{gamma 2^{k-1}, epsilon 2^{k-2} + delta}` (needs `k >= 2`)
/// * `H { gamma, delta }` is `a_{gamma 2^{k-1} - 1, delta}`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoeffView {
    F { gamma: i64, delta: i64 },
    G { gamma: i64, epsilon: i64, delta: i64 },
    H { gamma: i64, delta: i64 },
}

impl CoeffView {
    /// The `(r, s)` cell this view addresses in `sys`.
    pub fn cell(&self, sys: &DucciSystem) -> Result<(usize, i64)> {
        let k = sys.pow2_n().ok_or_else(|| {
            Error::Hypothesis(format!("coefficient views need n = 2^k, got n = {}", sys.len()))
        })?;
        if k == 0 {
            return Err(Error::Hypothesis("coefficient views need k >= 1".into()));
        }
        let half = 1i64 << (k - 1);
        let (r, s) = match *self {
            CoeffView::F { gamma, delta } => (gamma * half, delta),
            CoeffView::G {
                gamma,
                epsilon,
                delta,
            } => {
                if k < 2 {
                    return Err(Error::Hypothesis("g-views need k >= 2".into()));
                }
                (gamma * half, epsilon * (half / 2) + delta)
            }
            CoeffView::H { gamma, delta } => (gamma * half - 1, delta),
        };
        let r = usize::try_from(r).map_err(|_| {
            Error::InvalidParameter(format!("view {self:?} addresses negative row {r}"))
        })?;
        Ok((r, s))
    }
}

pub fn coeff_view(sys: &DucciSystem, view: CoeffView) -> Result<u64> {
    CoeffTable::new(*sys).view(view)
}

/// `C(N, K) mod 2^l` without big integers.
///
/// The power of two in `C(N, K)` is the number of carries when adding `K` and
/// `N - K` in base 2. The odd part comes from odd-factorial products: the odd
/// part of `N!` is `prod_{j >= 0} F(N >> j)` where `F(x)` is the product of the
/// odd numbers up to `x`, and `F` is periodic mod `2^l` up to a power of the
/// block product `F(2^l - 1)`.
#[derive(Clone, Debug)]
pub struct Pow2Binomial {
    l: u32,
    mask: u64,
    block: u64,
    // F(x) mod 2^l for x in 0..2^l when l is small.
    table: Option<Vec<u64>>,
}

const TABLE_MAX_EXP: u32 = 16;

impl Pow2Binomial {
    pub fn new(l: u32) -> Result<Self> {
        if !(1..=64).contains(&l) {
            return Err(Error::InvalidParameter(format!(
                "exponent l must be in 1..=64, got {l}"
            )));
        }
        let mask = if l == 64 { u64::MAX } else { (1u64 << l) - 1 };
        // Product of all units mod 2^l: -1 for l <= 2, +1 otherwise.
        let block = if l <= 2 { mask } else { 1 };
        let table = (l <= TABLE_MAX_EXP).then(|| {
            let size = 1usize << l;
            let mut t = Vec::with_capacity(size);
            let mut acc = 1u64;
            for x in 0..size as u64 {
                if x & 1 == 1 {
                    acc = acc.wrapping_mul(x) & mask;
                }
                t.push(acc);
            }
            t
        });
        Ok(Self {
            l,
            mask,
            block,
            table,
        })
    }

    pub fn exponent(&self) -> u32 {
        self.l
    }

    pub fn binom(&self, n: u64, k: u64) -> Result<u64> {
        if k > n {
            return Err(Error::InvalidParameter(format!(
                "binomial C({n}, {k}) needs K <= N"
            )));
        }
        let carries = k.count_ones() + (n - k).count_ones() - n.count_ones();
        if carries >= self.l {
            return Ok(0);
        }
        let denom = self.odd_factorial(k).wrapping_mul(self.odd_factorial(n - k)) & self.mask;
        let odd = self
            .odd_factorial(n)
            .wrapping_mul(inverse_odd(denom))
            & self.mask;
        Ok((odd << carries) & self.mask)
    }

    /// Odd part of `x!` mod `2^l`.
    fn odd_factorial(&self, mut x: u64) -> u64 {
        let mut acc = 1u64;
        while x > 0 {
            acc = acc.wrapping_mul(self.odd_product_upto(x)) & self.mask;
            x >>= 1;
        }
        acc
    }

    /// `F(x)`: product of odd numbers `<= x`, mod `2^l`.
    fn odd_product_upto(&self, x: u64) -> u64 {
        let (blocks, rem) = if self.l == 64 {
            (0, x)
        } else {
            (x >> self.l, x & self.mask)
        };
        let partial = match &self.table {
            Some(t) => t[rem as usize],
            None => (1..=rem)
                .step_by(2)
                .fold(1u64, |acc, i| acc.wrapping_mul(i) & self.mask),
        };
        let block_pow = if self.block == 1 || blocks % 2 == 0 {
            1
        } else {
            self.block
        };
        block_pow.wrapping_mul(partial) & self.mask
    }
}

/// Inverse of an odd number mod `2^64` by Newton iteration.
fn inverse_odd(a: u64) -> u64 {
    debug_assert!(a & 1 == 1);
    let mut x = a; // correct to 3 bits
    for _ in 0..5 {
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
    }
    x
}

/// `C(N, K) mod 2^l`.
pub fn binom_mod_pow2(n: u64, k: u64, l: u32) -> Result<u64> {
    if !(1..=64).contains(&l) {
        return Err(Error::InvalidParameter(format!(
            "exponent l must be in 1..=64, got {l}"
        )));
    }
    // Small exponents get the table; large ones fall back to a direct product
    // over at most N odd numbers.
    let engine = if l <= 12 {
        Pow2Binomial::new(l)?
    } else {
        let mask = if l == 64 { u64::MAX } else { (1u64 << l) - 1 };
        Pow2Binomial {
            l,
            mask,
            block: 1,
            table: None,
        }
    };
    engine.binom(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(m: u64, n: usize) -> DucciSystem {
        DucciSystem::new(m, n).unwrap()
    }

    /// Independent oracle: Pascal's rule mod 2^l, row by row.
    fn pascal_rows_mod(n_max: usize, modulus: u64) -> Vec<Vec<u64>> {
        let mut rows = vec![vec![1 % modulus]];
        for n in 1..=n_max {
            let prev = &rows[n - 1];
            let mut row = vec![1 % modulus; n + 1];
            for k in 1..n {
                row[k] = (prev[k - 1] + prev[k]) % modulus;
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn table_examples() {
        let s = z(4, 4);
        let mut t = coeff_table(&s, 5).unwrap();
        assert_eq!(t.row(3).unwrap(), &[1, 3, 3, 1]);
        assert_eq!(t.row(4).unwrap(), &[2, 0, 2, 0]);
        assert_eq!(t.row(5).unwrap(), &[2, 2, 2, 2]);
        assert_eq!(t.get(5, 1).unwrap(), 2);
        assert_eq!(t.row(0).unwrap(), &[1, 0, 0, 0]);
        assert_eq!(coeff_table(&z(7, 5), 0).unwrap().rows()[0], vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn rows_match_iteration_of_basic_tuple() {
        for (m, n) in [(4, 4), (3, 5), (6, 3), (2, 8), (5, 1)] {
            let s = z(m, n);
            let mut t = CoeffTable::new(s);
            let mut cur = s.basic_tuple();
            for r in 0..40 {
                let mut reversed = cur.entries().to_vec();
                reversed.reverse();
                assert_eq!(t.row(r).unwrap(), &reversed[..], "{s} r={r}");
                cur = s.step(&cur).unwrap();
            }
        }
    }

    #[test]
    fn coeff_at_examples() {
        let s = z(4, 4);
        assert_eq!(coeff_at(&s, 4, 1).unwrap(), 2);
        assert_eq!(coeff_at(&s, 2, 3).unwrap(), 1);
        assert_eq!(coeff_at(&s, 2, 4).unwrap(), 0);
        // normalization
        assert_eq!(coeff_at(&s, 2, 0).unwrap(), coeff_at(&s, 2, 4).unwrap());
        assert_eq!(coeff_at(&s, 3, -2).unwrap(), coeff_at(&s, 3, 2).unwrap());
        assert_eq!(normalize_column(4, 9), 1);
        assert_eq!(normalize_column(4, -3), 1);
        assert_eq!(normalize_column(4, 4), 4);
    }

    #[test]
    fn expansion_examples() {
        let s = z(4, 3);
        let u = s.tuple(&[3, 1, 3]).unwrap();
        assert_eq!(
            apply_coeff_expansion(&s, &u, 2).unwrap(),
            s.tuple(&[0, 2, 2]).unwrap()
        );
        assert_eq!(apply_coeff_expansion(&s, &u, 0).unwrap(), u);
        let s = z(2, 4);
        assert_eq!(
            apply_coeff_expansion(&s, &s.basic_tuple(), 4).unwrap(),
            s.zero()
        );
    }

    #[test]
    fn table_cap() {
        let mut t = CoeffTable::with_cap(z(4, 4), 16);
        assert!(t.extend_to(3).is_ok());
        assert!(matches!(t.extend_to(4), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn csv_layout() {
        let t = coeff_table(&z(4, 2), 1).unwrap();
        assert_eq!(t.to_csv(), "r,s,value\n0,1,1\n0,2,0\n1,1,1\n1,2,1\n");
    }

    #[test]
    fn view_examples() {
        let s = DucciSystem::pow2(2, 2).unwrap();
        assert_eq!(coeff_view(&s, CoeffView::F { gamma: 1, delta: 1 }).unwrap(), 1);
        assert_eq!(
            coeff_view(
                &s,
                CoeffView::G {
                    gamma: 2,
                    epsilon: 2,
                    delta: 1
                }
            )
            .unwrap(),
            2
        );
        assert_eq!(coeff_view(&s, CoeffView::H { gamma: 3, delta: 1 }).unwrap(), 2);
        let k1 = DucciSystem::pow2(1, 2).unwrap();
        assert!(matches!(
            coeff_view(
                &k1,
                CoeffView::G {
                    gamma: 1,
                    epsilon: 1,
                    delta: 1
                }
            ),
            Err(Error::Hypothesis(_))
        ));
        assert!(coeff_view(&z(4, 3), CoeffView::F { gamma: 1, delta: 1 }).is_err());
        assert!(coeff_view(&s, CoeffView::H { gamma: 0, delta: 1 }).is_err());
    }

    #[test]
    fn binom_examples() {
        assert_eq!(binom_mod_pow2(4, 2, 2).unwrap(), 2);
        assert_eq!(binom_mod_pow2(8, 4, 3).unwrap(), 6);
        assert_eq!(binom_mod_pow2(3, 2, 2).unwrap(), 3);
        for n in [0, 1, 17, 1 << 20] {
            assert_eq!(binom_mod_pow2(n, 0, 5).unwrap(), 1);
        }
        assert!(binom_mod_pow2(3, 4, 2).is_err());
        assert!(binom_mod_pow2(3, 1, 0).is_err());
        assert!(binom_mod_pow2(3, 1, 65).is_err());
    }

    #[test]
    fn block_product_matches_direct() {
        for l in 1..=TABLE_MAX_EXP {
            let e = Pow2Binomial::new(l).unwrap();
            let t = e.table.as_ref().unwrap();
            assert_eq!(t[t.len() - 1], e.block, "l={l}");
        }
    }

    #[test]
    fn binom_matches_pascal_small() {
        let rows = pascal_rows_mod(300, 1 << 8);
        for l in 1..=8 {
            let e = Pow2Binomial::new(l).unwrap();
            for (n, row) in rows.iter().enumerate() {
                for (k, &v) in row.iter().enumerate() {
                    assert_eq!(
                        e.binom(n as u64, k as u64).unwrap(),
                        v & ((1 << l) - 1),
                        "C({n},{k}) mod 2^{l}"
                    );
                }
            }
        }
    }

    #[test]
    fn binom_large_exponents_match_exact() {
        // Exact values fit in u128 up to N = 120.
        let mut row: Vec<u128> = vec![1];
        for n in 1..=120u64 {
            let mut next = vec![1u128; n as usize + 1];
            for k in 1..n as usize {
                next[k] = row[k - 1] + row[k];
            }
            row = next;
            for l in [13, 20, 31, 40, 63, 64] {
                let mask = if l == 64 { u128::from(u64::MAX) } else { (1u128 << l) - 1 };
                for (k, &exact) in row.iter().enumerate() {
                    assert_eq!(
                        binom_mod_pow2(n, k as u64, l).unwrap() as u128,
                        exact & mask,
                        "C({n},{k}) mod 2^{l}"
                    );
                }
            }
        }
    }

    #[test]
    fn inverse_odd_is_inverse() {
        for a in (1..10_001u64).step_by(2).chain([u64::MAX, u64::MAX - 2]) {
            assert_eq!(a.wrapping_mul(inverse_odd(a)), 1);
        }
    }
}
