//! The ambient ring `Z_m^n` and the two structure maps acting on it: the
//! Ducci map `D(x_1, ..., x_n) = (x_1 + x_2, x_2 + x_3, ..., x_n + x_1)` and the
//! cyclic shift `H(x_1, ..., x_n) = (x_2, ..., x_n, x_1)`.
//!
//! Positions are 0-based in code. Text and CLI output use the conventional
//! 1-based reading `(x_1, ..., x_n)`, which only matters for error messages.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a Ducci system on `Z_m^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DucciSystem {
    m: u64,
    n: usize,
    pow2_m: Option<u32>,
    pow2_n: Option<u32>,
}

fn pow2_exponent(x: u64) -> Option<u32> {
    x.is_power_of_two().then(|| x.trailing_zeros())
}

impl DucciSystem {
    pub fn new(m: u64, n: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "modulus must be at least 2, got {m}"
            )));
        }
        if n < 1 {
            return Err(Error::InvalidParameter(
                "tuple length must be at least 1".into(),
            ));
        }
        Ok(Self {
            m,
            n,
            pow2_m: pow2_exponent(m),
            pow2_n: pow2_exponent(n as u64),
        })
    }

    /// The system `Z_{2^l}^{2^k}`.
    pub fn pow2(k: u32, l: u32) -> Result<Self> {
        if l == 0 || l > 63 {
            return Err(Error::InvalidParameter(format!(
                "exponent l must be in 1..=63, got {l}"
            )));
        }
        if k > 40 {
            return Err(Error::InvalidParameter(format!(
                "exponent k must be at most 40, got {k}"
            )));
        }
        Self::new(1u64 << l, 1usize << k)
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.m
    }

    /// Tuple length `n`; never zero.
    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.n
    }

    /// `Some(l)` when `m = 2^l`.
    pub fn pow2_m(&self) -> Option<u32> {
        self.pow2_m
    }

    /// `Some(k)` when `n = 2^k`.
    pub fn pow2_n(&self) -> Option<u32> {
        self.pow2_n
    }

    /// Number of states `m^n`, or `None` if it does not fit in a `u64`.
    pub fn state_count(&self) -> Option<u64> {
        let n = u32::try_from(self.n).ok()?;
        self.m.checked_pow(n)
    }

    /// `m^n`, checked against `cap`.
    pub(crate) fn state_count_capped(&self, what: &'static str, cap: u64) -> Result<u64> {
        match self.state_count() {
            Some(count) if count <= cap => Ok(count),
            _ => Err(Error::CapExceeded { what, cap }),
        }
    }

    /// Builds a tuple from arbitrary integers, reducing every entry into `[0, m)`.
    pub fn tuple(&self, entries: &[i64]) -> Result<ResidueTuple> {
        self.check_len(entries.len())?;
        Ok(ResidueTuple(
            entries.iter().map(|&e| self.reduce_signed(e)).collect(),
        ))
    }

    /// Builds a tuple from residues that must already lie in `[0, m)`.
    pub fn tuple_from_residues(&self, entries: Vec<u64>) -> Result<ResidueTuple> {
        let u = ResidueTuple(entries);
        self.validate(&u)?;
        Ok(u)
    }

    /// Parses `"(3,1,3)"` or `"3,1,3"`. The flag reports whether any entry had
    /// to be reduced mod `m`.
    pub fn parse_tuple(&self, text: &str) -> Result<(ResidueTuple, bool)> {
        let parse_err = |reason: String| Error::Parse {
            input: text.to_string(),
            reason,
        };
        let trimmed = text.trim();
        let body = match (trimmed.strip_prefix('('), trimmed.strip_suffix(')')) {
            (Some(_), Some(_)) => &trimmed[1..trimmed.len() - 1],
            (None, None) => trimmed,
            _ => return Err(parse_err("unbalanced parentheses".into())),
        };
        let raw = body
            .split(',')
            .map(|part| {
                let part = part.trim();
                part.parse::<i64>()
                    .map_err(|e| parse_err(format!("entry {part:?}: {e}")))
            })
            .collect::<Result<Vec<i64>>>()?;
        let u = self.tuple(&raw)?;
        let reduced = raw
            .iter()
            .zip(u.entries())
            .any(|(&orig, &res)| orig < 0 || orig as u64 != res);
        Ok((u, reduced))
    }

    pub fn zero(&self) -> ResidueTuple {
        ResidueTuple(vec![0; self.n])
    }

    /// The tuple `(0, ..., 0, 1)` whose orbit is the basic Ducci sequence.
    pub fn basic_tuple(&self) -> ResidueTuple {
        let mut entries = vec![0; self.n];
        entries[self.n - 1] = 1;
        ResidueTuple(entries)
    }

    pub fn validate(&self, u: &ResidueTuple) -> Result<()> {
        self.check_len(u.0.len())?;
        match u.0.iter().position(|&e| e >= self.m) {
            Some(position) => Err(Error::OutOfRange {
                position: position + 1,
                value: u.0[position],
                modulus: self.m,
            }),
            None => Ok(()),
        }
    }

    /// One application of the Ducci map.
    pub fn step(&self, u: &ResidueTuple) -> Result<ResidueTuple> {
        self.validate(u)?;
        let mut out = vec![0; self.n];
        self.step_into(&u.0, &mut out);
        Ok(ResidueTuple(out))
    }

    /// `D^r(u)` by repeated stepping.
    pub fn iterate(&self, u: &ResidueTuple, r: u64) -> Result<ResidueTuple> {
        self.validate(u)?;
        let mut cur = u.0.clone();
        let mut next = vec![0; self.n];
        for _ in 0..r {
            self.step_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(ResidueTuple(cur))
    }

    /// Left cyclic rotation `H`.
    pub fn shift(&self, u: &ResidueTuple) -> Result<ResidueTuple> {
        self.validate(u)?;
        let mut entries = u.0.clone();
        entries.rotate_left(1);
        Ok(ResidueTuple(entries))
    }

    pub fn add(&self, u: &ResidueTuple, v: &ResidueTuple) -> Result<ResidueTuple> {
        self.validate(u)?;
        self.validate(v)?;
        Ok(ResidueTuple(
            u.0.iter()
                .zip(&v.0)
                .map(|(&a, &b)| self.add_mod(a, b))
                .collect(),
        ))
    }

    /// Entrywise `lambda * u`. The scalar is reduced mod `m` first.
    pub fn scale(&self, lambda: u64, u: &ResidueTuple) -> Result<ResidueTuple> {
        self.validate(u)?;
        let lambda = lambda % self.m;
        Ok(ResidueTuple(
            u.0.iter().map(|&a| self.mul_mod(lambda, a)).collect(),
        ))
    }

    /// Base-`m` index of `u`, first entry most significant, so index order is
    /// lexicographic order.
    pub fn encode(&self, u: &ResidueTuple) -> Result<u64> {
        self.validate(u)?;
        let count = self.state_count().ok_or(Error::CapExceeded {
            what: "state index",
            cap: u64::MAX,
        })?;
        debug_assert!(count > 0);
        Ok(self.encode_raw(&u.0))
    }

    pub fn decode(&self, index: u64) -> Result<ResidueTuple> {
        match self.state_count() {
            Some(count) if index < count => {
                let mut out = vec![0; self.n];
                self.decode_into(index, &mut out);
                Ok(ResidueTuple(out))
            }
            _ => Err(Error::InvalidParameter(format!(
                "state index {index} is outside Z_{}^{}",
                self.m, self.n
            ))),
        }
    }

    // Unchecked kernels for the enumeration loops. Callers guarantee that
    // slices have length n and entries are reduced.

    #[inline]
    pub(crate) fn step_into(&self, src: &[u64], dst: &mut [u64]) {
        let n = self.n;
        for i in 0..n {
            let j = if i + 1 == n { 0 } else { i + 1 };
            dst[i] = self.add_mod(src[i], src[j]);
        }
    }

    #[inline]
    pub(crate) fn encode_raw(&self, entries: &[u64]) -> u64 {
        entries.iter().fold(0, |acc, &e| acc * self.m + e)
    }

    #[inline]
    pub(crate) fn decode_into(&self, mut index: u64, out: &mut [u64]) {
        for slot in out.iter_mut().rev() {
            *slot = index % self.m;
            index /= self.m;
        }
    }

    #[inline]
    pub(crate) fn add_mod(&self, a: u64, b: u64) -> u64 {
        let (s, overflow) = a.overflowing_add(b);
        if overflow || s >= self.m {
            s.wrapping_sub(self.m)
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn mul_mod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    fn reduce_signed(&self, e: i64) -> u64 {
        (e as i128).rem_euclid(self.m as i128) as u64
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found == self.n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.n,
                found,
            })
        }
    }
}

impl fmt::Display for DucciSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{}^{}", self.m, self.n)
    }
}

/// An `n`-tuple of residues; one state of the Ducci dynamics.
///
/// Ordering is lexicographic on entries. A tuple does not carry its modulus;
/// every operation on [`DucciSystem`] validates its operands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResidueTuple(Vec<u64>);

impl ResidueTuple {
    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn into_entries(self) -> Vec<u64> {
        self.0
    }

    pub(crate) fn from_raw(entries: Vec<u64>) -> Self {
        Self(entries)
    }
}

/// Canonical text form, e.g. `(3,1,3)`.
impl fmt::Display for ResidueTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}
