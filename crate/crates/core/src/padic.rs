//! Fixed-precision p-adic integers.
//!
//! A [`Padic`] is an element of `Z_p / p^N Z_p`. All arithmetic is exact
//! modulo `p^N`; nothing is ever silently rounded. Two values only combine
//! when they agree on both `p` and `N`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::ParseError;

/// Default number of digits carried by p-adic values.
pub const DEFAULT_PRECISION: u32 = 8;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Padic {
    p: u64,
    precision: u32,
    residue: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Padic {
    /// Modulus `p^N`, or `None` when it does not fit in 63 bits.
    pub fn modulus(p: u64, precision: u32) -> Option<u64> {
        let mut m: u64 = 1;
        for _ in 0..precision {
            m = m.checked_mul(p)?;
        }
        (m < (1 << 62)).then_some(m)
    }

    pub fn check_params(p: u64, precision: u32) -> Result<u64, ParseError> {
        if !is_prime(p) {
            return Err(ParseError::invalid(format!("p-adic base {p} is not prime")));
        }
        if precision == 0 {
            return Err(ParseError::invalid("p-adic precision must be at least 1"));
        }
        Self::modulus(p, precision).ok_or_else(|| ParseError::invalid(format!("p^N too large for p={p}, N={precision}")))
    }

    /// Panics if `p` is not prime or `p^N` overflows; use [`Padic::check_params`]
    /// on untrusted parameters.
    pub fn from_i64(p: u64, precision: u32, v: i64) -> Padic {
        let m = Self::modulus(p, precision).expect("p^N fits in 62 bits");
        let r = (v as i128).rem_euclid(m as i128) as u64;
        Padic { p, precision, residue: r }
    }

    pub fn zero(p: u64, precision: u32) -> Padic {
        Self::from_i64(p, precision, 0)
    }

    pub fn one(p: u64, precision: u32) -> Padic {
        Self::from_i64(p, precision, 1)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Representative in `[0, p^N)`.
    pub fn residue(&self) -> u64 {
        self.residue
    }

    fn m(&self) -> u64 {
        Self::modulus(self.p, self.precision).unwrap()
    }

    /// Representative in `(-p^N/2, p^N/2]`.
    pub fn signed(&self) -> i64 {
        let m = self.m();
        if self.residue > m / 2 {
            self.residue as i64 - m as i64
        } else {
            self.residue as i64
        }
    }

    fn same_ring(&self, other: &Padic) {
        assert!(
            self.p == other.p && self.precision == other.precision,
            "mixing p-adic rings ({}, {}) and ({}, {})",
            self.p,
            self.precision,
            other.p,
            other.precision
        );
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    /// p-adic valuation, capped at `N` for zero.
    pub fn valuation(&self) -> u32 {
        if self.residue == 0 {
            return self.precision;
        }
        let mut r = self.residue;
        let mut v = 0;
        while r % self.p == 0 {
            r /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self) -> bool {
        self.residue % self.p != 0
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self) -> Option<Padic> {
        if !self.is_unit() {
            return None;
        }
        let m = self.m() as i128;
        let (mut old_r, mut r) = (self.residue as i128, m);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        Some(Padic { residue: old_s.rem_euclid(m) as u64, ..*self })
    }

    /// Base-p digits, least significant first, exactly `N` of them.
    pub fn digits(&self) -> Vec<u64> {
        let mut r = self.residue;
        (0..self.precision)
            .map(|_| {
                let d = r % self.p;
                r /= self.p;
                d
            })
            .collect()
    }

    /// Serializes as little-endian base-p digits (`0-9a-z`).
    pub fn to_digit_string(&self) -> String {
        self.digits().into_iter().map(|d| std::char::from_digit(d as u32, 36).unwrap()).collect()
    }

    /// Parses the little-endian digit string written by [`Padic::to_digit_string`].
    pub fn from_digit_string(p: u64, s: &str) -> Result<Padic, ParseError> {
        if p > 36 {
            return Err(ParseError::invalid("digit strings support p <= 36 only"));
        }
        let precision = s.chars().count() as u32;
        Self::check_params(p, precision)?;
        let mut residue: u64 = 0;
        for (i, c) in s.chars().rev().enumerate() {
            let d = c
                .to_digit(36)
                .filter(|&d| (d as u64) < p)
                .ok_or_else(|| ParseError::invalid(format!("bad base-{p} digit {c:?} at index {}", precision as usize - 1 - i)))?;
            residue = residue * p + d as u64;
        }
        Ok(Padic { p, precision, residue })
    }

    pub fn add(&self, o: &Padic) -> Padic {
        self.same_ring(o);
        let m = self.m();
        Padic { residue: ((self.residue as u128 + o.residue as u128) % m as u128) as u64, ..*self }
    }

    pub fn neg(&self) -> Padic {
        let m = self.m();
        Padic { residue: (m - self.residue) % m, ..*self }
    }

    pub fn sub(&self, o: &Padic) -> Padic {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Padic) -> Padic {
        self.same_ring(o);
        let m = self.m();
        Padic { residue: ((self.residue as u128 * o.residue as u128) % m as u128) as u64, ..*self }
    }

    pub fn scale(&self, k: i64) -> Padic {
        self.mul(&Padic::from_i64(self.p, self.precision, k))
    }
}

impl fmt::Debug for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}^{}", self.signed(), self.p, self.precision)
    }
}

/// Serialized as its little-endian digit string.
impl Serialize for Padic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_digit_string())
    }
}

impl fmt::Display for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signed())
    }
}
