//! Dense univariate and sparse bivariate polynomials over a prime field.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::ParseError;

fn inv_mod(a: u64, q: u64) -> u64 {
    crate::lattice::mod_inverse(a as i64, q as i64).expect("nonzero residue mod a prime") as u64
}

/// A polynomial in `t` over `F_q`, coefficients from the constant term up.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    q: u64,
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(q: u64, coeffs: Vec<u64>) -> Poly {
        let mut p = Poly { q, coeffs: coeffs.into_iter().map(|c| c % q).collect() };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn zero(q: u64) -> Poly {
        Poly { q, coeffs: Vec::new() }
    }

    pub fn constant(q: u64, c: u64) -> Poly {
        Poly::new(q, vec![c])
    }

    pub fn one(q: u64) -> Poly {
        Poly::constant(q, 1)
    }

    /// `t`.
    pub fn var(q: u64) -> Poly {
        Poly::new(q, vec![0, 1])
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let c = (0..n).map(|i| self.coeffs.get(i).unwrap_or(&0) + o.coeffs.get(i).unwrap_or(&0)).collect();
        Poly::new(self.q, c)
    }

    pub fn neg(&self) -> Poly {
        self.scale(self.q - 1)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: u64) -> Poly {
        Poly::new(self.q, self.coeffs.iter().map(|x| x * (c % self.q)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(self.q);
        }
        let mut c = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] = (c[i + j] + a * b) % self.q;
            }
        }
        Poly::new(self.q, c)
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::one(self.q), |acc, _| acc.mul(self))
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let inv = inv_mod(d.leading(), self.q);
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; self.coeffs.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let c = rem[rem.len() - 1] * inv % self.q;
            quot[shift] = c;
            for (i, &dc) in d.coeffs.iter().enumerate() {
                rem[shift + i] = (rem[shift + i] + self.q * self.q - c * dc % self.q) % self.q;
            }
            while rem.last() == Some(&0) {
                rem.pop();
            }
        }
        (Poly::new(self.q, quot), Poly::new(self.q, rem))
    }

    /// Monic greatest common divisor (zero only for two zero inputs).
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic().1
    }

    /// `(leading coefficient, monic associate)`.
    pub fn monic(&self) -> (u64, Poly) {
        if self.is_zero() {
            return (0, self.clone());
        }
        let lead = self.leading();
        (lead, self.scale(inv_mod(lead, self.q)))
    }

    /// Multiplicity of `p` as a factor of a nonzero polynomial.
    pub fn multiplicity(&self, p: &Poly) -> u32 {
        let mut n = 0;
        let mut cur = self.clone();
        loop {
            let (quot, rem) = cur.div_rem(p);
            if !rem.is_zero() {
                return n;
            }
            n += 1;
            cur = quot;
        }
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % self.q)
    }

    /// Every monic polynomial of exactly degree `d`.
    pub fn monics_of_degree(q: u64, d: usize) -> Vec<Poly> {
        let count = q.pow(d as u32);
        (0..count)
            .map(|code| {
                let mut c: Vec<u64> = (0..d).map(|i| code / q.pow(i as u32) % q).collect();
                c.push(1);
                Poly::new(q, c)
            })
            .collect()
    }

    /// Irreducible by trial division against the monic irreducibles of
    /// degree at most half of its own.
    pub fn is_irreducible(&self) -> bool {
        let Some(d) = self.degree() else { return false };
        if d == 0 {
            return false;
        }
        irreducibles(self.q, d / 2).iter().filter(|p| p.degree().unwrap() <= d / 2).all(|p| !self.div_rem(p).1.is_zero())
    }

    pub fn parse(q: u64, s: &str) -> Result<Poly, ParseError> {
        let mut out = Poly::zero(q);
        for (coeff, exps) in parse_terms(s, &['t'])? {
            let mut c = vec![0; exps[0] as usize + 1];
            c[exps[0] as usize] = coeff.rem_euclid(q as i64) as u64;
            out = out.add(&Poly::new(q, c));
        }
        Ok(out)
    }
}

/// Monic irreducibles of degree `1..=max_degree` over `F_q`, by degree then
/// coefficients. Tables are built once per `(q, degree)` by sieving.
pub fn irreducibles(q: u64, max_degree: usize) -> Arc<Vec<Poly>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<Vec<Poly>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(q, max_degree)) {
        return t.clone();
    }
    let mut table: Vec<Poly> = Vec::new();
    for d in 1..=max_degree {
        for p in Poly::monics_of_degree(q, d) {
            if table.iter().take_while(|f| 2 * f.degree().unwrap() <= d).all(|f| !p.div_rem(f).1.is_zero()) {
                table.push(p);
            }
        }
    }
    let table = Arc::new(table);
    cache.lock().unwrap().insert((q, max_degree), table.clone());
    table
}

fn fmt_terms(f: &mut fmt::Formatter<'_>, terms: impl Iterator<Item = (u64, String)>) -> fmt::Result {
    let mut first = true;
    for (c, mono) in terms {
        if !first {
            write!(f, "+")?;
        }
        first = false;
        match (c, mono.is_empty()) {
            (_, true) => write!(f, "{c}")?,
            (1, false) => write!(f, "{mono}")?,
            _ => write!(f, "{c}{mono}")?,
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

fn power(var: char, e: u32) -> String {
    match e {
        0 => String::new(),
        1 => var.to_string(),
        _ => format!("{var}^{e}"),
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.coeffs.iter().enumerate().rev().filter(|(_, &c)| c != 0).map(|(i, &c)| (c, power('t', i as u32)));
        fmt_terms(f, terms)
    }
}

/// Splits `2t^2+t-1` style input into `(coefficient, exponents)` terms.
/// Each variable may appear at most once per term.
fn parse_terms(s: &str, vars: &[char]) -> Result<Vec<(i64, Vec<u32>)>, ParseError> {
    let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(ParseError::invalid("empty polynomial"));
    }
    let mut terms = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let start = i;
        let mut sign = 1i64;
        if chars[i] == '+' || chars[i] == '-' {
            if chars[i] == '-' {
                sign = -1;
            }
            i += 1;
        } else if start != 0 {
            return Err(ParseError::at("expected '+' or '-'", 1, i + 1));
        }
        let num_start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        let coeff: i64 = if i > num_start {
            chars[num_start..i].iter().collect::<String>().parse().map_err(|_| ParseError::at("coefficient too large", 1, num_start + 1))?
        } else {
            1
        };
        let mut exps = vec![0u32; vars.len()];
        let mut any_var = false;
        while i < chars.len() && (vars.contains(&chars[i]) || chars[i] == '*') {
            if chars[i] == '*' {
                i += 1;
                continue;
            }
            let v = vars.iter().position(|&c| c == chars[i]).unwrap();
            if exps[v] != 0 {
                return Err(ParseError::at(format!("variable {} repeated in one term", vars[v]), 1, i + 1));
            }
            i += 1;
            let mut e = 1u32;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let e_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                e = chars[e_start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| ParseError::at("expected an exponent", 1, e_start + 1))?;
                if e > 64 {
                    return Err(ParseError::at("exponent too large", 1, e_start + 1));
                }
            }
            exps[v] = e;
            any_var = true;
        }
        if i == num_start && !any_var {
            let what = chars.get(i).map_or("end of input".to_string(), |c| format!("'{c}'"));
            return Err(ParseError::at(format!("unexpected {what}"), 1, i + 1));
        }
        terms.push((sign * coeff, exps));
    }
    Ok(terms)
}

/// A polynomial in `x, y` over `F_q`, keyed by `(x-exponent, y-exponent)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BiPoly {
    q: u64,
    terms: BTreeMap<(u32, u32), u64>,
}

impl BiPoly {
    pub fn zero(q: u64) -> BiPoly {
        BiPoly { q, terms: BTreeMap::new() }
    }

    pub fn monomial(q: u64, c: u64, i: u32, j: u32) -> BiPoly {
        let mut p = BiPoly::zero(q);
        if c % q != 0 {
            p.terms.insert((i, j), c % q);
        }
        p
    }

    pub fn one(q: u64) -> BiPoly {
        BiPoly::monomial(q, 1, 0, 0)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), u64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &BiPoly) -> BiPoly {
        let mut terms = self.terms.clone();
        for (&m, &c) in &o.terms {
            let e = terms.entry(m).or_insert(0);
            *e = (*e + c) % self.q;
            if *e == 0 {
                terms.remove(&m);
            }
        }
        BiPoly { q: self.q, terms }
    }

    pub fn scale(&self, c: u64) -> BiPoly {
        let c = c % self.q;
        if c == 0 {
            return BiPoly::zero(self.q);
        }
        BiPoly { q: self.q, terms: self.terms.iter().map(|(&m, &v)| (m, v * c % self.q)).collect() }
    }

    pub fn neg(&self) -> BiPoly {
        self.scale(self.q - 1)
    }

    pub fn sub(&self, o: &BiPoly) -> BiPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero(self.q);
        for (&(i, j), &a) in &self.terms {
            for (&(k, l), &b) in &o.terms {
                out = out.add(&BiPoly::monomial(self.q, a * b, i + k, j + l));
            }
        }
        out
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> (u32, u32) {
        let i = self.terms.keys().map(|m| m.0).min().unwrap_or(0);
        let j = self.terms.keys().map(|m| m.1).min().unwrap_or(0);
        (i, j)
    }

    pub fn divide_monomial(&self, (i, j): (u32, u32)) -> BiPoly {
        BiPoly { q: self.q, terms: self.terms.iter().map(|(&(a, b), &c)| ((a - i, b - j), c)).collect() }
    }

    /// Coefficient of the largest monomial in `(y, x)` order.
    pub fn leading(&self) -> u64 {
        self.terms.iter().max_by_key(|((i, j), _)| (*j, *i)).map_or(0, |(_, &c)| c)
    }

    pub fn parse(q: u64, s: &str) -> Result<BiPoly, ParseError> {
        let mut out = BiPoly::zero(q);
        for (coeff, exps) in parse_terms(s, &['x', 'y'])? {
            out = out.add(&BiPoly::monomial(q, coeff.rem_euclid(q as i64) as u64, exps[0], exps[1]));
        }
        Ok(out)
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|((i, j), _)| std::cmp::Reverse((*j, *i)));
        fmt_terms(f, terms.into_iter().map(|(&(i, j), &c)| (c, power('x', i) + &power('y', j))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducible_counts_match_necklace_formula() {
        // Monic irreducibles of degree d over F_q: (1/d) sum_{e | d} mu(e) q^(d/e).
        let table = irreducibles(3, 4);
        let count = |d| table.iter().filter(|p| p.degree() == Some(d)).count();
        assert_eq!([count(1), count(2), count(3), count(4)], [3, 3, 8, 18]);
        let t5 = irreducibles(5, 2);
        assert_eq!(t5.iter().filter(|p| p.degree() == Some(2)).count(), 10);
    }

    #[test]
    fn division_identity() {
        let a = Poly::parse(3, "t^4+2t^2+t+1").unwrap();
        let b = Poly::parse(3, "2t^2+1").unwrap();
        let (quot, rem) = a.div_rem(&b);
        assert_eq!(quot.mul(&b).add(&rem), a);
        assert!(rem.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn gcd_and_multiplicity() {
        let p = Poly::parse(3, "t+1").unwrap();
        let a = p.pow(3).mul(&Poly::parse(3, "t^2+1").unwrap());
        assert_eq!(a.multiplicity(&p), 3);
        assert_eq!(a.gcd(&p.pow(2)), p.pow(2));
        assert!(Poly::parse(3, "t^2+1").unwrap().is_irreducible());
        assert!(!Poly::parse(3, "t^2+2").unwrap().is_irreducible());
    }

    #[test]
    fn display_round_trips() {
        for s in ["t^3+2t+1", "t", "2", "x^2y+2xy^2+1"] {
            if s.contains('x') {
                assert_eq!(BiPoly::parse(3, s).unwrap().to_string(), "2xy^2+x^2y+1");
            } else {
                assert_eq!(Poly::parse(3, s).unwrap().to_string(), s);
            }
        }
        assert_eq!(Poly::parse(3, "t-1").unwrap().to_string(), "t+2");
    }

    #[test]
    fn parse_errors_carry_columns() {
        let e = Poly::parse(3, "t^+1").unwrap_err();
        assert_eq!(e.column, Some(3));
        assert!(Poly::parse(3, "tt").is_err());
        assert!(Poly::parse(3, "").is_err());
    }
}
