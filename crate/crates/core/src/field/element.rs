//! Rational function field elements and the deterministic element pools.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

use super::poly::{BiPoly, Poly};

/// `F_q(t)` or `F_q(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum FieldModel {
    Univariate { q: u64 },
    Bivariate { q: u64 },
}

impl FieldModel {
    pub fn q(&self) -> u64 {
        match *self {
            FieldModel::Univariate { q } | FieldModel::Bivariate { q } => q,
        }
    }

    pub fn check(&self) -> Result<()> {
        let q = self.q();
        if q == 2 || crate::lattice::ScalarDomain::prime_field(q).is_err() {
            return Err(ParseError::invalid(format!("field models need an odd prime q, got {q}")).into());
        }
        Ok(())
    }

    pub fn one(&self) -> Element {
        self.constant(1)
    }

    pub fn constant(&self, c: u64) -> Element {
        match *self {
            FieldModel::Univariate { q } => Element::Uni { num: Poly::constant(q, c), den: Poly::one(q) },
            FieldModel::Bivariate { q } => Element::Bi { num: BiPoly::monomial(q, c, 0, 0), den: BiPoly::one(q) },
        }
    }

    /// Parses `num` or `num/den`, with optional parentheses around either.
    pub fn parse(&self, s: &str) -> Result<Element, ParseError> {
        let strip = |x: &str| x.trim().trim_start_matches('(').trim_end_matches(')').to_string();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (strip(n), strip(d)),
            None => (strip(s), "1".to_string()),
        };
        let q = self.q();
        let e = match self {
            FieldModel::Univariate { .. } => Element::Uni { num: Poly::parse(q, &n)?, den: Poly::parse(q, &d)? },
            FieldModel::Bivariate { .. } => Element::Bi { num: BiPoly::parse(q, &n)?, den: BiPoly::parse(q, &d)? },
        };
        if e.den_is_zero() {
            return Err(ParseError::invalid(format!("zero denominator in {s}")));
        }
        Ok(e.normalized())
    }
}

/// A quotient of polynomials. Univariate fractions are fully reduced with a
/// monic denominator; bivariate ones have their common monomial removed and
/// a denominator whose leading coefficient is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Uni { num: Poly, den: Poly },
    Bi { num: BiPoly, den: BiPoly },
}

impl Element {
    pub fn model(&self) -> FieldModel {
        match self {
            Element::Uni { num, .. } => FieldModel::Univariate { q: num.q() },
            Element::Bi { num, .. } => FieldModel::Bivariate { q: num.q() },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Element::Uni { num, .. } => num.is_zero(),
            Element::Bi { num, .. } => num.is_zero(),
        }
    }

    fn den_is_zero(&self) -> bool {
        match self {
            Element::Uni { den, .. } => den.is_zero(),
            Element::Bi { den, .. } => den.is_zero(),
        }
    }

    fn normalized(self) -> Element {
        match self {
            Element::Uni { num, den } => {
                if num.is_zero() {
                    return Element::Uni { den: Poly::one(num.q()), num };
                }
                let g = num.gcd(&den);
                let (num, den) = (num.div_rem(&g).0, den.div_rem(&g).0);
                let (lead, den) = den.monic();
                let inv = crate::lattice::mod_inverse(lead as i64, num.q() as i64).unwrap() as u64;
                Element::Uni { num: num.scale(inv), den }
            }
            Element::Bi { num, den } => {
                let q = num.q();
                if num.is_zero() {
                    return Element::Bi { num, den: BiPoly::one(q) };
                }
                let (a, b) = (num.monomial_content(), den.monomial_content());
                let common = (a.0.min(b.0), a.1.min(b.1));
                let (num, den) = (num.divide_monomial(common), den.divide_monomial(common));
                let inv = crate::lattice::mod_inverse(den.leading() as i64, q as i64).unwrap() as u64;
                Element::Bi { num: num.scale(inv), den: den.scale(inv) }
            }
        }
    }

    fn same_model(&self, o: &Element) {
        assert_eq!(self.model(), o.model(), "elements of different field models combined");
    }

    pub fn mul(&self, o: &Element) -> Element {
        self.same_model(o);
        match (self, o) {
            (Element::Uni { num: a, den: b }, Element::Uni { num: c, den: d }) => Element::Uni { num: a.mul(c), den: b.mul(d) },
            (Element::Bi { num: a, den: b }, Element::Bi { num: c, den: d }) => Element::Bi { num: a.mul(c), den: b.mul(d) },
            _ => unreachable!(),
        }
        .normalized()
    }

    pub fn add(&self, o: &Element) -> Element {
        self.same_model(o);
        match (self, o) {
            (Element::Uni { num: a, den: b }, Element::Uni { num: c, den: d }) => {
                Element::Uni { num: a.mul(d).add(&c.mul(b)), den: b.mul(d) }
            }
            (Element::Bi { num: a, den: b }, Element::Bi { num: c, den: d }) => {
                if b == d {
                    Element::Bi { num: a.add(c), den: b.clone() }
                } else {
                    Element::Bi { num: a.mul(d).add(&c.mul(b)), den: b.mul(d) }
                }
            }
            _ => unreachable!(),
        }
        .normalized()
    }

    pub fn scale(&self, c: u64) -> Element {
        match self {
            Element::Uni { num, den } => Element::Uni { num: num.scale(c), den: den.clone() },
            Element::Bi { num, den } => Element::Bi { num: num.scale(c), den: den.clone() },
        }
        .normalized()
    }

    pub fn neg(&self) -> Element {
        self.scale(self.model().q() - 1)
    }

    pub fn sub(&self, o: &Element) -> Element {
        self.add(&o.neg())
    }

    pub fn inv(&self) -> Result<Element> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        Ok(match self {
            Element::Uni { num, den } => Element::Uni { num: den.clone(), den: num.clone() },
            Element::Bi { num, den } => Element::Bi { num: den.clone(), den: num.clone() },
        }
        .normalized())
    }

    pub fn div(&self, o: &Element) -> Result<Element> {
        Ok(self.mul(&o.inv()?))
    }

    /// `sum c_i * e_i` over `F_q`.
    pub fn combination(coeffs: &[i64], basis: &[Element]) -> Element {
        let model = basis[0].model();
        let q = model.q() as i64;
        coeffs.iter().zip(basis).fold(model.constant(0), |acc, (&c, e)| {
            let c = c.rem_euclid(q) as u64;
            if c == 0 {
                acc
            } else {
                acc.add(&e.scale(c))
            }
        })
    }
}

/// `sum c_i b_i` for every nonzero `c` in `F_q^n`, in base-q code order,
/// computed over a common denominator.
pub fn combinations(basis: &[Element]) -> Vec<Element> {
    let q = basis[0].model().q();
    let total = (q as usize).pow(basis.len() as u32);
    match &basis[0] {
        Element::Uni { .. } => {
            let parts: Vec<(&Poly, &Poly)> = basis
                .iter()
                .map(|b| match b {
                    Element::Uni { num, den } => (num, den),
                    _ => panic!("mixed models"),
                })
                .collect();
            let den = parts.iter().fold(Poly::one(q), |acc, (_, d)| acc.mul(d));
            let nums: Vec<Poly> = parts.iter().map(|(n, d)| n.mul(&den.div_rem(d).0)).collect();
            let mut acc = vec![Poly::zero(q); total];
            for code in 1..total {
                let (lead, rest) = split_code(code, q);
                acc[code] = acc[rest].add(&nums[nums.len() - 1 - lead.0].scale(lead.1));
            }
            acc.into_iter().skip(1).map(|num| Element::Uni { num, den: den.clone() }.normalized()).collect()
        }
        Element::Bi { .. } => {
            let parts: Vec<(&BiPoly, &BiPoly)> = basis
                .iter()
                .map(|b| match b {
                    Element::Bi { num, den } => (num, den),
                    _ => panic!("mixed models"),
                })
                .collect();
            let den = parts.iter().fold(BiPoly::one(q), |acc, (_, d)| acc.mul(d));
            // Cofactor of each denominator in the product.
            let cofactor = |i: usize| parts.iter().enumerate().filter(|&(j, _)| j != i).fold(BiPoly::one(q), |acc, (_, (_, d))| acc.mul(d));
            let nums: Vec<BiPoly> = parts.iter().enumerate().map(|(i, (n, _))| n.mul(&cofactor(i))).collect();
            let mut acc = vec![BiPoly::zero(q); total];
            for code in 1..total {
                let (lead, rest) = split_code(code, q);
                acc[code] = acc[rest].add(&nums[nums.len() - 1 - lead.0].scale(lead.1));
            }
            acc.into_iter().skip(1).map(|num| Element::Bi { num, den: den.clone() }.normalized()).collect()
        }
    }
}

/// Highest nonzero digit of `code` as `(position, digit)`, and the code with
/// that digit cleared.
fn split_code(code: usize, q: u64) -> ((usize, u64), usize) {
    let q = q as usize;
    let mut pos = 0;
    let mut place = 1;
    while code / (place * q) > 0 {
        place *= q;
        pos += 1;
    }
    let digit = code / place;
    ((pos, digit as u64), code - digit * place)
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d, one) = match self {
            Element::Uni { num, den } => (num.to_string(), den.to_string(), den.degree() == Some(0)),
            Element::Bi { num, den } => (num.to_string(), den.to_string(), *den == BiPoly::one(den.q())),
        };
        if one {
            write!(f, "{n}")
        } else {
            write!(f, "({n})/({d})")
        }
    }
}

impl Serialize for Element {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn monics_up_to(q: u64, d: usize) -> Vec<Poly> {
    (0..=d).flat_map(|k| Poly::monics_of_degree(q, k)).collect()
}

/// Pool elements up to `F_q^*`, in a fixed order.
///
/// Univariate: `a/b` with `a, b` monic of degree at most `d` and coprime.
/// Bivariate: a monomial or a two-term polynomial of bidegree at most
/// `(d, d)`, over a monic monomial of the same bidegree bound.
pub fn pool(model: FieldModel, d: usize) -> Vec<Element> {
    let q = model.q();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |e: Element| {
        if seen.insert(e.clone()) {
            out.push(e);
        }
    };
    match model {
        FieldModel::Univariate { .. } => {
            let monics = monics_up_to(q, d);
            for a in &monics {
                for b in &monics {
                    if a.gcd(b).degree() == Some(0) {
                        push(Element::Uni { num: a.clone(), den: b.clone() });
                    }
                }
            }
        }
        FieldModel::Bivariate { .. } => {
            let d = d as u32;
            let monos: Vec<(u32, u32)> = (0..=d).flat_map(|j| (0..=d).map(move |i| (i, j))).collect();
            let mut nums: Vec<BiPoly> = monos.iter().map(|&(i, j)| BiPoly::monomial(q, 1, i, j)).collect();
            for (k, &(i, j)) in monos.iter().enumerate() {
                for &(a, b) in &monos[..k] {
                    for c in 1..q {
                        nums.push(BiPoly::monomial(q, 1, i, j).add(&BiPoly::monomial(q, c, a, b)));
                    }
                }
            }
            for &(i, j) in &monos {
                let den = BiPoly::monomial(q, 1, i, j);
                for n in &nums {
                    push(Element::Bi { num: n.clone(), den: den.clone() }.normalized());
                }
            }
        }
    }
    out
}
