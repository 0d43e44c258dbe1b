//! Places of `F_q(t)` and monomial valuations of `F_q(x, y)`.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

use super::element::{Element, FieldModel};
use super::poly::{BiPoly, Poly};

/// A place of `F_q(t)`: a monic irreducible or the degree place at infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(Poly),
    Infinity,
}

impl Place {
    pub fn finite(p: Poly) -> Result<Place> {
        if !p.is_monic() || !p.is_irreducible() {
            return Err(ParseError::invalid(format!("{p} is not a monic irreducible")).into());
        }
        Ok(Place::Finite(p))
    }

    pub fn parse(q: u64, s: &str) -> Result<Place> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Place::Infinity),
            other => Place::finite(Poly::parse(q, other)?),
        }
    }

    /// `ord_P` of a nonzero univariate element.
    pub fn order(&self, e: &Element) -> Result<i64> {
        let Element::Uni { num, den } = e else {
            return Err(Error::DomainMismatch("places live on the univariate model".into()));
        };
        if num.is_zero() {
            return Err(Error::ZeroElement);
        }
        Ok(match self {
            Place::Finite(p) => num.multiplicity(p) as i64 - den.multiplicity(p) as i64,
            Place::Infinity => den.degree().unwrap() as i64 - num.degree().unwrap() as i64,
        })
    }

    /// A uniformizer.
    pub fn uniformizer(&self, q: u64) -> Element {
        match self {
            Place::Finite(p) => Element::Uni { num: p.clone(), den: Poly::one(q) },
            Place::Infinity => FieldModel::Univariate { q }.parse("1/t").unwrap(),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

/// How monomials `x^i y^j` are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MonomialOrder {
    /// `(j, i)` lexicographically: the y-exponent decides first.
    Lex,
    /// `(i, j)` lexicographically.
    RevLex,
    /// The integer `a*i + b*j`.
    Weight(i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Valuation {
    Place(Place),
    Monomial(MonomialOrder),
}

/// A value of a valuation. Monomial valuations store `(i, j)` for
/// `x^i y^j`; places and weights store a single integer.
pub type ScaleValue = Vec<i64>;

impl Valuation {
    pub fn parse(model: FieldModel, s: &str) -> Result<Valuation> {
        let s = s.trim();
        match model {
            FieldModel::Univariate { q } => {
                let inner = s.strip_prefix("ord(").and_then(|r| r.strip_suffix(')')).unwrap_or(s);
                Ok(Valuation::Place(Place::parse(q, inner)?))
            }
            FieldModel::Bivariate { .. } => match s {
                "lex" => Ok(Valuation::Monomial(MonomialOrder::Lex)),
                "revlex" => Ok(Valuation::Monomial(MonomialOrder::RevLex)),
                w => {
                    let body = w.strip_prefix("weight(").and_then(|r| r.strip_suffix(')'));
                    let parsed = body.and_then(|b| {
                        let (a, c) = b.split_once(',')?;
                        Some((a.trim().parse().ok()?, c.trim().parse().ok()?))
                    });
                    match parsed {
                        Some((a, b)) if a > 0 && b > 0 => Ok(Valuation::Monomial(MonomialOrder::Weight(a, b))),
                        _ => {
                            Err(ParseError::invalid(format!("unknown valuation '{w}': expected lex, revlex or weight(a,b) with a, b > 0"))
                                .into())
                        }
                    }
                }
            },
        }
    }

    pub fn scale_rank(&self) -> usize {
        match self {
            Valuation::Monomial(MonomialOrder::Lex | MonomialOrder::RevLex) => 2,
            _ => 1,
        }
    }

    fn key(&self, v: &[i64]) -> (i64, i64) {
        match self {
            Valuation::Monomial(MonomialOrder::Lex) => (v[1], v[0]),
            Valuation::Monomial(MonomialOrder::RevLex) => (v[0], v[1]),
            _ => (v[0], 0),
        }
    }

    /// Compares two scale values in the scale's order.
    pub fn compare(&self, a: &[i64], b: &[i64]) -> Ordering {
        self.key(a).cmp(&self.key(b))
    }

    fn poly_value(&self, p: &BiPoly) -> ScaleValue {
        let best =
            p.terms().keys().map(|&(i, j)| vec![i as i64, j as i64]).min_by(|a, b| self.compare(&self.mono(a), &self.mono(b))).unwrap();
        self.mono(&best)
    }

    fn mono(&self, ij: &[i64]) -> ScaleValue {
        match self {
            Valuation::Monomial(MonomialOrder::Weight(a, b)) => vec![a * ij[0] + b * ij[1]],
            _ => ij.to_vec(),
        }
    }

    pub fn value(&self, e: &Element) -> Result<ScaleValue> {
        if e.is_zero() {
            return Err(Error::ZeroElement);
        }
        match (self, e) {
            (Valuation::Place(p), _) => Ok(vec![p.order(e)?]),
            (Valuation::Monomial(_), Element::Bi { num, den }) => {
                let (a, b) = (self.poly_value(num), self.poly_value(den));
                Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
            }
            (Valuation::Monomial(_), Element::Uni { .. }) => {
                Err(Error::DomainMismatch("monomial valuations live on the bivariate model".into()))
            }
        }
    }

    /// Compares two nonzero elements by value.
    pub fn compare_elements(&self, a: &Element, b: &Element) -> Result<Ordering> {
        Ok(self.compare(&self.value(a)?, &self.value(b)?))
    }

    pub fn model_matches(&self, model: FieldModel) -> bool {
        matches!(
            (self, model),
            (Valuation::Place(_), FieldModel::Univariate { .. }) | (Valuation::Monomial(_), FieldModel::Bivariate { .. })
        )
    }

    /// Checks multiplicativity and the strict ultrametric law on `samples`
    /// random pairs from `pool`; returns the number of pairs checked.
    pub fn verify_axioms(&self, pool: &[Element], samples: usize, seed: u64) -> Result<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let x = &pool[rng.gen_range(0..pool.len())];
            let y = &pool[rng.gen_range(0..pool.len())].scale(rng.gen_range(1..x.model().q()));
            let (vx, vy) = (self.value(x)?, self.value(y)?);
            let vxy = self.value(&x.mul(y))?;
            if vxy.iter().zip(vx.iter().zip(&vy)).any(|(s, (a, b))| *s != a + b) {
                return Err(Error::AxiomFailure(format!("v({x} * {y}) != v({x}) + v({y})")));
            }
            let sum = x.add(y);
            if sum.is_zero() {
                continue;
            }
            let vs = self.value(&sum)?;
            let min = if self.compare(&vx, &vy) == Ordering::Greater { &vy } else { &vx };
            let ord = self.compare(&vs, min);
            if ord == Ordering::Less || (self.compare(&vx, &vy) != Ordering::Equal && ord != Ordering::Equal) {
                return Err(Error::AxiomFailure(format!("ultrametric law fails for {x} and {y}")));
            }
        }
        Ok(samples)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Place(p) => write!(f, "ord({p})"),
            Valuation::Monomial(MonomialOrder::Lex) => write!(f, "lex"),
            Valuation::Monomial(MonomialOrder::RevLex) => write!(f, "revlex"),
            Valuation::Monomial(MonomialOrder::Weight(a, b)) => write!(f, "weight({a},{b})"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::element::pool;

    const UNI: FieldModel = FieldModel::Univariate { q: 3 };
    const BI: FieldModel = FieldModel::Bivariate { q: 3 };

    #[test]
    fn place_orders() {
        let t = Valuation::parse(UNI, "t").unwrap();
        assert_eq!(t.value(&UNI.parse("t^2/(t+1)").unwrap()).unwrap(), vec![2]);
        let inf = Valuation::parse(UNI, "inf").unwrap();
        assert_eq!(inf.value(&UNI.parse("t^2/(t+1)").unwrap()).unwrap(), vec![-1]);
        assert!(Place::parse(3, "t^2+2").is_err());
        assert!(matches!(t.value(&UNI.constant(0)), Err(Error::ZeroElement)));
    }

    #[test]
    fn lex_compares_y_first() {
        let lex = Valuation::parse(BI, "lex").unwrap();
        let e = BI.parse("x^2y+y^2").unwrap();
        assert_eq!(lex.value(&e).unwrap(), vec![2, 1]);
        let rev = Valuation::parse(BI, "revlex").unwrap();
        assert_eq!(rev.value(&e).unwrap(), vec![0, 2]);
        let w = Valuation::parse(BI, "weight(1,2)").unwrap();
        assert_eq!(w.value(&e).unwrap(), vec![4]);
        assert!(Valuation::parse(BI, "weight(0,1)").is_err());
    }

    #[test]
    fn axioms_hold_on_pools() {
        for v in ["t", "t+1", "t^2+1", "inf"] {
            Valuation::parse(UNI, v).unwrap().verify_axioms(&pool(UNI, 2), 2000, 7).unwrap();
        }
        for v in ["lex", "revlex", "weight(1,2)"] {
            Valuation::parse(BI, v).unwrap().verify_axioms(&pool(BI, 2), 2000, 7).unwrap();
        }
    }
}
