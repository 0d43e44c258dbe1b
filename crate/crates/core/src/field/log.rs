//! Logarithmic functions on the field models and their restrictions to
//! finite-dimensional subspaces.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{InvariantFunction, Value, ValueSet};
use crate::padic::Padic;

use super::element::{Element, FieldModel};
use super::valuation::{Place, Valuation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogKind {
    /// `sum_P w_P ord_P`.
    PlaceWeights(Vec<(Place, Padic)>),
    /// `chi ∘ v`, with `chi` given on the scale generators.
    Character { valuation: Valuation, on_generators: Vec<Padic> },
    /// `sum c_i f_i`.
    Linear(Vec<(Padic, LogFunction)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogFunction {
    pub model: FieldModel,
    pub p: u64,
    pub precision: u32,
    pub kind: LogKind,
}

impl LogFunction {
    pub fn place_weights(model: FieldModel, p: u64, precision: u32, weights: Vec<(Place, i64)>) -> Result<LogFunction> {
        model.check()?;
        Padic::check_params(p, precision)?;
        if !matches!(model, FieldModel::Univariate { .. }) {
            return Err(Error::DomainMismatch("place weights need the univariate model".into()));
        }
        let weights = weights.into_iter().map(|(pl, w)| (pl, Padic::from_i64(p, precision, w))).collect();
        Ok(LogFunction { model, p, precision, kind: LogKind::PlaceWeights(weights) })
    }

    /// The inertia element `z^chi_v`.
    pub fn character(model: FieldModel, p: u64, precision: u32, valuation: Valuation, on_generators: &[i64]) -> Result<LogFunction> {
        model.check()?;
        Padic::check_params(p, precision)?;
        if !valuation.model_matches(model) {
            return Err(Error::DomainMismatch(format!("valuation {valuation} does not live on this model")));
        }
        if on_generators.len() != valuation.scale_rank() {
            return Err(Error::DomainMismatch(format!(
                "the scale of {valuation} has {} generators, got {} character values",
                valuation.scale_rank(),
                on_generators.len()
            )));
        }
        let on_generators = on_generators.iter().map(|&c| Padic::from_i64(p, precision, c)).collect();
        Ok(LogFunction { model, p, precision, kind: LogKind::Character { valuation, on_generators } })
    }

    /// `sum c_i f_i`; all terms must share model, `p` and precision.
    pub fn linear(terms: &[(i64, &LogFunction)]) -> Result<LogFunction> {
        let first = terms.first().ok_or_else(|| Error::DomainMismatch("empty combination".into()))?.1;
        if terms.iter().any(|(_, f)| f.model != first.model || f.p != first.p || f.precision != first.precision) {
            return Err(Error::DomainMismatch("combined functions must share model, p and precision".into()));
        }
        let terms = terms.iter().map(|&(c, f)| (Padic::from_i64(first.p, first.precision, c), f.clone())).collect();
        Ok(LogFunction { kind: LogKind::Linear(terms), ..first.clone() })
    }

    pub fn zero(&self) -> Padic {
        Padic::zero(self.p, self.precision)
    }

    pub fn value_set(&self) -> ValueSet {
        ValueSet::Padic { p: self.p, precision: self.precision }
    }
}

/// Evaluates `f` at a nonzero element.
pub fn eval_log(f: &LogFunction, kappa: &Element) -> Result<Padic> {
    if kappa.is_zero() {
        return Err(Error::ZeroElement);
    }
    if kappa.model() != f.model {
        return Err(Error::DomainMismatch("element and function live on different models".into()));
    }
    let scalar = |n: i64| Padic::from_i64(f.p, f.precision, n);
    match &f.kind {
        LogKind::PlaceWeights(ws) => ws.iter().try_fold(f.zero(), |acc, (pl, w)| Ok(acc.add(&w.mul(&scalar(pl.order(kappa)?))))),
        LogKind::Character { valuation, on_generators } => {
            let v = valuation.value(kappa)?;
            Ok(v.iter().zip(on_generators).fold(f.zero(), |acc, (&n, c)| acc.add(&c.mul(&scalar(n)))))
        }
        LogKind::Linear(terms) => terms.iter().try_fold(f.zero(), |acc, (c, g)| Ok(acc.add(&c.mul(&eval_log(g, kappa)?)))),
    }
}

/// Checks that the basis is independent over `F_q` and has at most four
/// elements; returns the elements `sum c_i b_i` in base-q code order.
pub fn subspace_points(basis: &[Element]) -> Result<Vec<Element>> {
    if basis.is_empty() || basis.len() > 4 {
        return Err(Error::DomainMismatch(format!("subspaces of dimension 1..=4 are supported, got {}", basis.len())));
    }
    let out = super::element::combinations(basis);
    if out.iter().any(Element::is_zero) {
        return Err(Error::DependentBasis);
    }
    Ok(out)
}

/// The function `P(V) -> Z_p` induced by `f` on `V = <basis>`.
pub fn restrict_to_subspace(f: &LogFunction, basis: &[Element]) -> Result<InvariantFunction> {
    let pts = subspace_points(basis)?;
    let values = pts.iter().map(|e| eval_log(f, e).map(Value::Padic)).collect::<Result<Vec<_>>>()?;
    InvariantFunction::full_table(f.model.q(), basis.len(), f.value_set(), values)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum InertiaOutcome {
    Pass {
        elements_checked: usize,
        one_plus_m_checked: usize,
    },
    /// `f` separates two elements of equal value.
    SameValueDiffers {
        a: Element,
        b: Element,
    },
    /// `f(1 + m) != 0` for some `m` of positive value.
    OnePlusM {
        m: Element,
    },
}

/// Whether `f` factors through `v` on `pool` and vanishes on `1 + m`.
pub fn inertia_check(f: &LogFunction, v: &Valuation, pool: &[Element]) -> Result<InertiaOutcome> {
    let one = f.model.one();
    let mut by_value: HashMap<Vec<i64>, (&Element, Padic)> = HashMap::new();
    let mut plus = 0;
    for e in pool {
        let val = v.value(e)?;
        let fe = eval_log(f, e)?;
        if let Some((other, fo)) = by_value.get(&val) {
            if *fo != fe {
                return Ok(InertiaOutcome::SameValueDiffers { a: (*other).clone(), b: e.clone() });
            }
        } else {
            by_value.insert(val.clone(), (e, fe));
        }
        if v.compare(&val, &vec![0; val.len()]).is_gt() {
            plus += 1;
            if !eval_log(f, &one.add(e))?.is_zero() {
                return Ok(InertiaOutcome::OnePlusM { m: e.clone() });
            }
        }
    }
    Ok(InertiaOutcome::Pass { elements_checked: pool.len(), one_plus_m_checked: plus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::element::pool;
    use crate::function::fq_vector;

    const UNI: FieldModel = FieldModel::Univariate { q: 3 };
    const BI: FieldModel = FieldModel::Bivariate { q: 3 };

    fn ord(s: &str) -> LogFunction {
        LogFunction::place_weights(UNI, 3, 8, vec![(Place::parse(3, s).unwrap(), 1)]).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let p = |n| Padic::from_i64(3, 8, n);
        assert_eq!(eval_log(&ord("t"), &UNI.parse("t^2/(t+1)").unwrap()).unwrap(), p(2));
        assert_eq!(eval_log(&ord("t+1"), &UNI.parse("t^3+1").unwrap()).unwrap(), p(3));
        let lex = LogFunction::character(BI, 3, 8, Valuation::parse(BI, "lex").unwrap(), &[1, 5]).unwrap();
        assert_eq!(eval_log(&lex, &BI.parse("x^2y").unwrap()).unwrap(), p(7));
        assert!(matches!(eval_log(&lex, &BI.constant(0)), Err(Error::ZeroElement)));
        assert!(eval_log(&lex, &UNI.one()).is_err());
    }

    #[test]
    fn restriction_to_line() {
        let f = restrict_to_subspace(&ord("t"), &[UNI.one(), UNI.parse("t").unwrap()]).unwrap();
        // (0:1) is t itself; every other point is a unit at t.
        for code in 1..9 {
            let v = fq_vector(code, 3, 2);
            let expected = (v[0] == 0) as i64;
            assert_eq!(f.evaluate(&v).unwrap(), Value::Padic(Padic::from_i64(3, 8, expected)), "{v:?}");
        }
        let dependent = [UNI.parse("t").unwrap(), UNI.parse("2t").unwrap()];
        assert!(matches!(restrict_to_subspace(&ord("t"), &dependent), Err(Error::DependentBasis)));
    }

    #[test]
    fn weight_zero_restricts_to_constant() {
        let f = LogFunction::place_weights(UNI, 3, 8, vec![(Place::parse(3, "t").unwrap(), 0)]).unwrap();
        let r = restrict_to_subspace(&f, &[UNI.one(), UNI.parse("t").unwrap(), UNI.parse("t^2").unwrap()]).unwrap();
        assert_eq!(r.palette().len(), 1);
    }

    #[test]
    fn logarithmic_law_on_samples() {
        let f = LogFunction::place_weights(UNI, 3, 8, vec![(Place::parse(3, "t").unwrap(), 2), (Place::Infinity, -1)]).unwrap();
        let pool = pool(UNI, 2);
        for a in pool.iter().step_by(7) {
            for b in pool.iter().step_by(11) {
                let lhs = eval_log(&f, &a.mul(b)).unwrap();
                assert_eq!(lhs, eval_log(&f, a).unwrap().add(&eval_log(&f, b).unwrap()));
            }
        }
        assert!(eval_log(&f, &UNI.constant(2)).unwrap().is_zero());
    }

    #[test]
    fn inertia_examples() {
        let pool = pool(UNI, 2);
        let vt = Valuation::parse(UNI, "t").unwrap();
        assert!(matches!(inertia_check(&ord("t"), &vt, &pool).unwrap(), InertiaOutcome::Pass { .. }));
        let out = inertia_check(&ord("t+1"), &vt, &pool).unwrap();
        assert!(!matches!(out, InertiaOutcome::Pass { .. }));
    }
}
