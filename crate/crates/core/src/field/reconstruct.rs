//! Recovering a valuation from a logarithmic AF function.
//!
//! For `f = χ∘v` with `χ` injective on the attained values, `κ` lies in the
//! maximal ideal iff `f(κ) != f(1)` while `f(1 + κ) = f(1)`: adding `κ` does
//! not move the value of `1`. Two elements compare through their quotient.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::af::AFVerdict;
use crate::error::{Error, Result};
use crate::padic::Padic;

use super::cpair::{af_family, af_on_family, FamilyVerdict};
use super::element::{pool, Element};
use super::log::{eval_log, LogFunction};

/// Stated in every reconstruction report.
pub const MODEL_CAVEAT: &str = "F_q admits separable extensions of every degree, so these models exercise the combinatorics of \
     flag functions and valuations only, not the Galois-theoretic hypotheses on the base field.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReconstructOptions {
    pub pool_degree: usize,
    pub af_degree: usize,
    pub axiom_pairs: usize,
    pub seed: u64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions { pool_degree: 3, af_degree: 1, axiom_pairs: 10_000, seed: 0x5eed_0f1a }
    }
}

/// The valuation induced by `f`: `v(κ)` is `f(κ)` placed in the recovered
/// order, and `f̃` is the identity on attained values.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReconstructionResult {
    #[serde(skip)]
    pub f: LogFunction,
    /// Attained values on the pool, in increasing order.
    #[serde(rename = "attainedValues")]
    pub scale: Vec<Padic>,
    pub pool_size: usize,
    pub axiom_pairs_checked: usize,
    pub subspaces_certified: usize,
    pub precision: u32,
    pub caveat: &'static str,
}

impl ReconstructionResult {
    /// `f̃ ∘ v`, which is `f`.
    pub fn value(&self, k: &Element) -> Result<Padic> {
        eval_log(&self.f, k)
    }

    pub fn in_m(&self, k: &Element) -> Result<bool> {
        in_m(&self.f, k)
    }

    pub fn in_o(&self, k: &Element) -> Result<bool> {
        Ok(eval_log(&self.f, k)?.is_zero() || in_m(&self.f, k)?)
    }

    /// Compares two nonzero elements by the recovered valuation.
    pub fn compare(&self, a: &Element, b: &Element) -> Result<Ordering> {
        compare(&self.f, a, b)
    }
}

fn in_m(f: &LogFunction, k: &Element) -> Result<bool> {
    if eval_log(f, k)?.is_zero() {
        return Ok(false);
    }
    let shifted = f.model.one().add(k);
    Ok(!shifted.is_zero() && eval_log(f, &shifted)?.is_zero())
}

fn compare(f: &LogFunction, a: &Element, b: &Element) -> Result<Ordering> {
    let quot = a.div(b)?;
    if eval_log(f, &quot)?.is_zero() {
        return Ok(Ordering::Equal);
    }
    Ok(if in_m(f, &quot)? { Ordering::Greater } else { Ordering::Less })
}

/// `f(x) = f(y) = a`, `f(x + y) = b` and `f(x') = f(y') = b`,
/// `f(x' + y') = a` with `a != b`: whichever of `a, b` is smaller, one of
/// the two sums has a value below the minimum of its summands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UltrametricWitness {
    pub first: [Element; 2],
    pub second: [Element; 2],
    pub values: [Padic; 2],
}

impl UltrametricWitness {
    pub fn recheck(&self, f: &LogFunction) -> Result<bool> {
        let [a, b] = self.values;
        let ok = |pair: &[Element; 2], same: Padic, sum: Padic| -> Result<bool> {
            Ok(eval_log(f, &pair[0])? == same && eval_log(f, &pair[1])? == same && eval_log(f, &pair[0].add(&pair[1]))? == sum)
        };
        Ok(a != b && ok(&self.first, a, b)? && ok(&self.second, b, a)?)
    }

    /// The pair violating `f(x + y) >= min(f(x), f(y))` under `order`.
    pub fn violation_under(&self, order: impl Fn(&Padic, &Padic) -> Ordering) -> &[Element; 2] {
        if order(&self.values[1], &self.values[0]) == Ordering::Less {
            &self.first
        } else {
            &self.second
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ReconstructionOutcome {
    Reconstructed(ReconstructionResult),
    NotAF { witness: Option<UltrametricWitness>, refuting_basis: Vec<Element>, verdict: AFVerdict },
}

/// Searches pairs of pool elements for two sums that move values in
/// opposite directions.
pub fn ultrametric_witness(f: &LogFunction, elems: &[Element]) -> Result<Option<UltrametricWitness>> {
    use std::collections::HashMap;
    let vals: Vec<Padic> = elems.iter().map(|e| eval_log(f, e)).collect::<Result<_>>()?;
    // (value of the summands, value of the sum) -> summands
    let mut moves: HashMap<(Padic, Padic), [Element; 2]> = HashMap::new();
    for i in 0..elems.len() {
        for j in i + 1..elems.len() {
            if vals[i] != vals[j] {
                continue;
            }
            for c in 1..f.model.q() {
                let y = elems[j].scale(c);
                let s = elems[i].add(&y);
                if s.is_zero() {
                    continue;
                }
                let vs = eval_log(f, &s)?;
                if vs == vals[i] {
                    continue;
                }
                let pair = [elems[i].clone(), y];
                if let Some(back) = moves.get(&(vs, vals[i])) {
                    return Ok(Some(UltrametricWitness { first: pair, second: back.clone(), values: [vals[i], vs] }));
                }
                moves.entry((vals[i], vs)).or_insert(pair);
            }
        }
    }
    Ok(None)
}

/// Reconstructs the valuation of a logarithmic AF function and validates the
/// valuation axioms on sampled pairs.
pub fn reconstruct_valuation(f: &LogFunction, opts: &ReconstructOptions) -> Result<ReconstructionOutcome> {
    let family = af_family(f.model, opts.af_degree);
    let certified = match af_on_family(f, &family)? {
        FamilyVerdict::Refuted { basis, verdict } => {
            let small = pool(f.model, opts.pool_degree.min(2));
            let witness = ultrametric_witness(f, &small)?;
            return Ok(ReconstructionOutcome::NotAF { witness, refuting_basis: basis, verdict });
        }
        FamilyVerdict::Certified { certificates } => certificates.len(),
    };
    let elems = pool(f.model, opts.pool_degree);
    let mut reps: Vec<(Padic, Element)> = Vec::new();
    for e in &elems {
        let v = eval_log(f, e)?;
        if !reps.iter().any(|(w, _)| *w == v) {
            reps.push((v, e.clone()));
        }
    }
    let mut failure = None;
    reps.sort_by(|a, b| {
        compare(f, &a.1, &b.1).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            Ordering::Equal
        })
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let checked = check_axioms(f, &elems, opts.axiom_pairs, opts.seed)?;
    Ok(ReconstructionOutcome::Reconstructed(ReconstructionResult {
        f: f.clone(),
        scale: reps.into_iter().map(|(v, _)| v).collect(),
        pool_size: elems.len(),
        axiom_pairs_checked: checked,
        subspaces_certified: certified,
        precision: f.precision,
        caveat: MODEL_CAVEAT,
    }))
}

fn axiom(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::AxiomFailure(what()))
    }
}

/// Valuation axioms and the residue-field checks on `pairs` random pairs.
fn check_axioms(f: &LogFunction, elems: &[Element], pairs: usize, seed: u64) -> Result<usize> {
    let q = f.model.q();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_o = |k: &Element| -> Result<bool> { Ok(eval_log(f, k)?.is_zero() || in_m(f, k)?) };
    for _ in 0..pairs {
        let x = elems[rng.gen_range(0..elems.len())].scale(rng.gen_range(1..q));
        let y = elems[rng.gen_range(0..elems.len())].scale(rng.gen_range(1..q));
        let (fx, fy) = (eval_log(f, &x)?, eval_log(f, &y)?);
        let xy = x.mul(&y);
        axiom(eval_log(f, &xy)? == fx.add(&fy), || format!("f({x} * {y}) != f({x}) + f({y})"))?;
        let cmp = compare(f, &x, &y)?;
        let sum = x.add(&y);
        if !sum.is_zero() {
            let min = if cmp == Ordering::Greater { &y } else { &x };
            let c = compare(f, &sum, min)?;
            axiom(c != Ordering::Less, || format!("v({x} + {y}) < min(v({x}), v({y}))"))?;
            axiom(cmp == Ordering::Equal || c == Ordering::Equal, || format!("v({x} + {y}) != min for distinct values"))?;
        }
        let (ox, oy, mx) = (in_o(&x)?, in_o(&y)?, in_m(f, &x)?);
        if ox && oy {
            axiom(sum.is_zero() || in_o(&sum)?, || format!("O not closed under {x} + {y}"))?;
            axiom(in_o(&xy)?, || format!("O not closed under {x} * {y}"))?;
        }
        if mx && oy {
            axiom(in_m(f, &xy)?, || format!("m not an ideal: {x} * {y}"))?;
        }
        if ox && !mx {
            // Units of O invert inside O \ m, so O/m is a field.
            let inv = x.inv()?;
            axiom(in_o(&inv)? && !in_m(f, &inv)?, || format!("unit {x} has no inverse in O \\ m"))?;
            if in_m(f, &y)? {
                // Representatives differing by m give the same residue product.
                let diff = x.add(&y).mul(&x).sub(&x.mul(&x));
                axiom(diff.is_zero() || in_m(f, &diff)?, || format!("residue product depends on representative {y}"))?;
            }
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::element::FieldModel;
    use crate::field::valuation::{Place, Valuation};

    const UNI: FieldModel = FieldModel::Univariate { q: 3 };

    fn quick() -> ReconstructOptions {
        ReconstructOptions { pool_degree: 2, axiom_pairs: 500, ..Default::default() }
    }

    #[test]
    fn ord_t_recovers_place() {
        let f = LogFunction::character(UNI, 3, 8, Valuation::parse(UNI, "t").unwrap(), &[1]).unwrap();
        let ReconstructionOutcome::Reconstructed(r) = reconstruct_valuation(&f, &quick()).unwrap() else { panic!() };
        let t = UNI.parse("t").unwrap();
        assert!(r.in_m(&t).unwrap());
        assert!(r.in_o(&UNI.parse("t+1").unwrap()).unwrap());
        assert!(!r.in_o(&t.inv().unwrap()).unwrap());
        assert_eq!(r.compare(&t, &UNI.one()).unwrap(), Ordering::Greater);
        let small = |n| Padic::from_i64(3, 8, n);
        assert_eq!(r.scale.first(), Some(&small(-2)));
        assert_eq!(r.scale.last(), Some(&small(2)));
    }

    #[test]
    fn two_places_give_ultrametric_witness() {
        let f =
            LogFunction::place_weights(UNI, 3, 8, vec![(Place::parse(3, "t").unwrap(), 1), (Place::parse(3, "t+1").unwrap(), 1)]).unwrap();
        let ReconstructionOutcome::NotAF { witness, .. } = reconstruct_valuation(&f, &quick()).unwrap() else { panic!() };
        let w = witness.expect("witness");
        assert!(w.recheck(&f).unwrap());
        for order in [Padic::cmp, |a: &Padic, b: &Padic| b.cmp(a)] {
            let [x, y] = w.violation_under(order);
            let fs = eval_log(&f, &x.add(y)).unwrap();
            let fx = eval_log(&f, x).unwrap();
            assert_eq!(order(&fs, &fx), Ordering::Less);
        }
    }
}
