use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{window_vectors, InvariantFunction};
use crate::lattice::{determinant, Subgroup, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum FeOutcome {
    Holds { pairs_checked: usize },
    Violation { k: i64, m: i64, n: i64, a: Vector, b: Vector },
}

fn by_magnitude(bound: i64) -> Vec<i64> {
    let mut v: Vec<i64> = (-bound..=bound).collect();
    v.sort_by_key(|x| (x.abs(), *x < 0));
    v
}

/// Checks `f(m a' + n b') = f(m a' + (n + k m) b')` for all window pairs
/// `(a', b')` shaped like the basis pair, with `|k|, |m|, |n|` at most the
/// window radius.
pub fn check_functional_equation(f: &InvariantFunction, a: &[i64], b: &[i64]) -> Result<FeOutcome> {
    if f.rank() != 2 {
        return Err(Error::DomainMismatch("the functional equation is stated in rank 2".into()));
    }
    f.require_exact()?;
    let lattice = f.lattice();
    let basis = [a.to_vec(), b.to_vec()];
    let is_basis = match lattice.modulus() {
        None => determinant(&basis).abs() == 1,
        Some(_) => Subgroup::generated(lattice, &basis).rank() == 2,
    };
    if !is_basis || f.palette().len() > 2 {
        return Err(Error::BasisConditionFailure);
    }
    let add = |x: &[i64], y: &[i64], s: i64, t: i64| -> Vector {
        lattice.normalize(&x.iter().zip(y).map(|(u, v)| s * u + t * v).collect::<Vector>())
    };
    let (fa, fb) = (f.eval_index(a), f.eval_index(b));
    if fa == fb || f.eval_index(&add(a, b, 1, 1)) != fa {
        return Err(Error::BasisConditionFailure);
    }
    let bound = f.window().bound;
    let elems = window_vectors(lattice, &f.window());
    let a_like: Vec<&Vector> = elems.iter().filter(|v| f.eval_index(v) == fa).collect();
    let b_like: Vec<&Vector> = elems.iter().filter(|v| f.eval_index(v) == fb).collect();
    let coeffs = by_magnitude(bound);
    let mut pairs = 0;
    for ap in &a_like {
        for bp in &b_like {
            let s = add(ap, bp, 1, 1);
            if lattice.is_zero(&s) || f.eval_index(&s) != fa {
                continue;
            }
            pairs += 1;
            for &m in &coeffs {
                for &n in &coeffs {
                    let lhs = add(ap, bp, m, n);
                    if lattice.is_zero(&lhs) {
                        continue;
                    }
                    let fl = f.eval_index(&lhs);
                    for &k in &coeffs {
                        let rhs = add(ap, bp, m, n + k * m);
                        if lattice.is_zero(&rhs) {
                            continue;
                        }
                        if f.eval_index(&rhs) != fl {
                            return Ok(FeOutcome::Violation { k, m, n, a: (*ap).clone(), b: (*bp).clone() });
                        }
                    }
                }
            }
        }
    }
    Ok(FeOutcome::Holds { pairs_checked: pairs })
}
