//! Decision procedures for the abelian flag property.
//!
//! Every positive answer carries a [`Filtration`] that can be re-checked
//! against the function on its window; every negative answer carries a
//! [`Witness`] that re-evaluates to a concrete violation.

mod exceptional;
mod fe;
mod order;
mod peel;
mod rank2;
mod reduce;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{window_vectors, InvariantFunction, Value, Window};
use crate::lattice::{Lattice, ScalarDomain, Subgroup, Vector};

pub use exceptional::{detect_exceptional, detect_special_basis, fano_pattern, mod4_pattern, rank3_reduce, ExceptionalKind};
pub use fe::{check_functional_equation, FeOutcome};
pub use order::{build_order, OrderOutcome, OrderRelation};
pub use peel::{check_af, check_af_with, PeelOptions};
pub use rank2::{classify_rank2, Rank2Class, Rank2Outcome};
pub use reduce::{reduce_value_set, Reduction, ReductionTarget};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Layer {
    pub generators: Vec<Vector>,
    #[serde(rename = "layerValue")]
    pub value: Value,
}

/// `A = A_0 ⊋ A_1 ⊋ ... ⊋ A_m` with `value` constant on `A_i \ A_{i+1}`
/// (and on `A_m \ 0`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Filtration {
    pub layers: Vec<Layer>,
}

impl Filtration {
    pub fn subgroups(&self, lattice: &Lattice) -> Vec<Subgroup> {
        self.layers.iter().map(|l| Subgroup::generated(lattice, &l.generators)).collect()
    }

    /// Re-validates strict descent and layer constancy on every window element.
    pub fn verify(&self, f: &InvariantFunction) -> Result<(), String> {
        let lattice = f.lattice();
        let groups = self.subgroups(lattice);
        if groups.is_empty() {
            return Err("empty filtration".into());
        }
        if groups[0] != Subgroup::whole(lattice) {
            return Err("first layer is not the whole group".into());
        }
        for w in groups.windows(2) {
            if !w[1].is_subgroup_of(&w[0]) || w[1] == w[0] {
                return Err(format!("{:?} is not a proper subgroup of {:?}", w[1].basis, w[0].basis));
            }
        }
        for v in window_vectors(lattice, &f.window()) {
            let depth = groups.iter().rposition(|g| g.contains(&v)).unwrap();
            let actual = f.value_of(f.eval_index(&v));
            if actual != &self.layers[depth].value {
                return Err(format!("{v:?} in layer {depth} has value {actual}, expected {}", self.layers[depth].value));
            }
        }
        Ok(())
    }

    /// Applies `h` to the layer values, merging consecutive equal layers.
    pub fn postcompose(&self, h: impl Fn(&Value) -> Value) -> Filtration {
        let mut layers: Vec<Layer> = Vec::new();
        for l in &self.layers {
            let v = h(&l.value);
            if layers.last().is_some_and(|last| last.value == v) {
                continue;
            }
            layers.push(Layer { generators: l.generators.clone(), value: v });
        }
        Filtration { layers }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Witness {
    /// `f(a)`, `f(b)`, `f(a+b)` pairwise distinct.
    DistinctTriple {
        a: Vector,
        b: Vector,
        values: [Value; 3],
    },
    /// For each attained value `c`, window elements with value `≠ c` that
    /// already generate `group`; no layer can be split off.
    Unsplittable {
        group: Vec<Vector>,
        spans: Vec<(Value, Vec<Vector>)>,
    },
    /// `a >̃ b >̃ a2 >̃ b2 >̃ a` in the partial relation of rank-2 restrictions.
    OrderCycle {
        cycle: [Vector; 4],
    },
    NonInvariant {
        n: i64,
        a: Vector,
    },
}

impl Witness {
    /// Rewrites coordinates given in the basis `basis` into ambient coordinates.
    pub fn lift(&self, basis: &[Vector], lattice: &Lattice) -> Witness {
        let map = |c: &Vector| -> Vector {
            let mut v = vec![0i64; basis[0].len()];
            for (k, b) in c.iter().zip(basis) {
                for j in 0..v.len() {
                    v[j] += k * b[j];
                }
            }
            lattice.normalize(&v)
        };
        match self {
            Witness::DistinctTriple { a, b, values } => Witness::DistinctTriple { a: map(a), b: map(b), values: values.clone() },
            Witness::Unsplittable { group, spans } => Witness::Unsplittable {
                group: group.iter().map(map).collect(),
                spans: spans.iter().map(|(v, g)| (v.clone(), g.iter().map(map).collect())).collect(),
            },
            Witness::OrderCycle { cycle } => Witness::OrderCycle { cycle: cycle.clone().map(|c| map(&c)) },
            Witness::NonInvariant { n, a } => Witness::NonInvariant { n: *n, a: map(a) },
        }
    }

    /// Re-evaluates the witness against `f`; `Ok` iff it is a genuine violation.
    pub fn recheck(&self, f: &InvariantFunction) -> Result<(), String> {
        let lattice = f.lattice();
        let val = |v: &[i64]| -> Result<Value, String> {
            if lattice.is_zero(v) {
                return Err(format!("{v:?} is zero"));
            }
            Ok(f.value_of(f.eval_index(v)).clone())
        };
        match self {
            Witness::DistinctTriple { a, b, .. } => {
                let s: Vector = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let (fa, fb, fs) = (val(a)?, val(b)?, val(&lattice.normalize(&s))?);
                if fa != fb && fb != fs && fa != fs {
                    Ok(())
                } else {
                    Err(format!("values {fa}, {fb}, {fs} are not pairwise distinct"))
                }
            }
            Witness::Unsplittable { group, spans } => {
                let g = Subgroup::generated(lattice, group);
                let mut attained = std::collections::BTreeSet::new();
                for v in window_vectors(lattice, &f.window()) {
                    if g.contains(&v) {
                        attained.insert(val(&v)?);
                    }
                }
                for c in &attained {
                    let Some((_, gens)) = spans.iter().find(|(v, _)| v == c) else {
                        return Err(format!("no spanning set recorded for value {c}"));
                    };
                    for x in gens {
                        if !f.window().contains(x) && lattice.domain == ScalarDomain::Integer {
                            return Err(format!("{x:?} outside the window"));
                        }
                        if &val(x)? == c {
                            return Err(format!("{x:?} has value {c}"));
                        }
                    }
                    if Subgroup::generated(lattice, gens) != g {
                        return Err(format!("elements avoiding {c} do not generate the group"));
                    }
                }
                if attained.len() < 2 {
                    return Err("group is constant on its window".into());
                }
                Ok(())
            }
            Witness::OrderCycle { cycle } => {
                for i in 0..4 {
                    let (x, y) = (&cycle[i], &cycle[(i + 1) % 4]);
                    let s: Vector = x.iter().zip(y).map(|(a, b)| a + b).collect();
                    let (fx, fy, fs) = (val(x)?, val(y)?, val(&lattice.normalize(&s))?);
                    if fx == fy || fs != fx {
                        return Err(format!("{x:?} > {y:?} does not hold"));
                    }
                }
                Ok(())
            }
            Witness::NonInvariant { n, a } => {
                let na: Vector = a.iter().map(|x| n * x).collect();
                if !f.lattice().domain.is_unit(*n) {
                    return Err(format!("{n} is not a unit"));
                }
                if val(a)? != val(&lattice.normalize(&na))? {
                    Ok(())
                } else {
                    Err("values agree".into())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum AFVerdict {
    Certified { filtration: Filtration, window: Window },
    Refuted { witness: Witness, window: Window },
    Exceptional { exceptional: ExceptionalKind, basis: Vec<Vector>, window: Window },
}

impl AFVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, AFVerdict::Certified { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            AFVerdict::Certified { .. } => "certified",
            AFVerdict::Refuted { .. } => "refuted",
            AFVerdict::Exceptional { exceptional: ExceptionalKind::Fano, .. } => "exceptional:fano",
            AFVerdict::Exceptional { exceptional: ExceptionalKind::Mod4, .. } => "exceptional:mod4",
        }
    }
}

pub(crate) fn ensure_invariant(f: &InvariantFunction) -> Result<()> {
    f.require_exact()?;
    if matches!(f.lattice().domain, ScalarDomain::PrimeField(_)) {
        if let Some((n, a)) = f.check_invariance() {
            return Err(Error::InvarianceFailure { n, a });
        }
    }
    Ok(())
}
