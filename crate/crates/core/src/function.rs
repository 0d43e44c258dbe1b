//! Unit-invariant functions with a finite description.
//!
//! Values are interned into a per-function palette; the engines work on
//! palette indices and only translate back to [`Value`]s at the boundary.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classes::ClassIndex;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, ScalarDomain, Subgroup, Vector};
use crate::padic::Padic;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Label(String),
    Residue(u64),
    Padic(Padic),
}

/// Labels and p-adic digit strings serialize as strings, residues as integers.
impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Label(l) => s.serialize_str(l),
            Value::Residue(r) => s.serialize_u64(*r),
            Value::Padic(x) => x.serialize(s),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Label(s) => write!(f, "{s}"),
            Value::Residue(r) => write!(f, "{r}"),
            Value::Padic(x) => write!(f, "{}", x.to_digit_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueSet {
    Finite(Vec<String>),
    Residue(u64),
    Padic { p: u64, precision: u32 },
}

impl ValueSet {
    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (ValueSet::Finite(labels), Value::Label(s)) => labels.contains(s),
            (ValueSet::Residue(m), Value::Residue(r)) => r < m,
            (ValueSet::Padic { p, precision }, Value::Padic(x)) => x.p() == *p && x.precision() == *precision,
            _ => false,
        }
    }
}

/// A finite box `[-bound, bound]^n` together with a p-adic depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    #[serde(rename = "box")]
    pub bound: i64,
    pub depth: u32,
}

impl Window {
    pub fn new(bound: i64, depth: u32) -> Window {
        Window { bound, depth }
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        v.iter().all(|x| x.abs() <= self.bound)
    }
}

pub type Rule = Arc<dyn Fn(&[i64]) -> Value + Send + Sync>;

#[derive(Clone)]
enum Repr {
    /// One entry per nonzero vector of `F_q^n`, indexed by its base-q code minus one.
    FullTable(Vec<u16>),
    DepthK {
        index: Arc<ClassIndex>,
        table: Vec<u16>,
    },
    Oracle {
        rule: Rule,
        lookup: HashMap<Value, u16>,
    },
    Restricted {
        parent: Arc<InvariantFunction>,
        basis: Vec<Vector>,
    },
    Mapped {
        inner: Arc<InvariantFunction>,
        remap: Vec<u16>,
    },
}

#[derive(Clone)]
pub struct InvariantFunction {
    lattice: Lattice,
    value_set: ValueSet,
    palette: Vec<Value>,
    repr: Repr,
    window: Window,
}

impl fmt::Debug for InvariantFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::FullTable(_) => "table",
            Repr::DepthK { .. } => "depthk",
            Repr::Oracle { .. } => "oracle",
            Repr::Restricted { .. } => "restricted",
            Repr::Mapped { .. } => "mapped",
        };
        f.debug_struct("InvariantFunction")
            .field("lattice", &self.lattice)
            .field("repr", &kind)
            .field("palette", &self.palette)
            .field("window", &self.window)
            .finish()
    }
}

/// Base-q code of a vector, first coordinate most significant.
pub fn fq_code(v: &[i64], q: u64) -> usize {
    v.iter().fold(0usize, |c, &x| c * q as usize + x.rem_euclid(q as i64) as usize)
}

pub fn fq_vector(mut code: usize, q: u64, rank: usize) -> Vector {
    let mut v = vec![0i64; rank];
    for i in (0..rank).rev() {
        v[i] = (code % q as usize) as i64;
        code /= q as usize;
    }
    v
}

fn intern(values: impl IntoIterator<Item = Value>) -> (Vec<Value>, HashMap<Value, u16>) {
    let palette: Vec<Value> = values.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let lookup = palette.iter().enumerate().map(|(i, v)| (v.clone(), i as u16)).collect();
    (palette, lookup)
}

impl InvariantFunction {
    /// Builds a full table over `F_q^n` from a value per nonzero vector
    /// (in base-q code order).
    pub fn full_table(q: u64, rank: usize, value_set: ValueSet, values: Vec<Value>) -> Result<InvariantFunction> {
        let expected = (q as usize).pow(rank as u32) - 1;
        if values.len() != expected {
            return Err(Error::DomainMismatch(format!("expected {expected} table entries, got {}", values.len())));
        }
        check_values(&value_set, &values)?;
        let (palette, lookup) = intern(values.iter().cloned());
        let table = values.iter().map(|v| lookup[v]).collect();
        Ok(InvariantFunction {
            lattice: Lattice::fq(q, rank),
            value_set,
            palette,
            repr: Repr::FullTable(table),
            window: Window::new(q as i64, 1),
        })
    }

    /// Builds a full table over `F_q^n` from a rule on projective points.
    pub fn from_points(q: u64, rank: usize, value_set: ValueSet, rule: impl Fn(&[i64]) -> Value) -> Result<InvariantFunction> {
        let total = (q as usize).pow(rank as u32);
        let values = (1..total).map(|c| rule(&fq_vector(c, q, rank))).collect();
        InvariantFunction::full_table(q, rank, value_set, values)
    }

    /// A function on `Z^n` given by a value per primitive class mod `p^k`
    /// (in the order of [`ClassIndex::representatives`]).
    pub fn depth_k(rank: usize, p: u64, k: u32, value_set: ValueSet, values: Vec<Value>, window: Window) -> Result<InvariantFunction> {
        let index = ClassIndex::get(rank, p, k);
        if values.len() != index.len() {
            return Err(Error::DomainMismatch(format!("expected {} class values, got {}", index.len(), values.len())));
        }
        check_values(&value_set, &values)?;
        let (palette, lookup) = intern(values.iter().cloned());
        let table = values.iter().map(|v| lookup[v]).collect();
        Ok(InvariantFunction { lattice: Lattice::integer(rank), value_set, palette, repr: Repr::DepthK { index, table }, window })
    }

    /// A depth-k function on `Z^n` from a rule evaluated on class representatives.
    pub fn depth_k_from_rule(
        rank: usize,
        p: u64,
        k: u32,
        value_set: ValueSet,
        window: Window,
        rule: impl Fn(&[i64]) -> Value,
    ) -> Result<InvariantFunction> {
        let index = ClassIndex::get(rank, p, k);
        let values = index.representatives().iter().map(|r| rule(r)).collect();
        InvariantFunction::depth_k(rank, p, k, value_set, values, window)
    }

    /// A function given by an evaluation rule; certifying procedures require
    /// a [`snapshot`](InvariantFunction::snapshot) first.
    pub fn oracle(lattice: Lattice, value_set: ValueSet, window: Window, rule: Rule) -> Result<InvariantFunction> {
        let mut attained = Vec::new();
        for v in window_vectors(&lattice, &window) {
            attained.push(rule(&v));
        }
        check_values(&value_set, &attained)?;
        let (palette, lookup) = intern(attained);
        Ok(InvariantFunction { lattice, value_set, palette, repr: Repr::Oracle { rule, lookup }, window })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank
    }

    pub fn value_set(&self) -> &ValueSet {
        &self.value_set
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn with_window(&self, window: Window) -> InvariantFunction {
        InvariantFunction { window, ..self.clone() }
    }

    /// Attained values, sorted; engines refer to values by position here.
    pub fn palette(&self) -> &[Value] {
        &self.palette
    }

    pub fn value_of(&self, index: u16) -> &Value {
        &self.palette[index as usize]
    }

    pub fn index_of(&self, v: &Value) -> Option<u16> {
        self.palette.iter().position(|x| x == v).map(|i| i as u16)
    }

    /// The `(p, k)` of a depth-k table, if this is one.
    pub fn depth_params(&self) -> Option<(u64, u32)> {
        match &self.repr {
            Repr::DepthK { index, .. } => Some((index.p, index.depth)),
            _ => None,
        }
    }

    /// Whether evaluation is exact everywhere, not just on the window.
    pub fn is_exact(&self) -> bool {
        match &self.repr {
            Repr::FullTable(_) | Repr::DepthK { .. } => true,
            Repr::Oracle { .. } => false,
            Repr::Restricted { parent, .. } => parent.is_exact(),
            Repr::Mapped { inner, .. } => inner.is_exact(),
        }
    }

    pub fn require_exact(&self) -> Result<()> {
        if self.is_exact() {
            Ok(())
        } else {
            Err(Error::DomainMismatch("oracle functions must be snapshotted before certification".into()))
        }
    }

    /// Palette index of `f(v)` without window checks. Panics on zero.
    pub fn eval_index(&self, v: &[i64]) -> u16 {
        match &self.repr {
            Repr::FullTable(t) => {
                let Some(q) = self.lattice.modulus() else { unreachable!() };
                t[fq_code(v, q) - 1]
            }
            Repr::DepthK { index, table } => table[index.class_of(v).expect("nonzero element")],
            Repr::Oracle { rule, lookup } => *lookup.get(&rule(v)).unwrap_or(&u16::MAX),
            Repr::Restricted { parent, basis } => {
                let mut w = vec![0i64; parent.rank()];
                for (c, b) in v.iter().zip(basis) {
                    for j in 0..w.len() {
                        w[j] += c * b[j];
                    }
                }
                parent.eval_index(&w)
            }
            Repr::Mapped { inner, remap } => remap[inner.eval_index(v) as usize],
        }
    }

    pub fn evaluate(&self, v: &[i64]) -> Result<Value> {
        if v.len() != self.rank() {
            return Err(Error::DomainMismatch(format!("element of length {} in rank {}", v.len(), self.rank())));
        }
        if self.lattice.is_zero(v) {
            return Err(Error::ZeroElement);
        }
        if self.lattice.domain == ScalarDomain::Integer && !self.window.contains(v) {
            return Err(Error::OutOfWindow { element: v.to_vec(), bound: self.window.bound });
        }
        match &self.repr {
            Repr::Oracle { rule, .. } => Ok(rule(v)),
            _ => Ok(self.palette[self.eval_index(v) as usize].clone()),
        }
    }

    /// Restriction to `sub`, in coordinates of its canonical basis.
    pub fn restrict(self: &Arc<Self>, sub: &Subgroup) -> Result<InvariantFunction> {
        if sub.lattice() != self.lattice {
            return Err(Error::DomainMismatch("subgroup lives in a different lattice".into()));
        }
        let rank = sub.rank();
        if rank == 0 {
            return Err(Error::DomainMismatch("restriction to the zero subgroup".into()));
        }
        match self.lattice.domain {
            ScalarDomain::PrimeField(q) => {
                let total = (q as usize).pow(rank as u32);
                let values =
                    (1..total).map(|c| self.palette[self.eval_index(&sub.element(&fq_vector(c, q, rank))) as usize].clone()).collect();
                InvariantFunction::full_table(q, rank, self.value_set.clone(), values)
            }
            ScalarDomain::Integer => {
                let out = InvariantFunction {
                    lattice: Lattice::integer(rank),
                    value_set: self.value_set.clone(),
                    palette: self.palette.clone(),
                    repr: Repr::Restricted { parent: self.clone(), basis: sub.basis.clone() },
                    window: self.window,
                };
                if !self.is_exact() {
                    for v in window_vectors(&out.lattice, &out.window) {
                        let image = sub.element(&v);
                        if !self.window.contains(&image) {
                            return Err(Error::OutOfWindow { element: image, bound: self.window.bound });
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// `h ∘ f`. `h` must be defined on every attained value.
    pub fn postcompose(self: &Arc<Self>, target: ValueSet, h: impl Fn(&Value) -> Option<Value>) -> Result<InvariantFunction> {
        let mut images = Vec::with_capacity(self.palette.len());
        for v in &self.palette {
            let w = h(v).ok_or_else(|| Error::PartialMap(v.to_string()))?;
            if !target.contains(&w) {
                return Err(Error::PartialMap(format!("{v} maps outside the target value set")));
            }
            images.push(w);
        }
        let (palette, lookup) = intern(images.iter().cloned());
        let remap = images.iter().map(|w| lookup[w]).collect();
        Ok(InvariantFunction {
            lattice: self.lattice.clone(),
            value_set: target,
            palette,
            repr: Repr::Mapped { inner: self.clone(), remap },
            window: self.window,
        })
    }

    /// Samples the function on class representatives mod `p^k` into a
    /// depth-k table. Only meaningful over `Z^n`.
    pub fn snapshot(&self, p: u64, k: u32) -> Result<InvariantFunction> {
        if self.lattice.domain != ScalarDomain::Integer {
            return Err(Error::DomainMismatch("snapshots apply to integer lattices".into()));
        }
        let index = ClassIndex::get(self.rank(), p, k);
        let values = index
            .representatives()
            .iter()
            .map(|r| match &self.repr {
                Repr::Oracle { rule, .. } => rule(r),
                _ => self.palette[self.eval_index(r) as usize].clone(),
            })
            .collect();
        InvariantFunction::depth_k(self.rank(), p, k, self.value_set.clone(), values, Window::new(self.window.bound, k))
    }

    /// Table of values per class (depth-k) or per nonzero vector (full table),
    /// after flattening restrictions and postcompositions.
    pub fn table_entries(&self) -> Option<Vec<(Vector, Value)>> {
        match self.lattice.domain {
            ScalarDomain::PrimeField(q) => {
                let total = (q as usize).pow(self.rank() as u32);
                Some(
                    (1..total)
                        .map(|c| {
                            let v = fq_vector(c, q, self.rank());
                            let val = self.palette[self.eval_index(&v) as usize].clone();
                            (v, val)
                        })
                        .collect(),
                )
            }
            ScalarDomain::Integer => match &self.repr {
                Repr::DepthK { index, table } => {
                    Some(index.representatives().iter().zip(table).map(|(r, &t)| (r.clone(), self.palette[t as usize].clone())).collect())
                }
                _ => None,
            },
        }
    }

    /// Checks `f(na) = f(a)` for all window elements `a` and units `n` with
    /// `na` still in the window.
    pub fn check_invariance(&self) -> Option<(i64, Vector)> {
        let lattice = &self.lattice;
        for a in window_vectors(lattice, &self.window) {
            let fa = self.eval_raw(&a);
            match lattice.domain {
                ScalarDomain::PrimeField(q) => {
                    for n in 2..q as i64 {
                        let na: Vector = a.iter().map(|x| (n * x).rem_euclid(q as i64)).collect();
                        if self.eval_raw(&na) != fa {
                            return Some((n, a));
                        }
                    }
                }
                ScalarDomain::Integer => {
                    let top = a.iter().map(|x| x.abs()).max().unwrap_or(0);
                    for n in (-self.window.bound..=self.window.bound).filter(|&n| n != 0 && n != 1) {
                        if n.abs() * top > self.window.bound {
                            continue;
                        }
                        let na: Vector = a.iter().map(|x| n * x).collect();
                        if self.eval_raw(&na) != fa {
                            return Some((n, a));
                        }
                    }
                }
            }
        }
        None
    }

    fn eval_raw(&self, v: &[i64]) -> Value {
        match &self.repr {
            Repr::Oracle { rule, .. } => rule(v),
            Repr::FullTable(t) => {
                let q = self.lattice.modulus().unwrap();
                self.palette[t[fq_code(v, q) - 1] as usize].clone()
            }
            _ => self.palette[self.eval_index(v) as usize].clone(),
        }
    }
}

fn check_values(value_set: &ValueSet, values: &[Value]) -> Result<()> {
    match values.iter().find(|v| !value_set.contains(v)) {
        Some(v) => Err(Error::DomainMismatch(format!("value {v} is not in the declared value set"))),
        None => Ok(()),
    }
}

/// Nonzero elements of the window: all of `F_q^n`, or the box over `Z^n`,
/// in lexicographic order.
pub fn window_vectors(lattice: &Lattice, window: &Window) -> Vec<Vector> {
    let (lo, hi) = match lattice.domain {
        ScalarDomain::PrimeField(q) => (0, q as i64 - 1),
        ScalarDomain::Integer => (-window.bound, window.bound),
    };
    let n = lattice.rank;
    let side = (hi - lo + 1) as usize;
    let mut out = Vec::with_capacity(side.pow(n as u32));
    let mut v = vec![lo; n];
    loop {
        if v.iter().any(|&x| x != 0) {
            out.push(v.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if v[i] < hi {
                v[i] += 1;
                break;
            }
            v[i] = lo;
        }
    }
}

/// One representative per unit orbit of primitive residues modulo `modulus`.
pub fn enumerate_primitive_classes(lattice: &Lattice, modulus: u64) -> Result<Vec<Vector>> {
    let (p, k) = prime_power(modulus).ok_or_else(|| Error::DomainMismatch(format!("{modulus} is not a prime power")))?;
    if let ScalarDomain::PrimeField(q) = lattice.domain {
        if q != modulus {
            return Err(Error::DomainMismatch(format!("modulus {modulus} over F_{q}")));
        }
    }
    Ok(ClassIndex::get(lattice.rank, p, k).representatives().to_vec())
}

pub fn prime_power(m: u64) -> Option<(u64, u32)> {
    if m < 2 {
        return None;
    }
    let p = (2..=m).find(|d| m % d == 0)?;
    let mut r = m;
    let mut k = 0;
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::primitive_part;

    fn z2(v: u64) -> Value {
        Value::Residue(v)
    }

    fn typical_p2() -> InvariantFunction {
        // Depth-1 staircase on Z^2 with C = A: second coordinate even is the deeper layer.
        InvariantFunction::depth_k_from_rule(2, 2, 1, ValueSet::Residue(2), Window::new(8, 3), |r| z2((r[1] % 2 == 0) as u64)).unwrap()
    }

    #[test]
    fn constant_evaluates_everywhere() {
        let f = InvariantFunction::depth_k_from_rule(2, 3, 1, ValueSet::Residue(2), Window::new(6, 1), |_| z2(1)).unwrap();
        assert_eq!(f.evaluate(&[3, 5]).unwrap(), z2(1));
        assert!(matches!(f.evaluate(&[0, 0]), Err(Error::ZeroElement)));
        assert!(matches!(f.evaluate(&[7, 0]), Err(Error::OutOfWindow { .. })));
    }

    #[test]
    fn typical_layers() {
        let f = typical_p2();
        assert_eq!(f.evaluate(&[0, 1]).unwrap(), z2(0));
        assert_eq!(f.evaluate(&[1, 0]).unwrap(), z2(1));
        // (0,2) is a multiple of the generic element (0,1).
        assert_eq!(f.evaluate(&[0, 2]).unwrap(), z2(0));
        assert_eq!(f.evaluate(&[2, 4]).unwrap(), z2(1));
    }

    #[test]
    fn depth_two_unit_invariance() {
        let f = InvariantFunction::depth_k_from_rule(2, 2, 2, ValueSet::Residue(4), Window::new(8, 2), |r| {
            z2((r[0] + 2 * r[1]).rem_euclid(4) as u64)
        })
        .unwrap();
        assert_eq!(f.evaluate(&[5, 3]).unwrap(), f.evaluate(&[1, 3]).unwrap());
        assert!(f.check_invariance().is_none());
    }

    #[test]
    fn invariance_failure_over_f3() {
        let mut values = vec![z2(0); 8];
        // code of (1,0) is 3, of (2,0) is 6.
        values[6 - 1] = z2(1);
        let f = InvariantFunction::full_table(3, 2, ValueSet::Residue(2), values).unwrap();
        assert_eq!(f.check_invariance(), Some((2, vec![1, 0])));
    }

    #[test]
    fn primitive_class_counts() {
        assert_eq!(enumerate_primitive_classes(&Lattice::fq(3, 2), 3).unwrap().len(), 4);
        let z = enumerate_primitive_classes(&Lattice::integer(2), 2).unwrap();
        let set: BTreeSet<Vector> = z.into_iter().collect();
        assert_eq!(set, BTreeSet::from([vec![1, 0], vec![0, 1], vec![1, 1]]));
        assert_eq!(enumerate_primitive_classes(&Lattice::integer(3), 2).unwrap().len(), 7);
    }

    #[test]
    fn restriction_composes() {
        let f = Arc::new(
            InvariantFunction::depth_k_from_rule(3, 2, 2, ValueSet::Residue(2), Window::new(6, 2), |r| {
                z2(((r[0] + r[1] * r[2]) % 2) as u64)
            })
            .unwrap(),
        );
        let l = Lattice::integer(3);
        let b = Subgroup::generated(&l, &[vec![1, 2, 0], vec![0, 1, 1]]);
        let fb = Arc::new(f.restrict(&b).unwrap());
        // C = <(1,3,1)> inside B, expressed in B's coordinates.
        let c_in_b = Subgroup::generated(fb.lattice(), &[b.coordinates(&[1, 3, 1]).unwrap()]);
        let c = Subgroup::generated(&l, &[vec![1, 3, 1]]);
        let via_b = fb.restrict(&c_in_b).unwrap();
        let direct = f.restrict(&c).unwrap();
        for k in [1i64, 2, 3, -5] {
            assert_eq!(via_b.eval_index(&[k]), direct.eval_index(&[k]));
        }
    }

    #[test]
    fn postcompose_collapse_and_partial() {
        let f = Arc::new(typical_p2());
        let g = f.postcompose(ValueSet::Residue(2), |_| Some(z2(0))).unwrap();
        assert_eq!(g.palette(), &[z2(0)]);
        assert!(matches!(f.postcompose(ValueSet::Residue(2), |v| (v == &z2(0)).then(|| z2(1))), Err(Error::PartialMap(_))));
    }

    #[test]
    fn oracle_snapshot_matches() {
        let rule: Rule = Arc::new(|v: &[i64]| {
            let p = primitive_part(v).unwrap();
            Value::Residue((p[0].rem_euclid(2) == 0) as u64)
        });
        let f = InvariantFunction::oracle(Lattice::integer(2), ValueSet::Residue(2), Window::new(5, 1), rule).unwrap();
        assert!(!f.is_exact());
        assert!(f.check_invariance().is_none());
        let s = f.snapshot(2, 1).unwrap();
        for v in window_vectors(f.lattice(), &f.window()) {
            assert_eq!(s.evaluate(&v).unwrap(), f.evaluate(&v).unwrap());
        }
    }
}
