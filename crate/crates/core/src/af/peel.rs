//! Layer peeling: split off the generic layer of a group, recurse on the
//! subgroup generated by everything else.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::function::{window_vectors, InvariantFunction};
use crate::lattice::{Lattice, ScalarDomain, Subgroup, Vector};

use super::{detect_exceptional, ensure_invariant, AFVerdict, Filtration, Layer, Witness};

#[derive(Debug, Clone, Copy)]
pub struct PeelOptions {
    /// Groups with at most this many window elements are searched for a
    /// distinct-value triple before falling back to an unsplittable witness.
    pub triple_search_limit: usize,
    /// Try to match the exceptional rank-3 patterns on refutation.
    pub detect_exceptional: bool,
}

impl Default for PeelOptions {
    fn default() -> Self {
        PeelOptions { triple_search_limit: 2000, detect_exceptional: true }
    }
}

pub(crate) type Element = (Vector, u16);

pub(crate) struct SpanBuilder<'a> {
    lattice: &'a Lattice,
    pub group: Subgroup,
    pub gens: Vec<Vector>,
}

impl<'a> SpanBuilder<'a> {
    pub fn new(lattice: &'a Lattice) -> Self {
        SpanBuilder { lattice, group: Subgroup::generated(lattice, &[]), gens: Vec::new() }
    }

    pub fn add(&mut self, v: &[i64]) -> bool {
        if self.group.contains(v) {
            return false;
        }
        let mut rows = self.group.basis.clone();
        rows.push(v.to_vec());
        self.group = Subgroup::generated(self.lattice, &rows);
        self.gens.push(v.to_vec());
        true
    }
}

pub(crate) struct Stuck {
    pub group: Subgroup,
    pub elems: Vec<Element>,
}

struct Peeler<'a> {
    lattice: &'a Lattice,
    failed: HashMap<Subgroup, Rc<Stuck>>,
}

impl Peeler<'_> {
    fn peel(&mut self, group: Subgroup, elems: Vec<Element>) -> Result<Vec<(Subgroup, u16)>, Rc<Stuck>> {
        let attained: BTreeSet<u16> = elems.iter().map(|e| e.1).collect();
        if attained.len() <= 1 {
            return Ok(vec![(group, attained.into_iter().next().unwrap_or(0))]);
        }
        let mut first_failure = None;
        for &c in &attained {
            let mut span = SpanBuilder::new(self.lattice);
            for (v, val) in &elems {
                if *val != c {
                    span.add(v);
                }
            }
            if span.group == group {
                continue;
            }
            if let Some(stuck) = self.failed.get(&span.group) {
                first_failure.get_or_insert_with(|| stuck.clone());
                continue;
            }
            let inner: Vec<Element> = elems.iter().filter(|(v, _)| span.group.contains(v)).cloned().collect();
            match self.peel(span.group.clone(), inner) {
                Ok(mut chain) => {
                    chain.insert(0, (group, c));
                    return Ok(chain);
                }
                Err(stuck) => {
                    self.failed.insert(span.group, stuck.clone());
                    first_failure.get_or_insert(stuck);
                }
            }
        }
        Err(first_failure.unwrap_or_else(|| Rc::new(Stuck { group, elems })))
    }
}

pub(crate) fn window_elements(f: &InvariantFunction) -> Vec<Element> {
    window_vectors(f.lattice(), &f.window())
        .into_iter()
        .map(|v| {
            let val = f.eval_index(&v);
            (v, val)
        })
        .collect()
}

/// Peels `f` on its window; `Err` carries the group where no layer splits off.
pub(crate) fn peel_function(f: &InvariantFunction) -> Result<Filtration, Rc<Stuck>> {
    let lattice = f.lattice();
    let mut peeler = Peeler { lattice, failed: HashMap::new() };
    let chain = peeler.peel(Subgroup::whole(lattice), window_elements(f))?;
    Ok(Filtration { layers: chain.into_iter().map(|(g, c)| Layer { generators: g.basis, value: f.value_of(c).clone() }).collect() })
}

pub(crate) fn stuck_witness(f: &InvariantFunction, stuck: &Stuck, limit: usize) -> Witness {
    let lattice = f.lattice();
    if stuck.elems.len() <= limit {
        if let Some(w) = find_triple(f, &stuck.elems) {
            return w;
        }
    }
    let attained: BTreeSet<u16> = stuck.elems.iter().map(|e| e.1).collect();
    let spans = attained
        .iter()
        .map(|&c| {
            let mut span = SpanBuilder::new(lattice);
            for (v, val) in &stuck.elems {
                if *val != c {
                    span.add(v);
                }
            }
            (f.value_of(c).clone(), span.gens)
        })
        .collect();
    Witness::Unsplittable { group: stuck.group.basis.clone(), spans }
}

pub(crate) fn find_triple(f: &InvariantFunction, elems: &[Element]) -> Option<Witness> {
    let lattice = f.lattice();
    let window = f.window();
    for (i, (a, fa)) in elems.iter().enumerate() {
        for (b, fb) in &elems[i + 1..] {
            if fa == fb {
                continue;
            }
            let s = lattice.normalize(&a.iter().zip(b).map(|(x, y)| x + y).collect::<Vector>());
            if lattice.is_zero(&s) || (lattice.domain == ScalarDomain::Integer && !window.contains(&s)) {
                continue;
            }
            let fs = f.eval_index(&s);
            if fs != *fa && fs != *fb {
                return Some(Witness::DistinctTriple {
                    a: a.clone(),
                    b: b.clone(),
                    values: [f.value_of(*fa).clone(), f.value_of(*fb).clone(), f.value_of(fs).clone()],
                });
            }
        }
    }
    None
}

pub fn check_af(f: &InvariantFunction) -> Result<AFVerdict> {
    check_af_with(f, &PeelOptions::default())
}

pub fn check_af_with(f: &InvariantFunction, opts: &PeelOptions) -> Result<AFVerdict> {
    ensure_invariant(f)?;
    let window = f.window();
    if f.lattice().domain == ScalarDomain::Integer && window.bound < 1 {
        return Err(Error::WindowTooShallow("box radius must be at least 1".into()));
    }
    match peel_function(f) {
        Ok(filtration) => Ok(AFVerdict::Certified { filtration, window }),
        Err(stuck) => {
            if opts.detect_exceptional {
                if let Some((kind, basis)) = detect_exceptional(f)? {
                    return Ok(AFVerdict::Exceptional { exceptional: kind, basis, window });
                }
            }
            Ok(AFVerdict::Refuted { witness: stuck_witness(f, &stuck, opts.triple_search_limit), window })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{Value, ValueSet, Window};

    fn r(v: u64) -> Value {
        Value::Residue(v)
    }

    #[test]
    fn constant_is_one_layer() {
        let f = InvariantFunction::depth_k_from_rule(3, 2, 1, ValueSet::Residue(2), Window::new(3, 1), |_| r(0)).unwrap();
        let AFVerdict::Certified { filtration, .. } = check_af(&f).unwrap() else { panic!() };
        assert_eq!(filtration.layers.len(), 1);
        filtration.verify(&f).unwrap();
    }

    #[test]
    fn delta_on_projective_plane() {
        let f = InvariantFunction::from_points(3, 3, ValueSet::Residue(2), |v| {
            r((v.iter().filter(|&&x| x != 0).count() == 1 && v[2] != 0) as u64)
        })
        .unwrap();
        let AFVerdict::Certified { filtration, .. } = check_af(&f).unwrap() else { panic!() };
        assert_eq!(filtration.layers.len(), 2);
        filtration.verify(&f).unwrap();
    }

    #[test]
    fn three_values_on_a_line_refuted() {
        let f = InvariantFunction::from_points(5, 2, ValueSet::Residue(3), |v| {
            let p = crate::classes::ClassIndex::get(2, 5, 1);
            r((p.class_of_residue(v).unwrap() % 3) as u64)
        })
        .unwrap();
        let AFVerdict::Refuted { witness, .. } = check_af(&f).unwrap() else { panic!() };
        witness.recheck(&f).unwrap();
    }

    #[test]
    fn non_invariant_table_rejected() {
        let mut values = vec![r(0); 8];
        values[5] = r(1);
        let f = InvariantFunction::full_table(3, 2, ValueSet::Residue(2), values).unwrap();
        assert!(matches!(check_af(&f), Err(Error::InvarianceFailure { .. })));
    }
}
