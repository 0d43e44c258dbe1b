//! Rank-3 reduction and the two exceptional patterns: the Fano pattern on
//! `(Z/2)^3` (and its lift to `Z^3`) and its mod-4 refinement on `Z^3`.

use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;

use crate::classes::ClassIndex;
use crate::error::{Error, Result};
use crate::function::{window_vectors, InvariantFunction};
use crate::lattice::{determinant, lift_unimodular, primitive_part, ScalarDomain, Subgroup, Vector};

use super::peel::{peel_function, stuck_witness};
use super::{check_af, ensure_invariant, AFVerdict, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ExceptionalKind {
    Fano,
    Mod4,
}

/// The Fano pattern on a nonzero vector of `(Z/2)^3`: 0 on `e1+e3`, `e2+e3`,
/// `e1+e2+e3`, and 1 on the other four points.
pub fn fano_pattern(v: &[i64]) -> u8 {
    let r: Vec<i64> = v.iter().map(|x| x.rem_euclid(2)).collect();
    match r.as_slice() {
        [1, 0, 1] | [0, 1, 1] | [1, 1, 1] => 0,
        _ => 1,
    }
}

/// The mod-4 pattern on a primitive vector of `Z^3`.
pub fn mod4_pattern(n: &[i64]) -> u8 {
    let r: Vec<i64> = n.iter().map(|x| x.rem_euclid(2)).collect();
    if r != [0, 1, 0] {
        fano_pattern(n)
    } else if n[0].rem_euclid(4) == 0 {
        0
    } else {
        1
    }
}

fn combine(n: &[i64], basis: &[Vector], modulus: i64) -> Vector {
    let mut x = vec![0i64; basis[0].len()];
    for (c, b) in n.iter().zip(basis) {
        for j in 0..x.len() {
            x[j] += c * b[j];
        }
    }
    x.iter().map(|v| v.rem_euclid(modulus)).collect()
}

/// Values per class mod `2^depth`, read off the window, if `f` factors
/// through primitive residues at that depth.
fn residue_table(f: &InvariantFunction, depth: u32) -> Option<Vec<u16>> {
    let index = ClassIndex::get(3, 2, depth);
    let mut table = vec![u16::MAX; index.len()];
    for v in window_vectors(f.lattice(), &f.window()) {
        let c = index.class_of(&v)?;
        let val = f.eval_index(&v);
        if table[c] == u16::MAX {
            table[c] = val;
        } else if table[c] != val {
            return None;
        }
    }
    table.iter().all(|&t| t != u16::MAX).then_some(table)
}

/// Searches bases of `(Z/2^depth)^3` under which `table` reproduces `pattern`
/// up to swapping the two values. Returns the basis rows mod `2^depth`.
fn match_pattern(table: &[u16], depth: u32, pattern: fn(&[i64]) -> u8) -> Option<Vec<Vector>> {
    let index = ClassIndex::get(3, 2, depth);
    let m = index.modulus;
    let reps = index.representatives();
    let expected: Vec<u8> = reps.iter().map(|r| pattern(r)).collect();
    let vectors: Vec<Vector> = (0..m * m * m).map(|c| vec![c / (m * m), (c / m) % m, c % m]).collect();
    for b1 in &vectors {
        for b2 in &vectors {
            for b3 in &vectors {
                let basis = vec![b1.clone(), b2.clone(), b3.clone()];
                if determinant(&basis).rem_euclid(2) == 0 {
                    continue;
                }
                let mut flip: Option<bool> = None;
                let ok = reps.iter().zip(&expected).all(|(n, &e)| {
                    let x = combine(n, &basis, m);
                    let got = table[index.class_of_residue(&x).unwrap()];
                    let this = (got == 0) != (e == 0);
                    *flip.get_or_insert(this) == this
                });
                if ok {
                    return Some(basis);
                }
            }
        }
    }
    None
}

/// Matches `f` against the exceptional patterns; returns the kind and a
/// normalizing basis (rows) of the domain.
pub fn detect_exceptional(f: &InvariantFunction) -> Result<Option<(ExceptionalKind, Vec<Vector>)>> {
    if f.rank() != 3 || f.palette().len() != 2 {
        return Ok(None);
    }
    match f.lattice().domain {
        ScalarDomain::PrimeField(2) => {
            let index = ClassIndex::get(3, 2, 1);
            let table: Vec<u16> = index.representatives().iter().map(|r| f.eval_index(r)).collect();
            Ok(match_pattern(&table, 1, fano_pattern).map(|b| (ExceptionalKind::Fano, b)))
        }
        ScalarDomain::PrimeField(_) => Ok(None),
        ScalarDomain::Integer => {
            if f.window().bound < 2 {
                return Err(Error::WindowTooShallow("exceptional detection needs a box of radius 2".into()));
            }
            let (kind, depth, pattern): (ExceptionalKind, u32, fn(&[i64]) -> u8) = if residue_table(f, 1).is_some() {
                (ExceptionalKind::Fano, 1, fano_pattern)
            } else {
                (ExceptionalKind::Mod4, 2, mod4_pattern)
            };
            let Some(table) = residue_table(f, depth) else {
                return Ok(None);
            };
            let Some(basis) = match_pattern(&table, depth, pattern) else {
                return Ok(None);
            };
            let lifted = lift_unimodular(&basis, 1 << depth)
                .ok_or_else(|| Error::UnhandledConfiguration("basis does not lift to a unimodular one".into()))?;
            Ok(Some((kind, lifted)))
        }
    }
}

fn search_vectors(radius: i64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for x in -radius..=radius {
        for y in -radius..=radius {
            for z in -radius..=radius {
                let v = vec![x, y, z];
                let Some(p) = primitive_part(&v) else {
                    continue;
                };
                if p == v && v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0) {
                    out.push(v);
                }
            }
        }
    }
    out.sort_by_key(|v| (v.iter().map(|c| c.abs()).sum::<i64>(), std::cmp::Reverse(v.clone())));
    out
}

/// Searches for `(a1, a2, b1)` with `a1, a2, a1+b1, a2+b1` in the first value
/// class and `b1` in the second, among primitive vectors in a radius-2 box.
pub fn detect_special_basis(f: &InvariantFunction) -> Result<Option<[Vector; 3]>> {
    if f.rank() != 3 || f.lattice().domain != ScalarDomain::Integer {
        return Err(Error::DomainMismatch("special bases live in Z^3".into()));
    }
    f.require_exact()?;
    if f.window().bound < 2 {
        return Err(Error::WindowTooShallow("special-basis search needs a box of radius 2".into()));
    }
    if f.palette().len() != 2 {
        return Ok(None);
    }
    let vectors = search_vectors(2);
    let (va, vb) = (0u16, 1u16);
    let in_a: Vec<Vector> = vectors.iter().filter(|v| f.eval_index(v) == va).cloned().collect();
    let signed_a: Vec<Vector> = in_a.iter().flat_map(|v| [v.clone(), v.iter().map(|x| -x).collect()]).collect();
    for b1 in vectors.iter().filter(|v| f.eval_index(v) == vb) {
        let shifted: Vec<&Vector> = signed_a
            .iter()
            .filter(|a| {
                let s: Vector = a.iter().zip(b1).map(|(x, y)| x + y).collect();
                s.iter().any(|&c| c != 0) && f.eval_index(&s) == va
            })
            .collect();
        for (i, a1) in shifted.iter().enumerate() {
            for a2 in &shifted[i + 1..] {
                if determinant(&[(*a1).clone(), (*a2).clone(), b1.clone()]).abs() == 1 {
                    return Ok(Some([(*a1).clone(), (*a2).clone(), b1.clone()]));
                }
            }
        }
    }
    Ok(None)
}

/// First rank-2 restriction that is not AF on its window, lifted to ambient
/// coordinates.
pub(crate) fn rank2_sweep(f: &Arc<InvariantFunction>) -> Result<Option<Witness>> {
    let lattice = f.lattice().clone();
    let pairs: Vec<Vector> = match lattice.domain {
        ScalarDomain::PrimeField(q) => ClassIndex::get(lattice.rank, q, 1).representatives().to_vec(),
        ScalarDomain::Integer => search_vectors(f.window().bound.min(2)),
    };
    let mut seen = HashSet::new();
    for (i, u) in pairs.iter().enumerate() {
        for v in &pairs[i + 1..] {
            let sub = Subgroup::generated(&lattice, &[u.clone(), v.clone()]);
            if sub.rank() < 2 || !seen.insert(sub.clone()) {
                continue;
            }
            let restricted = f.restrict(&sub)?;
            if let Err(stuck) = peel_function(&restricted) {
                let w = stuck_witness(&restricted, &stuck, 2000);
                return Ok(Some(w.lift(&sub.basis, &lattice)));
            }
        }
    }
    Ok(None)
}

/// Rank-3 verdict: requires AF rank-2 restrictions, then certifies or
/// normalizes to an exceptional pattern.
pub fn rank3_reduce(f: &InvariantFunction) -> Result<AFVerdict> {
    if f.rank() != 3 {
        return Err(Error::DomainMismatch(format!("rank-3 reduction on rank {}", f.rank())));
    }
    ensure_invariant(f)?;
    let shared = Arc::new(f.clone());
    if let Some(w) = rank2_sweep(&shared)? {
        return Err(Error::Rank2Failure(Box::new(w)));
    }
    check_af(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{Value, ValueSet, Window};

    fn r(v: u8) -> Value {
        Value::Residue(v as u64)
    }

    fn fano_f2() -> InvariantFunction {
        InvariantFunction::from_points(2, 3, ValueSet::Residue(2), |v| r(fano_pattern(v))).unwrap()
    }

    fn mod4_z3() -> InvariantFunction {
        InvariantFunction::depth_k_from_rule(3, 2, 2, ValueSet::Residue(2), Window::new(4, 3), |v| r(mod4_pattern(v))).unwrap()
    }

    #[test]
    fn fano_on_f2_is_exceptional() {
        let f = fano_f2();
        let AFVerdict::Exceptional { exceptional, basis, .. } = rank3_reduce(&f).unwrap() else { panic!() };
        assert_eq!(exceptional, ExceptionalKind::Fano);
        let flip = f.eval_index(&basis[0]) as u8 != fano_pattern(&[1, 0, 0]);
        for n in ClassIndex::get(3, 2, 1).representatives() {
            let x = combine(n, &basis, 2);
            assert_eq!(f.eval_index(&x) as u8 ^ flip as u8, fano_pattern(n));
        }
    }

    #[test]
    fn collinear_split_is_af() {
        let f = InvariantFunction::from_points(2, 3, ValueSet::Residue(2), |v| r((v[2] == 0) as u8)).unwrap();
        assert!(rank3_reduce(&f).unwrap().is_certified());
    }

    #[test]
    fn mod4_is_exceptional() {
        let f = mod4_z3();
        let AFVerdict::Exceptional { exceptional, basis, .. } = rank3_reduce(&f).unwrap() else { panic!() };
        assert_eq!(exceptional, ExceptionalKind::Mod4);
        assert_eq!(determinant(&basis).abs(), 1);
    }

    #[test]
    fn special_basis_found() {
        let f = InvariantFunction::depth_k_from_rule(3, 2, 1, ValueSet::Residue(2), Window::new(4, 2), |v| {
            r((v[0] % 2 == 0 && v[1] % 2 == 0) as u8)
        })
        .unwrap();
        assert_eq!(detect_special_basis(&f).unwrap(), Some([vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]));
        let AFVerdict::Certified { filtration, .. } = rank3_reduce(&f).unwrap() else { panic!() };
        filtration.verify(&f).unwrap();
        let a1 = Subgroup::generated(f.lattice(), &filtration.layers[1].generators);
        assert_eq!(a1, Subgroup::generated(f.lattice(), &[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]));
    }

    #[test]
    fn special_basis_absent() {
        let constant = InvariantFunction::depth_k_from_rule(3, 2, 1, ValueSet::Residue(2), Window::new(3, 2), |_| r(0)).unwrap();
        assert_eq!(detect_special_basis(&constant).unwrap(), None);
        let fano = InvariantFunction::depth_k_from_rule(3, 2, 1, ValueSet::Residue(2), Window::new(3, 2), |v| r(fano_pattern(v))).unwrap();
        assert_eq!(detect_special_basis(&fano).unwrap(), None);
    }
}
