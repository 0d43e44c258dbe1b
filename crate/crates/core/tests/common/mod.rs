//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the library's decision procedures.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

/// Projective points of `F_q^n` as coordinate vectors, first nonzero entry 1.
pub fn projective_points(q: i64, n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for code in 1..q.pow(n as u32) {
        let v: Vec<i64> = (0..n).map(|i| (code / q.pow(i as u32)) % q).collect();
        if v.iter().find(|&&x| x != 0) == Some(&1) {
            out.push(v);
        }
    }
    out
}

fn normalize(v: &[i64], q: i64) -> Option<Vec<i64>> {
    let lead = *v.iter().find(|&&x| x.rem_euclid(q) != 0)?;
    let inv = (1..q).find(|k| (k * lead).rem_euclid(q) == 1).unwrap();
    Some(v.iter().map(|x| (x * inv).rem_euclid(q)).collect())
}

/// Every subspace of `F_q^n`, as a bitmask over `projective_points`.
pub struct SubspaceLattice {
    pub q: i64,
    pub points: Vec<Vec<i64>>,
    pub subspaces: Vec<u64>,
    /// Maximal proper subspaces of each subspace.
    hyperplanes: HashMap<u64, Vec<u64>>,
}

impl SubspaceLattice {
    pub fn new(q: i64, n: usize) -> SubspaceLattice {
        let points = projective_points(q, n);
        assert!(points.len() <= 64);
        let index: HashMap<Vec<i64>, usize> = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let span = |mask: u64, extra: usize| -> u64 {
            let mut vecs: Vec<Vec<i64>> = (0..points.len()).filter(|i| mask >> i & 1 == 1).map(|i| points[i].clone()).collect();
            vecs.push(points[extra].clone());
            let mut closed: BTreeSet<Vec<i64>> = BTreeSet::new();
            closed.insert(vec![0; n]);
            for v in vecs {
                let mut next = closed.clone();
                for w in &closed {
                    for k in 0..q {
                        next.insert(w.iter().zip(&v).map(|(a, b)| (a + k * b).rem_euclid(q)).collect());
                    }
                }
                closed = next;
            }
            closed.iter().filter_map(|v| normalize(v, q)).fold(0, |m, p| m | 1u64 << index[&p])
        };
        let mut all: BTreeSet<u64> = BTreeSet::new();
        all.insert(0);
        let mut frontier = vec![0u64];
        while let Some(s) = frontier.pop() {
            for p in 0..points.len() {
                if s >> p & 1 == 0 {
                    let t = span(s, p);
                    if all.insert(t) {
                        frontier.push(t);
                    }
                }
            }
        }
        let subspaces: Vec<u64> = all.into_iter().collect();
        let mut hyperplanes = HashMap::new();
        for &w in &subspaces {
            let proper: Vec<u64> = subspaces.iter().copied().filter(|&h| h != w && h & !w == 0).collect();
            let maximal = proper.iter().copied().filter(|&h| !proper.iter().any(|&g| g != h && h & !g == 0)).collect();
            hyperplanes.insert(w, maximal);
        }
        SubspaceLattice { q, points, subspaces, hyperplanes }
    }

    pub fn full(&self) -> u64 {
        if self.points.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.points.len()) - 1
        }
    }

    /// Subspaces of projective dimension 1.
    pub fn lines(&self) -> Vec<u64> {
        self.subspaces.iter().copied().filter(|s| s.count_ones() as i64 == self.q + 1).collect()
    }

    fn constant_on(values: &[u16], mask: u64) -> bool {
        let mut seen = None;
        (0..values.len()).filter(|i| mask >> i & 1 == 1).all(|i| *seen.get_or_insert(values[i]) == values[i])
    }

    /// AF on the subspace `w`, straight from the definition: some maximal
    /// proper subspace `h` carries a constant value on `w \ h` and the
    /// function is AF on `h`.
    pub fn is_af_on(&self, values: &[u16], w: u64) -> bool {
        w == 0 || self.hyperplanes[&w].iter().any(|&h| Self::constant_on(values, w & !h) && self.is_af_on(values, h))
    }

    pub fn is_af(&self, values: &[u16]) -> bool {
        self.is_af_on(values, self.full())
    }

    /// Point index of every point of `other_order`, for translating
    /// between point orders.
    pub fn position_of(&self, p: &[i64]) -> usize {
        self.points.iter().position(|x| x == p).unwrap()
    }
}
