//! Primitive residue classes modulo `p^k` up to unit scaling.
//!
//! For `k = 1` these are the points of the projective space over `F_p`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::lattice::{content, mod_inverse, Vector};

#[derive(Debug)]
pub struct ClassIndex {
    pub rank: usize,
    pub p: u64,
    pub depth: u32,
    pub modulus: i64,
    reps: Vec<Vector>,
    lookup: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl ClassIndex {
    fn build(rank: usize, p: u64, depth: u32) -> ClassIndex {
        let modulus = (p as i64).pow(depth);
        let total = (modulus as usize).pow(rank as u32);
        let mut lookup = vec![NONE; total];
        let mut reps = Vec::new();
        let mut v = vec![0i64; rank];
        for code in 0..total {
            let mut c = code;
            for i in (0..rank).rev() {
                v[i] = (c % modulus as usize) as i64;
                c /= modulus as usize;
            }
            if let Some(i) = v.iter().position(|&x| x % p as i64 != 0) {
                if v[i] == 1 {
                    lookup[code] = reps.len() as u32;
                    reps.push(v.clone());
                }
            }
        }
        ClassIndex { rank, p, depth, modulus, reps, lookup }
    }

    /// Shared, lazily built index for `(rank, p, depth)`.
    pub fn get(rank: usize, p: u64, depth: u32) -> Arc<ClassIndex> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64, u32), Arc<ClassIndex>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap();
        guard.entry((rank, p, depth)).or_insert_with(|| Arc::new(ClassIndex::build(rank, p, depth))).clone()
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Canonical representatives in lexicographic order.
    pub fn representatives(&self) -> &[Vector] {
        &self.reps
    }

    /// Class of a vector that is not divisible by `p`; `None` otherwise.
    pub fn class_of_residue(&self, v: &[i64]) -> Option<usize> {
        let m = self.modulus;
        let p = self.p as i64;
        let i = v.iter().position(|&x| x.rem_euclid(p) != 0)?;
        let inv = mod_inverse(v[i], m)? as i128;
        let mut code: usize = 0;
        for &x in v {
            let r = ((x as i128 * inv).rem_euclid(m as i128)) as usize;
            code = code * m as usize + r;
        }
        let idx = self.lookup[code];
        debug_assert_ne!(idx, NONE);
        Some(idx as usize)
    }

    /// Class of the primitive part of a nonzero integer vector.
    pub fn class_of(&self, v: &[i64]) -> Option<usize> {
        let g = content(v);
        if g == 0 {
            return None;
        }
        let mut g_p = g;
        let p = self.p as i64;
        while g_p % p == 0 {
            g_p /= p;
        }
        // Dividing by the prime-to-p part of the content only rescales by a unit.
        let scale = g / g_p;
        let w: Vec<i64> = v.iter().map(|x| x / scale).collect();
        self.class_of_residue(&w)
    }
}

/// Number of classes: `p^{(k-1)(n-1)} (p^n - 1)/(p - 1)`.
pub fn class_count(rank: usize, p: u64, depth: u32) -> u64 {
    let n = rank as u32;
    p.pow((depth - 1) * (n - 1)) * (p.pow(n) - 1) / (p - 1)
}
