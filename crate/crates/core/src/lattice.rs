//! Groups of the two admissible classes and their subgroups.
//!
//! Free lattices `Z^n` carry subgroups in Hermite normal form; vector spaces
//! `F_q^n` carry subspaces in reduced row echelon form. Both forms are
//! canonical, so two generating sets of the same subgroup normalize to
//! identical bases and subgroups can be compared and hashed directly.

use serde::{Deserialize, Serialize};

use crate::error::ParseError;

pub type Vector = Vec<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalarDomain {
    /// Torsion-free groups, realized as `Z^n`.
    Integer,
    /// Vector spaces over the prime field `F_q`.
    PrimeField(u64),
}

impl ScalarDomain {
    pub fn prime_field(q: u64) -> Result<ScalarDomain, ParseError> {
        if q < 2 || !(2..q).take_while(|d| d * d <= q).all(|d| q % d != 0) {
            return Err(ParseError::invalid(format!("field order {q} is not prime")));
        }
        Ok(ScalarDomain::PrimeField(q))
    }

    /// Whether `n` acts as a unit scalar.
    pub fn is_unit(&self, n: i64) -> bool {
        match self {
            ScalarDomain::Integer => n != 0,
            ScalarDomain::PrimeField(q) => n.rem_euclid(*q as i64) != 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    pub domain: ScalarDomain,
    pub rank: usize,
}

impl Lattice {
    pub fn integer(rank: usize) -> Lattice {
        Lattice { domain: ScalarDomain::Integer, rank }
    }

    pub fn fq(q: u64, rank: usize) -> Lattice {
        Lattice { domain: ScalarDomain::PrimeField(q), rank }
    }

    /// Reduces coordinates into canonical form (`[0, q)` over `F_q`).
    pub fn normalize(&self, v: &[i64]) -> Vector {
        match self.domain {
            ScalarDomain::Integer => v.to_vec(),
            ScalarDomain::PrimeField(q) => v.iter().map(|x| x.rem_euclid(q as i64)).collect(),
        }
    }

    pub fn is_zero(&self, v: &[i64]) -> bool {
        self.normalize(v).iter().all(|&x| x == 0)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn content(v: &[i64]) -> i64 {
    v.iter().fold(0, |g, &x| gcd(g, x))
}

/// `v / gcd(v)`, or `None` for the zero vector.
pub fn primitive_part(v: &[i64]) -> Option<Vector> {
    let g = content(v);
    (g != 0).then(|| v.iter().map(|x| x / g).collect())
}

pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m))
}

/// Row-style Hermite normal form of the span of `rows`: pivots move strictly
/// right, are positive, and entries above a pivot lie in `[0, pivot)`.
pub fn hermite_normal_form(rows: &[Vector], ncols: usize) -> Vec<Vector> {
    let mut m: Vec<Vec<i128>> =
        rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).filter(|r: &Vec<i128>| r.iter().any(|&x| x != 0)).collect();
    let mut pivot_row = 0;
    for col in 0..ncols {
        if pivot_row >= m.len() {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..m.len() {
                if m[r][col] != 0 && best.is_none_or(|b| m[r][col].abs() < m[b][col].abs()) {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            m.swap(pivot_row, b);
            let mut done = true;
            for r in pivot_row + 1..m.len() {
                if m[r][col] != 0 {
                    let q = m[r][col].div_euclid(m[pivot_row][col]);
                    for c in col..ncols {
                        m[r][c] -= q * m[pivot_row][c];
                    }
                    if m[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[pivot_row][col] == 0 {
            continue;
        }
        if m[pivot_row][col] < 0 {
            for c in col..ncols {
                m[pivot_row][c] = -m[pivot_row][c];
            }
        }
        let p = m[pivot_row][col];
        for r in 0..pivot_row {
            let q = m[r][col].div_euclid(p);
            if q != 0 {
                for c in col..ncols {
                    m[r][c] -= q * m[pivot_row][c];
                }
            }
        }
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    m.retain(|r| r.iter().any(|&x| x != 0));
    m.into_iter().map(|r| r.into_iter().map(|x| i64::try_from(x).expect("HNF entry overflow")).collect()).collect()
}

/// Reduced row echelon form over `F_q`.
pub fn rref_mod(rows: &[Vector], ncols: usize, q: u64) -> Vec<Vector> {
    let q = q as i64;
    let mut m: Vec<Vector> = rows.iter().map(|r| r.iter().map(|x| x.rem_euclid(q)).collect()).collect();
    let mut pivot_row = 0;
    for col in 0..ncols {
        let Some(r) = (pivot_row..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(pivot_row, r);
        let inv = mod_inverse(m[pivot_row][col], q).unwrap();
        for c in 0..ncols {
            m[pivot_row][c] = m[pivot_row][c] * inv % q;
        }
        for r in 0..m.len() {
            if r != pivot_row && m[r][col] != 0 {
                let f = m[r][col];
                for c in 0..ncols {
                    m[r][c] = (m[r][c] - f * m[pivot_row][c]).rem_euclid(q);
                }
            }
        }
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    m
}

fn pivot(row: &[i64]) -> usize {
    row.iter().position(|&x| x != 0).expect("nonzero basis row")
}

/// A subgroup of `Z^n` or `F_q^n`, held in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subgroup {
    pub modulus: Option<u64>,
    pub ambient: usize,
    pub basis: Vec<Vector>,
}

impl Subgroup {
    pub fn generated(lattice: &Lattice, gens: &[Vector]) -> Subgroup {
        let basis = match lattice.domain {
            ScalarDomain::Integer => hermite_normal_form(gens, lattice.rank),
            ScalarDomain::PrimeField(q) => rref_mod(gens, lattice.rank, q),
        };
        Subgroup { modulus: lattice.modulus(), ambient: lattice.rank, basis }
    }

    pub fn whole(lattice: &Lattice) -> Subgroup {
        let gens: Vec<Vector> = (0..lattice.rank).map(|i| (0..lattice.rank).map(|j| (i == j) as i64).collect()).collect();
        Subgroup::generated(lattice, &gens)
    }

    pub fn lattice(&self) -> Lattice {
        match self.modulus {
            None => Lattice::integer(self.ambient),
            Some(q) => Lattice::fq(q, self.ambient),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Coefficients of `v` in the canonical basis, if `v` is a member.
    pub fn coordinates(&self, v: &[i64]) -> Option<Vector> {
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let mut coeffs = Vec::with_capacity(self.basis.len());
        match self.modulus {
            None => {
                for row in &self.basis {
                    let c = pivot(row);
                    if w[c] % row[c] as i128 != 0 {
                        return None;
                    }
                    let k = w[c] / row[c] as i128;
                    for j in 0..w.len() {
                        w[j] -= k * row[j] as i128;
                    }
                    coeffs.push(k as i64);
                }
            }
            Some(q) => {
                let q = q as i128;
                for x in w.iter_mut() {
                    *x = x.rem_euclid(q);
                }
                for row in &self.basis {
                    let c = pivot(row);
                    let k = w[c];
                    for j in 0..w.len() {
                        w[j] = (w[j] - k * row[j] as i128).rem_euclid(q);
                    }
                    coeffs.push(k as i64);
                }
            }
        }
        w.iter().all(|&x| x == 0).then_some(coeffs)
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    /// Element with the given coordinates in the canonical basis.
    pub fn element(&self, coeffs: &[i64]) -> Vector {
        let mut v = vec![0i64; self.ambient];
        for (c, row) in coeffs.iter().zip(&self.basis) {
            for j in 0..self.ambient {
                v[j] += c * row[j];
            }
        }
        match self.modulus {
            None => v,
            Some(q) => v.into_iter().map(|x| x.rem_euclid(q as i64)).collect(),
        }
    }

    /// `|det|` of the basis for full-rank integer subgroups, i.e. the index.
    pub fn index(&self) -> Option<u128> {
        if self.modulus.is_some() || self.rank() != self.ambient {
            return None;
        }
        let mut d: i128 = 1;
        for row in &self.basis {
            d *= row[pivot(row)] as i128;
        }
        Some(d.unsigned_abs())
    }

    /// `k * self`.
    pub fn scaled(&self, k: i64) -> Subgroup {
        let gens: Vec<Vector> = self.basis.iter().map(|r| r.iter().map(|x| x * k).collect()).collect();
        Subgroup::generated(&self.lattice(), &gens)
    }
}

impl Lattice {
    pub fn modulus(&self) -> Option<u64> {
        match self.domain {
            ScalarDomain::Integer => None,
            ScalarDomain::PrimeField(q) => Some(q),
        }
    }
}

/// Determinant of a small square integer matrix (Bareiss).
pub fn determinant(m: &[Vector]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                return 0;
            };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Lifts a matrix over `Z/N` with determinant `±1 mod N` to an integer
/// matrix of determinant `±1` congruent to it mod `N`. Rows are basis vectors.
pub fn lift_unimodular(m: &[Vector], modulus: i64) -> Option<Vec<Vector>> {
    let n = m.len();
    let big = modulus;
    let mut a: Vec<Vector> = m.iter().map(|r| r.iter().map(|x| x.rem_euclid(big)).collect()).collect();
    // Integer elementary row operations E with E * m ≡ D (mod N); record them.
    let mut ops: Vec<(usize, usize, i64)> = Vec::new();
    let unit = |x: i64| gcd(x, big) == 1;
    for i in 0..n {
        if !unit(a[i][i]) {
            let r = (i + 1..n).find(|&r| unit((a[i][i] + a[r][i]).rem_euclid(big)))?;
            for c in 0..n {
                a[i][c] = (a[i][c] + a[r][c]).rem_euclid(big);
            }
            ops.push((i, r, 1));
        }
        let inv = mod_inverse(a[i][i], big)?;
        for r in 0..n {
            if r != i && a[r][i] != 0 {
                let k = (a[r][i] * inv).rem_euclid(big);
                for c in 0..n {
                    a[r][c] = (a[r][c] - k * a[i][c]).rem_euclid(big);
                }
                ops.push((r, i, -k));
            }
        }
    }
    // a is now diagonal mod N. Lift the diagonal to an integer unimodular matrix.
    let diag: Vec<i64> = (0..n).map(|i| a[i][i]).collect();
    let mut lift: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    let n2 = (big as i128) * (big as i128);
    let mut carry: i128 = 1;
    for i in 0..n.saturating_sub(1) {
        // Block diag(d, d^-1) on rows i, i+1 with d = carry * diag[i].
        let d = (carry * diag[i] as i128).rem_euclid(big as i128);
        let dinv = mod_inverse(d as i64, (n2) as i64)? as i128;
        let t = (d * dinv - 1) / n2;
        let block = [[d, big as i128 * t], [big as i128, dinv]];
        let mut next = lift.clone();
        for r in 0..n {
            next[r][i] = lift[r][i] * block[0][0] + lift[r][i + 1] * block[1][0];
            next[r][i + 1] = lift[r][i] * block[0][1] + lift[r][i + 1] * block[1][1];
        }
        lift = next;
        carry = d;
    }
    let last = (carry * diag[n - 1] as i128).rem_euclid(big as i128);
    if last == (big as i128 - 1) {
        for r in 0..n {
            lift[r][n - 1] = -lift[r][n - 1];
        }
    } else if last != 1 {
        return None;
    }
    // m ≡ E^-1 * D: undo the recorded row operations in reverse.
    for &(r, src, k) in ops.iter().rev() {
        for c in 0..n {
            lift[r][c] -= k as i128 * lift[src][c];
        }
    }
    let out: Vec<Vector> = lift.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect();
    let det = determinant(&out);
    (det.abs() == 1).then_some(out)
}
