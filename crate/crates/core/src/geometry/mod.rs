//! Finite projective spaces, the φ-map of a pair of functions, the
//! three-point analysis and the exhaustive verification harnesses.

mod affine;
mod reduction;
mod three_point;
mod verify;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::af::{classify_rank2, Rank2Outcome};
use crate::classes::ClassIndex;
use crate::error::{Error, Result};
use crate::function::{fq_code, InvariantFunction, Value, ValueSet};
use crate::lattice::{Lattice, Vector};

pub use affine::{image_shape, phi_image, AffineLine, ImageShape, PhiMap, Ring, Scalar};
pub use reduction::{find_three_point_reduction, reduction_bits, ThreePointReduction};
pub use three_point::{three_point_analysis, ThreePointInstance, WhichAF};
pub use verify::{verify_proposition, Proposition, Report, VerifyOptions};

/// `P(F_q^n)` with its points (normalized so the first nonzero coordinate
/// is 1) and, for `n >= 2`, its lines.
#[derive(Debug, Clone)]
pub struct ProjectiveSpace {
    q: u64,
    rank: usize,
    points: Vec<Vector>,
    /// Point index for every base-q code; `usize::MAX` at zero.
    code_to_point: Vec<usize>,
    /// Points of each line, ordered by the points of `P^1` in the line's
    /// own basis `(first, second)`.
    lines: Vec<Vec<usize>>,
    line_basis: Vec<[usize; 2]>,
    lines_through: Vec<Vec<usize>>,
}

impl ProjectiveSpace {
    pub fn new(q: u64, rank: usize) -> Result<ProjectiveSpace> {
        crate::lattice::ScalarDomain::prime_field(q)?;
        if rank == 0 {
            return Err(Error::DomainMismatch("projective space of a zero vector space".into()));
        }
        let index = ClassIndex::get(rank, q, 1);
        let points = index.representatives().to_vec();
        let total = (q as usize).pow(rank as u32);
        let mut code_to_point = vec![usize::MAX; total];
        for (code, slot) in code_to_point.iter_mut().enumerate().skip(1) {
            let v = crate::function::fq_vector(code, q, rank);
            *slot = index.class_of_residue(&v).expect("nonzero vector has a class");
        }
        let mut space =
            ProjectiveSpace { q, rank, points, code_to_point, lines: Vec::new(), line_basis: Vec::new(), lines_through: Vec::new() };
        space.build_lines();
        Ok(space)
    }

    fn build_lines(&mut self) {
        let n = self.points.len();
        let line_coords = ClassIndex::get(2, self.q, 1);
        let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
        self.lines_through = vec![Vec::new(); n];
        if self.rank < 2 {
            return;
        }
        for i in 0..n {
            for j in i + 1..n {
                let pts: Vec<usize> = line_coords
                    .representatives()
                    .iter()
                    .map(|c| {
                        let v: Vector = (0..self.rank).map(|k| c[0] * self.points[i][k] + c[1] * self.points[j][k]).collect();
                        self.point_of(&v)
                    })
                    .collect();
                let mut key = pts.clone();
                key.sort_unstable();
                if seen.insert(key, ()).is_none() {
                    let l = self.lines.len();
                    for &p in &pts {
                        self.lines_through[p].push(l);
                    }
                    self.lines.push(pts);
                    self.line_basis.push([i, j]);
                }
            }
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Dimension of the underlying vector space.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn lines(&self) -> &[Vec<usize>] {
        &self.lines
    }

    pub fn lines_through(&self, point: usize) -> &[usize] {
        &self.lines_through[point]
    }

    pub fn line_basis(&self, line: usize) -> [&Vector; 2] {
        let [i, j] = self.line_basis[line];
        [&self.points[i], &self.points[j]]
    }

    /// Index of the point through a nonzero vector.
    pub fn point_of(&self, v: &[i64]) -> usize {
        self.code_to_point[fq_code(v, self.q)]
    }

    /// Point index of every nonzero vector, in base-q code order.
    pub fn point_of_code(&self) -> &[usize] {
        &self.code_to_point[1..]
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::fq(self.q, self.rank)
    }

    /// Full table for a function given per point.
    pub fn table(&self, value_set: ValueSet, per_point: &[Value]) -> Result<InvariantFunction> {
        let values = self.point_of_code().iter().map(|&p| per_point[p].clone()).collect();
        InvariantFunction::full_table(self.q, self.rank, value_set, values)
    }

    /// Table with values `0..` taken from small integer labels.
    pub fn label_table(&self, per_point: &[u16]) -> Result<InvariantFunction> {
        let modulus = per_point.iter().copied().max().unwrap_or(0) as u64 + 1;
        let values: Vec<Value> = per_point.iter().map(|&x| Value::Residue(x as u64)).collect();
        self.table(ValueSet::Residue(modulus.max(2)), &values)
    }

    /// Reads a function on this space back to per-point palette labels.
    pub fn labels_of(&self, f: &InvariantFunction) -> Result<Vec<u16>> {
        if f.lattice() != &self.lattice() {
            return Err(Error::DomainMismatch(format!("function on {:?}, space over F_{}^{}", f.lattice(), self.q, self.rank)));
        }
        f.require_exact()?;
        Ok(self.points.iter().map(|p| f.eval_index(p)).collect())
    }
}

/// Whether a labelling of the `q + 1` points of `P^1(F_q)` (in class
/// representative order) is AF, decided by the rank-2 classifier.
pub fn line_pattern_is_af(q: u64, pattern: &[u16]) -> Result<bool> {
    let space = ProjectiveSpace::new(q, 2)?;
    let f = space.label_table(pattern)?;
    Ok(matches!(classify_rank2(&f)?, Rank2Outcome::Class { .. }))
}

/// AF verdicts for all two-valued labellings of `P^1(F_q)`, indexed by the
/// bitmask of points labelled 1.
pub fn binary_line_table(q: u64) -> Arc<Vec<bool>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<bool>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&q) {
        return t.clone();
    }
    let n = q as usize + 1;
    let table: Vec<bool> = (0..1usize << n)
        .map(|mask| {
            let pattern: Vec<u16> = (0..n).map(|i| ((mask >> i) & 1) as u16).collect();
            line_pattern_is_af(q, &pattern).expect("valid line pattern")
        })
        .collect();
    let table = Arc::new(table);
    cache.lock().unwrap().insert(q, table.clone());
    table
}

/// Bitmask of a two-valued function along a line.
pub(crate) fn line_mask(line: &[usize], bits: &[u8]) -> usize {
    line.iter().enumerate().fold(0, |m, (i, &p)| m | ((bits[p] as usize & 1) << i))
}
