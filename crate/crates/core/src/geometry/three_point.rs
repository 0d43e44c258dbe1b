//! Pairs of `Z/2` functions on a projective plane whose image avoids
//! `(1, 1)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

use super::{binary_line_table, line_mask, ProjectiveSpace};

/// Point labels: 0 for `(0,0)`, 1 for `(1,0)`, 2 for `(0,1)`.
pub(crate) fn label(f1: u8, f2: u8) -> Option<u8> {
    match (f1, f2) {
        (0, 0) => Some(0),
        (1, 0) => Some(1),
        (0, 1) => Some(2),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct ThreePointInstance {
    space: Arc<ProjectiveSpace>,
    f1: Vec<u8>,
    f2: Vec<u8>,
}

/// Which of `f1`, `f2`, `f3 = f1 + f2` are AF on every line, as a list of
/// indices from `{1, 2, 3}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WhichAF {
    pub functions: Vec<u8>,
}

impl ThreePointInstance {
    pub fn new(space: Arc<ProjectiveSpace>, f1: Vec<u8>, f2: Vec<u8>) -> Result<ThreePointInstance> {
        let n = space.points().len();
        if space.rank() != 3 || f1.len() != n || f2.len() != n {
            return Err(Error::DomainMismatch("two per-point tables on a projective plane are required".into()));
        }
        let mut labels = Vec::with_capacity(n);
        for (i, (&a, &b)) in f1.iter().zip(&f2).enumerate() {
            let l = label(a, b).ok_or_else(|| Error::HypothesisFailure(format!("point {:?} maps to ({a}, {b})", space.points()[i])))?;
            labels.push(l);
        }
        if let Some(line) = space.lines().iter().find(|line| line_labels(line, &labels) == 0b111) {
            let pts: Vec<_> = line.iter().map(|&p| &space.points()[p]).collect();
            return Err(Error::HypothesisFailure(format!("line through {pts:?} meets all three image points")));
        }
        Ok(ThreePointInstance { space, f1, f2 })
    }

    /// Builds an instance from per-point labels in `{0, 1, 2}`.
    pub fn from_labels(space: Arc<ProjectiveSpace>, labels: &[u8]) -> Result<ThreePointInstance> {
        let f1 = labels.iter().map(|&l| (l == 1) as u8).collect();
        let f2 = labels.iter().map(|&l| (l == 2) as u8).collect();
        ThreePointInstance::new(space, f1, f2)
    }

    pub fn space(&self) -> &ProjectiveSpace {
        &self.space
    }

    pub fn f3(&self) -> Vec<u8> {
        self.f1.iter().zip(&self.f2).map(|(a, b)| a ^ b).collect()
    }

    fn labels(&self) -> Vec<u8> {
        self.f1.iter().zip(&self.f2).map(|(&a, &b)| label(a, b).unwrap()).collect()
    }

    /// Preimages of `(0,0)`, `(1,0)`, `(0,1)`: the point classes
    /// `P12`, `P13`, `P23`.
    pub fn point_classes(&self) -> [Vec<usize>; 3] {
        let mut out: [Vec<usize>; 3] = Default::default();
        for (i, l) in self.labels().into_iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    /// Line classes `T1`, `T2`, `T3`: lines whose image avoids `(0,1)`,
    /// `(1,0)` and `(0,0)` respectively. A line with a one-point image
    /// belongs to two classes.
    pub fn line_classes(&self) -> [Vec<usize>; 3] {
        let labels = self.labels();
        let mut out: [Vec<usize>; 3] = Default::default();
        for (l, line) in self.space.lines().iter().enumerate() {
            let seen = line_labels(line, &labels);
            for (t, missing) in [2u8, 1, 0].into_iter().enumerate() {
                if seen & (1 << missing) == 0 {
                    out[t].push(l);
                }
            }
        }
        out
    }
}

pub(crate) fn line_labels(line: &[usize], labels: &[u8]) -> u8 {
    line.iter().fold(0, |m, &p| m | (1 << labels[p]))
}

/// Bitmask over `{f1, f2, f3}` of the functions AF on every line.
pub(crate) fn af_mask(space: &ProjectiveSpace, table: &[bool], fs: [&[u8]; 3]) -> u8 {
    let mut mask = 0;
    for (i, f) in fs.iter().enumerate() {
        if space.lines().iter().all(|line| table[line_mask(line, f)]) {
            mask |= 1 << i;
        }
    }
    mask
}

pub fn three_point_analysis(inst: &ThreePointInstance) -> Result<WhichAF> {
    let table = binary_line_table(inst.space.q());
    let f3 = inst.f3();
    let mask = af_mask(&inst.space, &table, [&inst.f1, &inst.f2, &f3]);
    Ok(WhichAF { functions: (0..3).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect() })
}
