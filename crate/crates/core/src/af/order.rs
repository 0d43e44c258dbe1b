//! The order on nonzero elements induced by rank-2 restrictions.
//!
//! For `f(a) ≠ f(b)` the restriction to `<a, b>` decides: `a` is more generic
//! iff `f(a + b) = f(a)`. Equal-valued elements are compared through a
//! separator of the other value.

use std::sync::Arc;

use serde::Serialize;

use crate::classes::ClassIndex;
use crate::error::{Error, Result};
use crate::function::InvariantFunction;
use crate::lattice::{primitive_part, Lattice, ScalarDomain, Subgroup, Vector};

use super::peel::{peel_function, stuck_witness};
use super::{ensure_invariant, Filtration, Layer, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Separation {
    pub greater: Vector,
    pub lesser: Vector,
    pub separator: Vector,
}

/// Points grouped into `=_f` classes, most generic class first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderRelation {
    pub classes: Vec<Vec<Vector>>,
    pub separators: Vec<Separation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum OrderOutcome {
    Order { order: OrderRelation },
    Contradiction { witness: Witness },
}

fn order_points(f: &InvariantFunction) -> Result<Vec<Vector>> {
    let lattice = f.lattice();
    match lattice.domain {
        ScalarDomain::PrimeField(q) => Ok(ClassIndex::get(lattice.rank, q, 1).representatives().to_vec()),
        ScalarDomain::Integer => {
            let radius = f.window().bound / 2;
            if radius < 1 {
                return Err(Error::WindowTooShallow("order construction needs a box of radius 2".into()));
            }
            let mut pts: Vec<Vector> = crate::function::window_vectors(lattice, &crate::function::Window::new(radius, 1))
                .into_iter()
                .filter(|v| primitive_part(v).as_ref() == Some(v) && v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0))
                .collect();
            pts.sort_by_key(|v| (v.iter().map(|c| c.abs()).sum::<i64>(), v.clone()));
            Ok(pts)
        }
    }
}

fn rank2_failure(f: &InvariantFunction, a: &Vector, b: &Vector, detail: &str) -> Error {
    let lattice = f.lattice();
    let sub = Subgroup::generated(lattice, &[a.clone(), b.clone()]);
    let shared = Arc::new(f.clone());
    match shared.restrict(&sub) {
        Ok(restricted) => match peel_function(&restricted) {
            Err(stuck) => Error::Rank2Failure(Box::new(stuck_witness(&restricted, &stuck, 2000).lift(&sub.basis, lattice))),
            Ok(_) => Error::UnhandledConfiguration(format!("{detail} for {a:?}, {b:?}")),
        },
        Err(e) => e,
    }
}

pub fn build_order(f: &InvariantFunction) -> Result<OrderOutcome> {
    ensure_invariant(f)?;
    let lattice: &Lattice = f.lattice();
    let pts = order_points(f)?;
    let n = pts.len();
    let vals: Vec<u16> = pts.iter().map(|p| f.eval_index(p)).collect();
    let add = |a: &Vector, b: &Vector| -> Vector { lattice.normalize(&a.iter().zip(b).map(|(x, y)| x + y).collect::<Vector>()) };
    let sub = |a: &Vector, b: &Vector| -> Vector { lattice.normalize(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vector>()) };

    // gt[i][j]: i >̃ j, only for differing values.
    let mut gt = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if vals[i] == vals[j] {
                continue;
            }
            let s = f.eval_index(&add(&pts[i], &pts[j]));
            let d = f.eval_index(&sub(&pts[i], &pts[j]));
            if s != d || (s != vals[i] && s != vals[j]) {
                return Err(rank2_failure(f, &pts[i], &pts[j], "inconsistent rank-2 comparison"));
            }
            if s == vals[i] {
                gt[i][j] = true;
            } else {
                gt[j][i] = true;
            }
        }
    }

    // Separators for equal values, smallest-norm first (points are sorted).
    let mut rel = gt.clone();
    let mut separators = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if vals[i] != vals[j] {
                continue;
            }
            let up = (0..n).find(|&c| gt[i][c] && gt[c][j]);
            let down = (0..n).find(|&c| gt[j][c] && gt[c][i]);
            match (up, down) {
                (Some(c), Some(c2)) => {
                    return Ok(OrderOutcome::Contradiction {
                        witness: Witness::OrderCycle { cycle: [pts[i].clone(), pts[c].clone(), pts[j].clone(), pts[c2].clone()] },
                    });
                }
                (Some(c), None) => {
                    rel[i][j] = true;
                    separators.push(Separation { greater: pts[i].clone(), lesser: pts[j].clone(), separator: pts[c].clone() });
                }
                (None, Some(c)) => {
                    rel[j][i] = true;
                    separators.push(Separation { greater: pts[j].clone(), lesser: pts[i].clone(), separator: pts[c].clone() });
                }
                (None, None) => {}
            }
        }
    }

    // Must be a strict weak order: transitive, with transitive incomparability.
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            for c in 0..n {
                if c == a || c == b {
                    continue;
                }
                if rel[a][b] && rel[b][c] && !rel[a][c] {
                    return Err(Error::UnhandledConfiguration(format!(
                        "{:?} > {:?} > {:?} without {:?} > {:?}",
                        pts[a], pts[b], pts[c], pts[a], pts[c]
                    )));
                }
                let eq = |x: usize, y: usize| !rel[x][y] && !rel[y][x];
                if eq(a, b) && eq(b, c) && !eq(a, c) {
                    return Err(Error::UnhandledConfiguration(format!(
                        "{:?} = {:?} = {:?} but {:?} and {:?} are comparable",
                        pts[a], pts[b], pts[c], pts[a], pts[c]
                    )));
                }
            }
        }
    }

    let above: Vec<usize> = (0..n).map(|a| (0..n).filter(|&b| rel[b][a]).count()).collect();
    let mut keys: Vec<usize> = above.clone();
    keys.sort_unstable();
    keys.dedup();
    let classes = keys.iter().map(|k| (0..n).filter(|&a| above[a] == *k).map(|a| pts[a].clone()).collect()).collect();
    Ok(OrderOutcome::Order { order: OrderRelation { classes, separators } })
}

impl OrderRelation {
    /// Filtration whose `i`-th group is generated by the classes from `i` on.
    pub fn filtration(&self, f: &InvariantFunction) -> Filtration {
        let lattice = f.lattice();
        let layers = (0..self.classes.len())
            .map(|i| {
                let gens: Vec<Vector> = self.classes[i..].iter().flatten().cloned().collect();
                let g = Subgroup::generated(lattice, &gens);
                Layer { generators: g.basis, value: f.value_of(f.eval_index(&self.classes[i][0])).clone() }
            })
            .collect();
        Filtration { layers }
    }
}
