use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{prime_power, InvariantFunction, Value};
use crate::lattice::{Lattice, ScalarDomain, Subgroup, Vector};

use super::peel::{find_triple, peel_function, stuck_witness, window_elements};
use super::{ensure_invariant, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Rank2Class {
    Constant {
        value: Value,
    },
    /// Constant off the cyclic subgroup (or projective point) `direction`.
    OffSubgroup {
        direction: Vector,
    },
    /// p-power staircase below a subgroup `C` of index `p^k`. `phase` is the
    /// parity of the first step: `log_p [A : A_1] - 1 (mod 2)`.
    Typical {
        p: u64,
        k: u32,
        phase: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Rank2Outcome {
    Class { class: Rank2Class },
    NotAF { witness: Witness },
}

fn log_p(n: u128, p: u64) -> Option<u32> {
    let mut n = n;
    let mut e = 0;
    while n > 1 {
        if n % p as u128 != 0 {
            return None;
        }
        n /= p as u128;
        e += 1;
    }
    Some(e)
}

/// `{x : p x ∈ g}`, if that lies inside `Z^n`.
fn divide(g: &Subgroup, p: u64) -> Option<Subgroup> {
    let p = p as i64;
    if g.basis.iter().flatten().any(|x| x % p != 0) {
        return None;
    }
    let rows: Vec<Vector> = g.basis.iter().map(|r| r.iter().map(|x| x / p).collect()).collect();
    Some(Subgroup::generated(&g.lattice(), &rows))
}

fn typical(groups: &[Subgroup]) -> Result<Rank2Class> {
    let shallow = |m: &str| Error::WindowTooShallow(m.to_string());
    let index1 = groups[1].index().unwrap();
    let (p, e1) = prime_power(index1 as u64).ok_or_else(|| shallow("index of the first layer is not a prime power"))?;
    let mut periods = 0;
    for j in 1..groups.len().saturating_sub(2) {
        if groups[j + 2].rank() < 2 {
            break;
        }
        if groups[j + 2] != groups[j].scaled(p as i64) {
            break;
        }
        periods += 1;
    }
    if periods < 2 {
        return Err(shallow(&format!("only {periods} staircase period(s) confirmed within the window")));
    }
    let whole = groups[0].index().unwrap();
    let k = match divide(&groups[2], p) {
        Some(c) if groups[1].is_subgroup_of(&c) && groups[1].index().unwrap() == c.index().unwrap() * p as u128 => {
            log_p(c.index().unwrap() / whole, p).ok_or_else(|| shallow("irregular subgroup index"))?
        }
        _ => e1,
    };
    Ok(Rank2Class::Typical { p, k, phase: (e1 + 1) % 2 })
}

pub fn classify_rank2(f: &InvariantFunction) -> Result<Rank2Outcome> {
    if f.rank() != 2 {
        return Err(Error::DomainMismatch(format!("rank-2 classification on rank {}", f.rank())));
    }
    ensure_invariant(f)?;
    if f.lattice().domain == ScalarDomain::Integer && f.window().bound < 1 {
        return Err(Error::WindowTooShallow("box radius must be at least 1".into()));
    }
    let filtration = match peel_function(f) {
        Ok(filtration) => filtration,
        Err(stuck) => return Ok(Rank2Outcome::NotAF { witness: stuck_witness(f, &stuck, usize::MAX) }),
    };
    let values: std::collections::BTreeSet<&Value> = filtration.layers.iter().map(|l| &l.value).collect();
    if values.len() > 2 {
        return match find_triple(f, &window_elements(f)) {
            Some(witness) => Ok(Rank2Outcome::NotAF { witness }),
            None => Err(Error::WindowTooShallow("three layer values without a visible violation".into())),
        };
    }
    let lattice: &Lattice = f.lattice();
    let groups = filtration.subgroups(lattice);
    let class = if groups.len() == 1 {
        Rank2Class::Constant { value: filtration.layers[0].value.clone() }
    } else if groups[1].rank() == 1 {
        Rank2Class::OffSubgroup { direction: groups[1].basis[0].clone() }
    } else {
        typical(&groups)?
    };
    Ok(Rank2Outcome::Class { class })
}
