//! Reduction of the value set to `Z/2` and `Z/4`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::function::{InvariantFunction, Value, ValueSet};

use super::{check_af, AFVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ReductionTarget {
    Z2,
    Z4,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Reduction {
    AllReductionsAF { maps_checked: usize },
    Counterexample { target: ReductionTarget, map: Vec<(Value, Value)>, verdict: AFVerdict },
}

/// Restricted growth strings of length `len` using exactly `blocks` blocks.
fn partitions(len: usize, blocks: usize) -> Vec<Vec<usize>> {
    fn rec(acc: &mut Vec<usize>, len: usize, blocks: usize, used: usize, out: &mut Vec<Vec<usize>>) {
        if acc.len() == len {
            if used == blocks {
                out.push(acc.clone());
            }
            return;
        }
        if blocks - used > len - acc.len() {
            return;
        }
        for b in 0..=used.min(blocks - 1) {
            acc.push(b);
            rec(acc, len, blocks, used.max(b + 1), out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if len > 0 && blocks > 0 {
        rec(&mut Vec::with_capacity(len), len, blocks, 0, &mut out);
    }
    out
}

/// Checks `h ∘ f` for every surjection `h` onto two blocks, and onto three or
/// four blocks when at most eight values are attained. Maps are taken up to
/// relabeling the target, which does not affect the AF property.
pub fn reduce_value_set(f: &InvariantFunction) -> Result<Reduction> {
    let values = f.palette().to_vec();
    let shared = Arc::new(f.clone());
    let mut plans: Vec<(ReductionTarget, Vec<usize>)> = partitions(values.len(), 2).into_iter().map(|p| (ReductionTarget::Z2, p)).collect();
    if values.len() <= 8 {
        for blocks in 3..=4 {
            plans.extend(partitions(values.len(), blocks).into_iter().map(|p| (ReductionTarget::Z4, p)));
        }
    }
    let mut checked = 0;
    for (target, blocks) in plans {
        let modulus = match target {
            ReductionTarget::Z2 => 2,
            ReductionTarget::Z4 => 4,
        };
        let image = |v: &Value| values.iter().position(|x| x == v).map(|i| Value::Residue(blocks[i] as u64));
        let reduced = shared.postcompose(ValueSet::Residue(modulus), image)?;
        checked += 1;
        let verdict = check_af(&reduced)?;
        if !verdict.is_certified() {
            let map = values.iter().zip(&blocks).map(|(v, &b)| (v.clone(), Value::Residue(b as u64))).collect();
            return Ok(Reduction::Counterexample { target, map, verdict });
        }
    }
    Ok(Reduction::AllReductionsAF { maps_checked: checked })
}
