//! Exhaustive and sampled verification harnesses.
//!
//! Instance spaces are split into contiguous index ranges processed in
//! parallel; counts merge by addition and violations are sorted by instance
//! index, so reports do not depend on the number of workers.

use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::af::{check_af, check_functional_equation, fano_pattern, AFVerdict, ExceptionalKind, FeOutcome};
use crate::classes::ClassIndex;
use crate::error::{Error, ParseError, Result};
use crate::function::{InvariantFunction, Value, ValueSet, Window};
use crate::lattice::{determinant, Subgroup, Vector};

use super::three_point::{af_mask, label, line_labels};
use super::{binary_line_table, line_mask, ProjectiveSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Proposition {
    #[serde(rename = "z2-p")]
    Z2P,
    #[serde(rename = "red2-p")]
    Red2P,
    #[serde(rename = "2-coeff")]
    TwoCoeff,
    #[serde(rename = "fano")]
    Fano,
    #[serde(rename = "agf")]
    Agf,
    #[serde(rename = "restr3-sample")]
    Restr3Sample,
}

impl Proposition {
    pub const ALL: [Proposition; 6] =
        [Proposition::Z2P, Proposition::Red2P, Proposition::TwoCoeff, Proposition::Fano, Proposition::Agf, Proposition::Restr3Sample];

    pub fn name(&self) -> &'static str {
        match self {
            Proposition::Z2P => "z2-p",
            Proposition::Red2P => "red2-p",
            Proposition::TwoCoeff => "2-coeff",
            Proposition::Fano => "fano",
            Proposition::Agf => "agf",
            Proposition::Restr3Sample => "restr3-sample",
        }
    }
}

impl FromStr for Proposition {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Proposition, ParseError> {
        Proposition::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| ParseError::invalid(format!("unknown proposition {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyOptions {
    /// Largest instance count an exhaustive run may enumerate.
    pub budget: u128,
    /// Instance count for sampled suites.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { budget: 1 << 24, samples: 1000, seed: 0x00f1_a9fa }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub proposition: String,
    pub q: u64,
    pub instances: u64,
    pub hypothesis_satisfied: u64,
    pub conclusion_holds: u64,
    pub violations: Vec<String>,
    pub wall_time_ms: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Default)]
struct Tally {
    instances: u64,
    hypothesis: u64,
    conclusion: u64,
    violations: Vec<(u64, String)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.instances += other.instances;
        self.hypothesis += other.hypothesis;
        self.conclusion += other.conclusion;
        self.violations.extend(other.violations);
        self
    }

    fn record(&mut self, index: u64, hypothesis: bool, conclusion: Result<bool, String>) {
        self.instances += 1;
        if !hypothesis {
            return;
        }
        self.hypothesis += 1;
        match conclusion {
            Ok(true) => self.conclusion += 1,
            Ok(false) => self.violations.push((index, format!("instance {index}: conclusion fails"))),
            Err(e) => self.violations.push((index, format!("instance {index}: {e}"))),
        }
    }
}

fn check_budget(needed: u128, opts: &VerifyOptions) -> Result<()> {
    if needed > opts.budget {
        return Err(Error::BudgetExceeded { needed, budget: opts.budget });
    }
    Ok(())
}

fn sweep(total: u64, body: impl Fn(u64, &mut Tally) + Sync) -> Tally {
    const CHUNK: u64 = 4096;
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(total) {
                body(i, &mut t);
            }
            t
        })
        .reduce(Tally::default, Tally::merge)
}

fn bits_of(mask: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((mask >> i) & 1) as u8).collect()
}

fn certified(space: &ProjectiveSpace, labels: &[u16]) -> Result<bool, String> {
    let f = space.label_table(labels).map_err(|e| e.to_string())?;
    check_af(&f).map(|v| v.is_certified()).map_err(|e| e.to_string())
}

fn z2p(q: u64, opts: &VerifyOptions) -> Result<Tally> {
    let space = ProjectiveSpace::new(q, 2)?;
    let n = space.points().len();
    check_budget(1u128 << n, opts)?;
    Ok(sweep(1 << n, |mask, t| {
        let bits = bits_of(mask, n);
        let labels: Vec<u16> = bits.iter().map(|&b| b as u16).collect();
        let af = match certified(&space, &labels) {
            Ok(af) => af,
            Err(e) => {
                t.record(mask, true, Err(e));
                return;
            }
        };
        let ones = bits.iter().filter(|&&b| b == 1).count();
        t.record(mask, af, Ok(ones.min(n - ones) <= 1));
    }))
}

fn red2p(q: u64, opts: &VerifyOptions) -> Result<Tally> {
    if q == 2 {
        return Err(Error::DomainMismatch("the reduction to lines needs q > 2".into()));
    }
    let space = ProjectiveSpace::new(q, 3)?;
    let n = space.points().len();
    check_budget(1u128 << n.min(127), opts)?;
    let table = binary_line_table(q);
    Ok(sweep(1 << n, |mask, t| {
        let bits = bits_of(mask, n);
        let hypothesis = space.lines().iter().all(|l| table[line_mask(l, &bits)]);
        let conclusion = if hypothesis { certified(&space, &bits.iter().map(|&b| b as u16).collect::<Vec<_>>()) } else { Ok(true) };
        t.record(mask, hypothesis, conclusion);
    }))
}

fn two_coeff(q: u64, opts: &VerifyOptions) -> Result<Tally> {
    let space = ProjectiveSpace::new(q, 3)?;
    let n = space.points().len();
    let total = 3u128.checked_pow(n as u32).unwrap_or(u128::MAX);
    check_budget(total, opts)?;
    let table = binary_line_table(q);
    Ok(sweep(total as u64, |index, t| {
        let mut labels = vec![0u8; n];
        let mut rest = index;
        for l in labels.iter_mut() {
            *l = (rest % 3) as u8;
            rest /= 3;
        }
        let hypothesis = space.lines().iter().all(|l| line_labels(l, &labels) != 0b111);
        if !hypothesis {
            t.record(index, false, Ok(true));
            return;
        }
        let f1: Vec<u8> = labels.iter().map(|&l| (l == 1) as u8).collect();
        let f2: Vec<u8> = labels.iter().map(|&l| (l == 2) as u8).collect();
        let f3: Vec<u8> = f1.iter().zip(&f2).map(|(a, b)| a ^ b).collect();
        debug_assert!(f1.iter().zip(&f2).all(|(&a, &b)| label(a, b).is_some()));
        t.record(index, true, Ok(af_mask(&space, &table, [&f1, &f2, &f3]) != 0));
    }))
}

fn fano(q: u64, opts: &VerifyOptions) -> Result<Tally> {
    if q != 2 {
        return Err(Error::DomainMismatch("the Fano configuration lives over F_2".into()));
    }
    let space = ProjectiveSpace::new(2, 3)?;
    let n = space.points().len();
    check_budget(1 << n, opts)?;
    let table = binary_line_table(2);
    let pattern: u64 = space.points().iter().enumerate().map(|(i, p)| (fano_pattern(p) as u64) << i).sum();
    Ok(sweep(1 << n, |mask, t| {
        let bits = bits_of(mask, n);
        let hypothesis = space.lines().iter().all(|l| table[line_mask(l, &bits)]);
        let labels: Vec<u16> = bits.iter().map(|&b| b as u16).collect();
        let verdict = space.label_table(&labels).and_then(|f| check_af(&f));
        let conclusion = match verdict {
            // Line-AF functions are either AF or the documented exception.
            Ok(AFVerdict::Certified { .. }) => Ok(mask != pattern),
            Ok(AFVerdict::Exceptional { exceptional: ExceptionalKind::Fano, .. }) => Ok(true),
            Ok(_) => Ok(false),
            Err(e) => Err(e.to_string()),
        };
        if mask == pattern && !hypothesis {
            t.violations.push((mask, "the Fano pattern has a non-AF line".into()));
        }
        t.record(mask, hypothesis, conclusion);
    }))
}

/// Small bases `(a, b)` of `Z^2` with `f(a) = f(a+b) != f(b)`.
fn agf_basis(f: &InvariantFunction) -> Option<(Vector, Vector)> {
    let vs: Vec<Vector> = (-2..=2i64).flat_map(|x| (-2..=2i64).map(move |y| vec![x, y])).filter(|v| v != &[0, 0]).collect();
    for a in &vs {
        for b in &vs {
            if determinant(&[a.clone(), b.clone()]).abs() != 1 {
                continue;
            }
            let s = vec![a[0] + b[0], a[1] + b[1]];
            let (fa, fb, fs) = (f.eval_index(a), f.eval_index(b), f.eval_index(&s));
            if fa == fs && fa != fb {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

fn agf_instance(depth: u32, values: Vec<Value>) -> (bool, Result<bool, String>) {
    let (fe_bound, af_bound) = (1i64 << depth.min(2), 1i64 << (depth + 1));
    let f = match InvariantFunction::depth_k(2, 2, depth, ValueSet::Residue(2), values, Window::new(af_bound, depth)) {
        Ok(f) => f,
        Err(e) => return (true, Err(e.to_string())),
    };
    let Some((a, b)) = agf_basis(&f) else {
        return (false, Ok(true));
    };
    match check_functional_equation(&f.with_window(Window::new(fe_bound, depth)), &a, &b) {
        Ok(FeOutcome::Holds { .. }) => {}
        Ok(FeOutcome::Violation { .. }) => return (false, Ok(true)),
        Err(e) => return (true, Err(e.to_string())),
    }
    (true, check_af(&f).map(|v| v.is_certified()).map_err(|e| e.to_string()))
}

fn agf(opts: &VerifyOptions) -> Result<Tally> {
    let index = ClassIndex::get(2, 2, 2);
    let n = index.len();
    check_budget((1u128 << n) + opts.samples as u128, opts)?;
    let exhaustive = sweep(1 << n, |mask, t| {
        let values = bits_of(mask, n).into_iter().map(|b| Value::Residue(b as u64)).collect();
        let (h, c) = agf_instance(2, values);
        t.record(mask, h, c);
    });
    let deep = ClassIndex::get(2, 2, 3).len();
    let offset = 1u64 << n;
    let sampled = sweep(opts.samples as u64, |i, t| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ i);
        let values = (0..deep).map(|_| Value::Residue(rng.gen_range(0..2))).collect();
        let (h, c) = agf_instance(3, values);
        t.record(offset + i, h, c);
    });
    Ok(exhaustive.merge(sampled))
}

/// A random function on `F_q^4` that is AF by construction (values by
/// position in a random full flag), sometimes with one point changed.
fn flag_function(space: &ProjectiveSpace, rng: &mut ChaCha8Rng) -> Vec<u16> {
    let q = space.q() as i64;
    let rank = space.rank();
    let basis: Vec<Vector> = loop {
        let m: Vec<Vector> = (0..rank).map(|_| (0..rank).map(|_| rng.gen_range(0..q)).collect()).collect();
        if determinant(&m).rem_euclid(q as i128) != 0 {
            break m;
        }
    };
    let lattice = space.lattice();
    let layers: Vec<Subgroup> = (0..rank).map(|i| Subgroup::generated(&lattice, &basis[i..])).collect();
    let layer_values: Vec<u16> = (0..rank).map(|_| rng.gen_range(0..3)).collect();
    let mut labels: Vec<u16> = space
        .points()
        .iter()
        .map(|p| {
            let depth = layers.iter().rposition(|l| l.contains(p)).unwrap();
            layer_values[depth]
        })
        .collect();
    if rng.gen_bool(0.5) {
        let i = rng.gen_range(0..labels.len());
        labels[i] = (labels[i] + 1) % 3;
    }
    labels
}

fn restr3(q: u64, opts: &VerifyOptions) -> Result<Tally> {
    let space = ProjectiveSpace::new(q, 4)?;
    check_budget(opts.samples as u128, opts)?;
    let lattice = space.lattice();
    // Hyperplanes as kernels of the projective points of the dual space.
    let hyperplanes: Vec<Subgroup> = space
        .points()
        .iter()
        .map(|w| {
            let kernel: Vec<Vector> =
                space.points().iter().filter(|v| v.iter().zip(w).map(|(a, b)| a * b).sum::<i64>() % q as i64 == 0).cloned().collect();
            Subgroup::generated(&lattice, &kernel)
        })
        .collect();
    Ok(sweep(opts.samples as u64, |i, t| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (i << 8));
        let labels = flag_function(&space, &mut rng);
        let f = match space.label_table(&labels) {
            Ok(f) => Arc::new(f),
            Err(e) => return t.record(i, true, Err(e.to_string())),
        };
        let mut hypothesis = true;
        for h in &hyperplanes {
            match f.restrict(h).and_then(|r| check_af(&r)) {
                Ok(v) if v.is_certified() => {}
                Ok(_) => {
                    hypothesis = false;
                    break;
                }
                Err(e) => return t.record(i, true, Err(e.to_string())),
            }
        }
        let conclusion = if hypothesis { check_af(&f).map(|v| v.is_certified()).map_err(|e| e.to_string()) } else { Ok(true) };
        t.record(i, hypothesis, conclusion);
    }))
}

pub fn verify_proposition(prop: Proposition, q: u64, opts: &VerifyOptions) -> Result<Report> {
    let start = Instant::now();
    let tally = match prop {
        Proposition::Z2P => z2p(q, opts)?,
        Proposition::Red2P => red2p(q, opts)?,
        Proposition::TwoCoeff => two_coeff(q, opts)?,
        Proposition::Fano => fano(q, opts)?,
        Proposition::Agf => agf(opts)?,
        Proposition::Restr3Sample => restr3(q, opts)?,
    };
    let mut violations = tally.violations;
    violations.sort();
    Ok(Report {
        proposition: prop.name().to_string(),
        q,
        instances: tally.instances,
        hypothesis_satisfied: tally.hypothesis,
        conclusion_holds: tally.conclusion,
        violations: violations.into_iter().map(|(_, s)| s).collect(),
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}
