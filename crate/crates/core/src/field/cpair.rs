//! c-pairs of logarithmic functions and AF elements in their spans.

use rayon::prelude::*;
use serde::Serialize;

use crate::af::{check_af, AFVerdict};
use crate::error::{Error, Result};
use crate::lattice::gcd;
use crate::padic::Padic;

use super::element::{pool, Element, FieldModel};
use super::log::{eval_log, restrict_to_subspace, LogFunction};

/// Bounds shared by the span searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpanOptions {
    /// Pool degree for the rank-2 module sweep of the c-pair check.
    pub cpair_degree: usize,
    /// Pool degree of the subspaces on which AF-ness is certified.
    pub af_degree: usize,
    /// Largest `|λ_i|` tried by the span search.
    pub coefficient_bound: i64,
    /// Largest number of modules a c-pair sweep may visit.
    pub budget: u64,
}

impl Default for SpanOptions {
    fn default() -> Self {
        SpanOptions { cpair_degree: 2, af_degree: 1, coefficient_bound: 2, budget: 1 << 22 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum CPairOutcome {
    Pass {
        modules_checked: u64,
        degree_bound: usize,
        precision: u32,
    },
    /// Three points of the module `<a, b>` whose `(f1, f2, 1)` rows are
    /// independent.
    Fail {
        module: [Element; 2],
        points: [Element; 3],
        values: [[Padic; 2]; 3],
        precision: u32,
    },
}

impl CPairOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CPairOutcome::Pass { .. })
    }
}

fn same_setting(f1: &LogFunction, f2: &LogFunction) -> Result<()> {
    if f1.model != f2.model || f1.p != f2.p || f1.precision != f2.precision {
        return Err(Error::DomainMismatch("both functions must share model, p and precision".into()));
    }
    Ok(())
}

/// `det [[a1, b1, 1], [a2, b2, 1], [a3, b3, 1]]`.
fn det3(v: &[[Padic; 2]; 3]) -> Padic {
    let [[a1, b1], [a2, b2], [a3, b3]] = v;
    a1.mul(&b2.sub(b3)).sub(&b1.mul(&a2.sub(a3))).add(&a2.mul(b3).sub(&a3.mul(b2)))
}

/// Points of `P(<a, b>)`: `a`, `b` and `a + c b`.
fn line_points(a: &Element, b: &Element) -> Vec<Element> {
    let q = a.model().q();
    let mut pts = vec![a.clone(), b.clone()];
    pts.extend((1..q).map(|c| a.add(&b.scale(c))));
    pts
}

/// Checks `rk <f1, f2, 1> <= 2` on every module `<a, b>` with `a, b` from the
/// degree-`d` pool.
pub fn is_c_pair_field(f1: &LogFunction, f2: &LogFunction, d: usize, budget: u64) -> Result<CPairOutcome> {
    same_setting(f1, f2)?;
    let elems = pool(f1.model, d);
    let n = elems.len() as u64;
    let needed = n * n.saturating_sub(1) / 2;
    if needed > budget {
        return Err(Error::BudgetExceeded { needed: needed as u128, budget: budget as u128 });
    }
    let values: Vec<[Padic; 2]> = elems.iter().map(|e| Ok([eval_log(f1, e)?, eval_log(f2, e)?])).collect::<Result<_>>()?;
    let fail = (0..elems.len()).into_par_iter().find_map_first(|i| {
        for j in i + 1..elems.len() {
            let pts = line_points(&elems[i], &elems[j]);
            if pts.iter().any(Element::is_zero) {
                continue;
            }
            let mut vals = vec![values[i], values[j]];
            for e in &pts[2..] {
                match (eval_log(f1, e), eval_log(f2, e)) {
                    (Ok(a), Ok(b)) => vals.push([a, b]),
                    (Err(e), _) | (_, Err(e)) => return Some(Err(e)),
                }
            }
            for x in 0..pts.len() {
                for y in x + 1..pts.len() {
                    for z in y + 1..pts.len() {
                        let triple = [vals[x], vals[y], vals[z]];
                        if !det3(&triple).is_zero() {
                            return Some(Ok(CPairOutcome::Fail {
                                module: [elems[i].clone(), elems[j].clone()],
                                points: [pts[x].clone(), pts[y].clone(), pts[z].clone()],
                                values: triple,
                                precision: f1.precision,
                            }));
                        }
                    }
                }
            }
        }
        None
    });
    match fail {
        Some(r) => r,
        None => Ok(CPairOutcome::Pass { modules_checked: needed, degree_bound: d, precision: f1.precision }),
    }
}

/// Re-evaluates a failure: the three points lie in the module and their
/// rows have a nonzero determinant.
pub fn recheck_c_pair_failure(f1: &LogFunction, f2: &LogFunction, out: &CPairOutcome) -> Result<bool> {
    let CPairOutcome::Fail { module, points, .. } = out else {
        return Ok(false);
    };
    let pts = line_points(&module[0], &module[1]);
    let mut rows = [[f1.zero(), f1.zero()]; 3];
    for (row, x) in rows.iter_mut().zip(points) {
        if !pts.iter().any(|p| crate::field::proportional(p, x)) {
            return Ok(false);
        }
        *row = [eval_log(f1, x)?, eval_log(f2, x)?];
    }
    Ok(!det3(&rows).is_zero())
}

/// Independent bases of dimension 2 and 3 drawn from the degree-`d` pool.
pub fn af_family(model: FieldModel, d: usize) -> Vec<Vec<Element>> {
    let elems = pool(model, d);
    let n = elems.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let pair = vec![elems[i].clone(), elems[j].clone()];
            if super::log::subspace_points(&pair).is_ok() {
                out.push(pair);
            }
        }
    }
    let pairs = out.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let triple = vec![elems[i].clone(), elems[j].clone(), elems[k].clone()];
                if super::log::subspace_points(&triple).is_ok() {
                    out.push(triple);
                }
            }
        }
    }
    debug_assert!(pairs <= out.len());
    out
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum FamilyVerdict {
    /// A certificate for every subspace, in family order.
    Certified {
        certificates: Vec<AFVerdict>,
    },
    Refuted {
        basis: Vec<Element>,
        verdict: AFVerdict,
    },
}

impl FamilyVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, FamilyVerdict::Certified { .. })
    }
}

/// Runs `check_af` on the restriction of `f` to every family member.
pub fn af_on_family(f: &LogFunction, family: &[Vec<Element>]) -> Result<FamilyVerdict> {
    let verdicts: Vec<Result<AFVerdict>> = family.par_iter().map(|b| check_af(&restrict_to_subspace(f, b)?)).collect();
    let mut certificates = Vec::with_capacity(family.len());
    for (basis, v) in family.iter().zip(verdicts) {
        let v = v?;
        if !v.is_certified() {
            return Ok(FamilyVerdict::Refuted { basis: basis.clone(), verdict: v });
        }
        certificates.push(v);
    }
    Ok(FamilyVerdict::Certified { certificates })
}

/// Primitive `(λ1, λ2)` up to sign with `max |λ_i| <= bound`, small first.
pub fn span_candidates(bound: i64) -> Vec<[i64; 2]> {
    let mut out = vec![[1, 0], [0, 1]];
    for m in 1..=bound {
        let mut ring: Vec<[i64; 2]> =
            (1..=m).flat_map(|a| (-m..=m).map(move |b| [a, b])).filter(|&[a, b]| b != 0 && a.max(b.abs()) == m && gcd(a, b) == 1).collect();
        ring.sort_by_key(|&[a, b]| (a + b.abs(), a, -b));
        out.extend(ring);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum SpanSearch {
    AfElement {
        lambda: [i64; 2],
        subspaces_checked: usize,
        certificates: Vec<AFVerdict>,
    },
    NotFound {
        coefficient_bound: i64,
        /// Each candidate with the basis of a subspace refuting it.
        refutations: Vec<([i64; 2], Vec<Element>)>,
    },
}

/// Searches `<f1, f2>` for an element that is AF on the whole family.
pub fn find_af_in_span(f1: &LogFunction, f2: &LogFunction, opts: &SpanOptions) -> Result<SpanSearch> {
    let cp = is_c_pair_field(f1, f2, opts.cpair_degree, opts.budget)?;
    if let CPairOutcome::Fail { module, .. } = &cp {
        return Err(Error::NotACPair(format!("rank 3 on the module <{}, {}>", module[0], module[1])));
    }
    let family = af_family(f1.model, opts.af_degree);
    let mut refutations = Vec::new();
    for lambda in span_candidates(opts.coefficient_bound) {
        let g = LogFunction::linear(&[(lambda[0], f1), (lambda[1], f2)])?;
        match af_on_family(&g, &family)? {
            FamilyVerdict::Certified { certificates } => {
                return Ok(SpanSearch::AfElement { lambda, subspaces_checked: family.len(), certificates });
            }
            FamilyVerdict::Refuted { basis, .. } => refutations.push((lambda, basis)),
        }
    }
    Ok(SpanSearch::NotFound { coefficient_bound: opts.coefficient_bound, refutations })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CandidateOnV {
    pub lambda: [i64; 2],
    pub refuted: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BadSubspace {
    pub basis: [Element; 3],
    /// Span representatives `(1, μ)` and `(0, 1)` with their verdicts on `V`.
    pub candidates: Vec<CandidateOnV>,
    /// Every nonzero representative is refuted on `V`.
    pub verified: bool,
}

fn first_refuting_line(f: &LogFunction, lines: &[Vec<Element>]) -> Result<Option<Vec<Element>>> {
    let hit = lines
        .par_iter()
        .map(|b| restrict_to_subspace(f, b).and_then(|r| check_af(&r)).map(|v| (!v.is_certified()).then(|| b.clone())))
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    hit.transpose().map(Option::flatten)
}

/// Vanishes on the whole pool, so it is the zero element of the span as far
/// as the models can tell.
fn vanishes(f: &LogFunction, elems: &[Element]) -> Result<bool> {
    for e in elems {
        if !eval_log(f, e)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn judge_v(f1: &LogFunction, f2: &LogFunction, basis: &[Element; 3], elems: &[Element]) -> Result<BadSubspace> {
    let reps: Vec<[i64; 2]> = (0..f1.p as i64).map(|m| [1, m]).chain([[0, 1]]).collect();
    let mut candidates = Vec::new();
    for lambda in reps {
        let g = LogFunction::linear(&[(lambda[0], f1), (lambda[1], f2)])?;
        if vanishes(&g, elems)? {
            continue;
        }
        let v = check_af(&restrict_to_subspace(&g, basis)?)?;
        candidates.push(CandidateOnV { lambda, refuted: !v.is_certified(), verdict: v.label().to_string() });
    }
    let verified = candidates.iter().all(|c| c.refuted);
    Ok(BadSubspace { basis: basis.clone(), candidates, verified })
}

/// Assembles `V = <x1, x2, y2 y1^{-1} x1>` from a line `<x1, x2>` refuting
/// `f1` and a line `<y1, y2>` refuting `f2 - μ f1`, then sweeps the span
/// representatives on `V`. Prefers a `V` on which every nonzero
/// representative is refuted; `None` if `f1` is AF on every pool line.
pub fn find_bad_subspace(f1: &LogFunction, f2: &LogFunction, opts: &SpanOptions) -> Result<Option<BadSubspace>> {
    same_setting(f1, f2)?;
    let elems = pool(f1.model, opts.cpair_degree);
    let lines: Vec<Vec<Element>> =
        af_family(f1.model, opts.cpair_degree.min(opts.af_degree.max(1))).into_iter().filter(|b| b.len() == 2).collect();
    let Some(v1) = first_refuting_line(f1, &lines)? else {
        return Ok(None);
    };
    let mut fallback = None;
    for mu in 0..f1.p as i64 {
        let g = LogFunction::linear(&[(1, f2), (-mu, f1)])?;
        let Some(w) = first_refuting_line(&g, &lines)? else {
            continue;
        };
        let third = w[1].div(&w[0])?.mul(&v1[0]);
        let basis = [v1[0].clone(), v1[1].clone(), third];
        if super::log::subspace_points(&basis).is_err() {
            continue;
        }
        let judged = judge_v(f1, f2, &basis, &elems)?;
        if judged.verified {
            return Ok(Some(judged));
        }
        fallback.get_or_insert(judged);
    }
    if fallback.is_none() {
        // Degenerate span: extend the refuting line of f1 by any pool element.
        for z in &elems {
            let basis = [v1[0].clone(), v1[1].clone(), z.clone()];
            if super::log::subspace_points(&basis).is_ok() {
                let judged = judge_v(f1, f2, &basis, &elems)?;
                if judged.verified {
                    return Ok(Some(judged));
                }
                fallback.get_or_insert(judged);
                break;
            }
        }
    }
    Ok(fallback)
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Corank {
    /// AF elements as coefficient vectors over the input list.
    pub af_elements: Vec<Vec<i64>>,
    /// Index of the input generating the quotient, if it is nontrivial.
    pub quotient: Option<usize>,
    pub subspaces_checked: usize,
}

/// Splits `<fs>` into AF elements plus at most one residual generator.
pub fn af_corank(fs: &[LogFunction], opts: &SpanOptions) -> Result<Corank> {
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            if !is_c_pair_field(&fs[i], &fs[j], opts.cpair_degree, opts.budget)?.passed() {
                return Err(Error::NotACPair(format!("inputs {i} and {j}")));
            }
        }
    }
    let Some(first) = fs.first() else {
        return Ok(Corank { af_elements: Vec::new(), quotient: None, subspaces_checked: 0 });
    };
    let family = af_family(first.model, opts.af_degree);
    let unit = |i: usize| (0..fs.len()).map(|k| (k == i) as i64).collect::<Vec<i64>>();
    let mut af_elements = Vec::new();
    let mut rest = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        if af_on_family(f, &family)?.is_certified() {
            af_elements.push(unit(i));
        } else {
            rest.push(i);
        }
    }
    let quotient = rest.first().copied();
    if let Some(g) = quotient {
        for &j in &rest[1..] {
            match find_af_in_span(&fs[g], &fs[j], opts)? {
                SpanSearch::AfElement { lambda, .. } => {
                    let mut c = vec![0; fs.len()];
                    c[g] = lambda[0];
                    c[j] = lambda[1];
                    af_elements.push(c);
                }
                SpanSearch::NotFound { coefficient_bound, .. } => {
                    return Err(Error::HypothesisFailure(format!(
                        "no AF element in the span of inputs {g} and {j} with coefficients up to {coefficient_bound}"
                    )));
                }
            }
        }
    }
    Ok(Corank { af_elements, quotient, subspaces_checked: family.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::valuation::{Place, Valuation};

    const UNI: FieldModel = FieldModel::Univariate { q: 3 };

    fn weights(ws: &[(&str, i64)]) -> LogFunction {
        LogFunction::place_weights(UNI, 3, 8, ws.iter().map(|&(s, w)| (Place::parse(3, s).unwrap(), w)).collect()).unwrap()
    }

    #[test]
    fn candidates_are_primitive_and_distinct() {
        let c = span_candidates(2);
        assert_eq!(&c[..4], &[[1, 0], [0, 1], [1, 1], [1, -1]]);
        let set: std::collections::BTreeSet<_> = c.iter().collect();
        assert_eq!(set.len(), c.len());
        assert!(c.iter().all(|&[a, b]| gcd(a, b) == 1));
    }

    #[test]
    fn proportional_pair_is_c_pair() {
        let f = weights(&[("t", 1), ("t+1", 2)]);
        let g = LogFunction::linear(&[(3, &f)]).unwrap();
        assert!(is_c_pair_field(&f, &g, 2, 1 << 20).unwrap().passed());
    }

    #[test]
    fn two_places_fail_with_sound_witness() {
        let f1 = weights(&[("t", 1), ("t+1", 1)]);
        let f2 = weights(&[("t", 1), ("t+1", -1)]);
        let out = is_c_pair_field(&f1, &f2, 2, 1 << 20).unwrap();
        assert!(!out.passed());
        assert!(recheck_c_pair_failure(&f1, &f2, &out).unwrap());
        assert!(matches!(find_af_in_span(&f1, &f2, &SpanOptions::default()), Err(Error::NotACPair(_))));
    }

    #[test]
    fn inertia_multiple_found_at_first_candidate() {
        let f1 = LogFunction::character(UNI, 3, 8, Valuation::parse(UNI, "t+2").unwrap(), &[1]).unwrap();
        let f2 = LogFunction::linear(&[(2, &f1)]).unwrap();
        match find_af_in_span(&f1, &f2, &SpanOptions::default()).unwrap() {
            SpanSearch::AfElement { lambda, certificates, .. } => {
                assert_eq!(lambda, [1, 0]);
                assert!(certificates.iter().all(AFVerdict::is_certified));
            }
            other => panic!("{other:?}"),
        }
        assert!(find_bad_subspace(&f1, &f2, &SpanOptions::default()).unwrap().is_none());
    }

    #[test]
    fn bad_subspace_for_lone_non_af_function() {
        let f1 = weights(&[("t", 1), ("t+1", 1)]);
        let zero = LogFunction::linear(&[(0, &f1)]).unwrap();
        let bad = find_bad_subspace(&f1, &zero, &SpanOptions::default()).unwrap().unwrap();
        assert!(bad.verified);
        assert!(bad.candidates.iter().all(|c| c.lambda[0] == 1));
    }
}
