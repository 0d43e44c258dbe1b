//! Reducing a pair without AF span elements to three non-AF `Z/2` functions.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::af::check_af;
use crate::error::{Error, Result};
use crate::function::InvariantFunction;

use super::affine::{image_shape, phi_image, ImageShape, PhiMap, Point, Ring, Scalar};
use super::{binary_line_table, line_mask, ProjectiveSpace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ThreePointReduction {
    /// `f1' = c1·(f1, f2, 1)`, `f2' = c2·(f1, f2, 1)` and `h` (listed by the
    /// values sent to 1) such that `h∘f1'`, `h∘f2'` and their sum are each
    /// non-AF on the listed line.
    Reduction { coeffs1: [Scalar; 3], coeffs2: [Scalar; 3], h_support: Vec<Scalar>, refuting_lines: [usize; 3] },
    /// The premise failed: `λ1 f1 + λ2 f2` is AF.
    NoReduction { lambda: [Scalar; 2] },
}

fn span_candidates(ring: &Ring) -> Vec<[Scalar; 2]> {
    let range: Vec<i64> = match *ring {
        Ring::Residue { p } => (0..p as i64).collect(),
        _ => (-2..=2).collect(),
    };
    let mut out = Vec::new();
    for &a in &range {
        for &b in &range {
            let primitive = match *ring {
                Ring::Residue { .. } => (a, b) != (0, 0) && (a == 1 || (a == 0 && b == 1)),
                _ => crate::lattice::gcd(a, b) == 1 && (a > 0 || (a == 0 && b > 0)),
            };
            if primitive {
                out.push([ring.from_i64(a), ring.from_i64(b)]);
            }
        }
    }
    out
}

fn labels_of(values: &[Scalar]) -> Vec<u16> {
    let distinct: Vec<Scalar> = values.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    values.iter().map(|v| distinct.binary_search(v).unwrap() as u16).collect()
}

fn is_af(space: &ProjectiveSpace, values: &[Scalar]) -> Result<bool> {
    Ok(check_af(&space.label_table(&labels_of(values))?)?.is_certified())
}

fn eval(ring: &Ring, pm: &PhiMap, c: &[Scalar; 3]) -> Vec<Scalar> {
    pm.images.iter().map(|&(x, y)| ring.combine(*c, x, y)).collect()
}

/// `c ∘ (g1, g2, 1)` rewritten in terms of `(f1, f2, 1)`.
fn compose(ring: &Ring, c: [Scalar; 3], g1: &[Scalar; 3], g2: &[Scalar; 3]) -> [Scalar; 3] {
    let part = |i: usize| ring.add(ring.mul(c[0], g1[i]), ring.mul(c[1], g2[i]));
    [part(0), part(1), ring.add(part(2), c[2])]
}

fn refuting_line(space: &ProjectiveSpace, table: &[bool], bits: &[u8]) -> Option<usize> {
    space.lines().iter().position(|line| !table[line_mask(line, bits)])
}

fn search_h(space: &ProjectiveSpace, ring: &Ring, g1: &[Scalar], g2: &[Scalar]) -> Option<(Vec<Scalar>, [usize; 3])> {
    let table = binary_line_table(space.q());
    let zero = ring.from_i64(0);
    let support: Vec<Scalar> = g1.iter().chain(g2).copied().filter(|&v| v != zero).collect::<BTreeSet<_>>().into_iter().collect();
    if support.len() > 20 {
        return None;
    }
    for mask in 1u32..1 << support.len() {
        let h = |v: &Scalar| support.binary_search(v).map(|i| (mask >> i) as u8 & 1).unwrap_or(0);
        let b1: Vec<u8> = g1.iter().map(h).collect();
        let b2: Vec<u8> = g2.iter().map(h).collect();
        let b3: Vec<u8> = b1.iter().zip(&b2).map(|(x, y)| x ^ y).collect();
        if let (Some(l1), Some(l2), Some(l3)) =
            (refuting_line(space, &table, &b1), refuting_line(space, &table, &b2), refuting_line(space, &table, &b3))
        {
            let chosen = support.iter().enumerate().filter(|(i, _)| (mask >> i) & 1 == 1).map(|(_, &v)| v).collect();
            return Some((chosen, [l1, l2, l3]));
        }
    }
    None
}

/// Normalizes the image to "a point plus the x-axis", then searches for a
/// map to `Z/2` that leaves all three reductions non-AF; if the first
/// coordinates do not work, re-centres on each line whose image is slanted.
pub fn find_three_point_reduction(f1: &InvariantFunction, f2: &InvariantFunction, ring: Ring) -> Result<ThreePointReduction> {
    ring.check_supported()?;
    let pm = phi_image(f1, f2, ring)?;
    let space: Arc<ProjectiveSpace> = pm.space.clone();
    let ImageShape::PointAndLine { point: d, line } = image_shape(&pm, true)? else {
        return Err(Error::UnhandledConfiguration("image admits no point-plus-line cover".into()));
    };
    let (ff1, ff2): (Vec<Scalar>, Vec<Scalar>) = pm.images.iter().copied().unzip();
    for lambda in span_candidates(&ring) {
        let g: Vec<Scalar> = ff1.iter().zip(&ff2).map(|(&x, &y)| ring.add(ring.mul(lambda[0], x), ring.mul(lambda[1], y))).collect();
        if is_af(&space, &g)? {
            return Ok(ThreePointReduction::NoReduction { lambda });
        }
    }
    let on_line = |p: Point| ring.is_zero(ring.sub(ring.add(ring.mul(line.alpha, p.0), ring.mul(line.beta, p.1)), line.gamma));
    if pm.images.iter().all(|&p| on_line(p)) || on_line(d) {
        // A combination of f1, f2 is constant.
        return Ok(ThreePointReduction::NoReduction { lambda: [line.alpha, line.beta] });
    }
    let one = ring.from_i64(1);
    let zero = ring.from_i64(0);
    let unit = |s: Scalar| match s {
        Scalar::Padic(x) => x.is_unit(),
        _ => !ring.is_zero(s),
    };
    // f~2 vanishes on the line and not at d; f~1 vanishes at d and moves along the line.
    let t2 = [line.alpha, line.beta, ring.neg(line.gamma)];
    let t1 = if unit(line.beta) { [one, zero, ring.neg(d.0)] } else { [zero, one, ring.neg(d.1)] };

    let mut candidates: Vec<([Scalar; 3], [Scalar; 3])> = vec![(t1, t2)];
    let tpm = PhiMap::from_images(
        space.clone(),
        ring,
        pm.images.iter().map(|&(x, y)| (ring.combine(t1, x, y), ring.combine(t2, x, y))).collect(),
    );
    for l in space.lines() {
        let mut pts: Vec<Point> = l.iter().map(|&i| tpm.images[i]).collect();
        pts.sort();
        pts.dedup();
        if pts.len() < 2 || pts.iter().all(|p| ring.is_zero(p.0)) || pts.iter().all(|p| ring.is_zero(p.1)) {
            continue;
        }
        let lam = ring.line_through(pts[0], pts[pts.len() - 1]);
        let c1 = compose(&ring, [lam.alpha, lam.beta, ring.neg(lam.gamma)], &t1, &t2);
        let c2 = compose(&ring, [zero, ring.neg(one), zero], &t1, &t2);
        if !candidates.contains(&(c1, c2)) {
            candidates.push((c1, c2));
        }
    }
    for (c1, c2) in candidates {
        let g1 = eval(&ring, &pm, &c1);
        let g2 = eval(&ring, &pm, &c2);
        if let Some((h_support, refuting_lines)) = search_h(&space, &ring, &g1, &g2) {
            return Ok(ThreePointReduction::Reduction { coeffs1: c1, coeffs2: c2, h_support, refuting_lines });
        }
    }
    Err(Error::UnhandledConfiguration("no map to Z/2 leaves all three reductions non-AF".into()))
}

/// Recomputes the three `Z/2` reductions of a returned triple.
pub fn reduction_bits(pm: &PhiMap, c1: &[Scalar; 3], c2: &[Scalar; 3], h_support: &[Scalar]) -> [Vec<u8>; 3] {
    let h = |v: &Scalar| h_support.contains(v) as u8;
    let b1: Vec<u8> = eval(&pm.ring, pm, c1).iter().map(h).collect();
    let b2: Vec<u8> = eval(&pm.ring, pm, c2).iter().map(h).collect();
    let b3 = b1.iter().zip(&b2).map(|(x, y)| x ^ y).collect();
    [b1, b2, b3]
}
