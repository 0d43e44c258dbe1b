//! The map `v ↦ (f1(v), f2(v))` into the affine plane and point-plus-line
//! covers of its image.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::function::{InvariantFunction, Value};
use crate::padic::Padic;

use super::ProjectiveSpace;

/// Value ring of the φ-map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Ring {
    /// `Z/p`, `p` prime.
    Residue {
        p: u64,
    },
    Rational,
    /// `Z_p` truncated to `precision` digits.
    Padic {
        p: u64,
        precision: u32,
    },
    /// `Q_p`; accepted as a tag so that it can be rejected explicitly.
    PadicField {
        p: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Residue(u64),
    Rational(Rational64),
    Padic(Padic),
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Residue(r) => write!(f, "{r}"),
            Scalar::Rational(r) => write!(f, "{r}"),
            Scalar::Padic(x) => write!(f, "{}", x.to_digit_string()),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub type Point = (Scalar, Scalar);

impl Ring {
    pub fn check_supported(&self) -> Result<()> {
        match *self {
            Ring::Residue { p } => {
                crate::lattice::ScalarDomain::prime_field(p).map_err(|e| Error::RingUnsupported(e.message))?;
                Ok(())
            }
            Ring::Rational => Ok(()),
            Ring::Padic { p, precision } => {
                Padic::check_params(p, precision).map_err(|e| Error::RingUnsupported(e.message))?;
                Ok(())
            }
            Ring::PadicField { p } => {
                Err(Error::RingUnsupported(format!("Q_{p}: the point-plus-line cover does not hold over p-adic fields")))
            }
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match *self {
            Ring::Residue { p } => Scalar::Residue(n.rem_euclid(p as i64) as u64),
            Ring::Rational => Scalar::Rational(Rational64::from_integer(n)),
            Ring::Padic { p, precision } => Scalar::Padic(Padic::from_i64(p, precision, n)),
            Ring::PadicField { .. } => unreachable!("rejected ring"),
        }
    }

    /// Reads a function value as a ring element.
    pub fn scalar(&self, v: &Value) -> Result<Scalar> {
        match (*self, v) {
            (Ring::Residue { p }, Value::Residue(r)) => Ok(Scalar::Residue(r % p)),
            (Ring::Padic { p, precision }, Value::Padic(x)) if x.p() == p && x.precision() == precision => Ok(Scalar::Padic(*x)),
            (Ring::Padic { p, precision }, Value::Residue(r)) => Ok(Scalar::Padic(Padic::from_i64(p, precision, *r as i64))),
            (Ring::Rational, Value::Residue(r)) => Ok(Scalar::Rational(Rational64::from_integer(*r as i64))),
            (Ring::Rational, Value::Label(s)) => s
                .trim()
                .parse::<Rational64>()
                .map(Scalar::Rational)
                .map_err(|_| Error::RingUnsupported(format!("label {s:?} is not a rational number"))),
            _ => Err(Error::RingUnsupported(format!("value {v} does not lie in {self:?}"))),
        }
    }

    pub fn add(&self, a: Scalar, b: Scalar) -> Scalar {
        match (*self, a, b) {
            (Ring::Residue { p }, Scalar::Residue(x), Scalar::Residue(y)) => Scalar::Residue((x + y) % p),
            (_, Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x + y),
            (_, Scalar::Padic(x), Scalar::Padic(y)) => Scalar::Padic(x.add(&y)),
            _ => panic!("mixed scalars"),
        }
    }

    pub fn mul(&self, a: Scalar, b: Scalar) -> Scalar {
        match (*self, a, b) {
            (Ring::Residue { p }, Scalar::Residue(x), Scalar::Residue(y)) => Scalar::Residue(x * y % p),
            (_, Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x * y),
            (_, Scalar::Padic(x), Scalar::Padic(y)) => Scalar::Padic(x.mul(&y)),
            _ => panic!("mixed scalars"),
        }
    }

    pub fn neg(&self, a: Scalar) -> Scalar {
        self.mul(self.from_i64(-1), a)
    }

    pub fn sub(&self, a: Scalar, b: Scalar) -> Scalar {
        self.add(a, self.neg(b))
    }

    pub fn is_zero(&self, a: Scalar) -> bool {
        a == self.from_i64(0)
    }

    /// Linear combination `λ1 x + λ2 y + λ3`.
    pub fn combine(&self, coeffs: [Scalar; 3], x: Scalar, y: Scalar) -> Scalar {
        self.add(self.add(self.mul(coeffs[0], x), self.mul(coeffs[1], y)), coeffs[2])
    }

    /// Whether three points lie on one affine line. Over `Z_p` the
    /// differences are divided by their common `p`-power and the remaining
    /// determinant is tested at the precision that is left.
    pub fn collinear(&self, a: Point, b: Point, c: Point) -> bool {
        let d1 = (self.sub(b.0, a.0), self.sub(b.1, a.1));
        let d2 = (self.sub(c.0, a.0), self.sub(c.1, a.1));
        match *self {
            Ring::Padic { p, precision } => {
                let entries = [d1.0, d1.1, d2.0, d2.1];
                let digits = |s: Scalar| match s {
                    Scalar::Padic(x) => x,
                    _ => unreachable!(),
                };
                let v = entries.iter().map(|&s| digits(s).valuation()).min().unwrap_or(precision);
                if v >= precision {
                    return true;
                }
                let pv = (p as i128).pow(v);
                let m = (p as i128).pow(precision - v);
                let e: Vec<i128> = entries.iter().map(|&s| digits(s).residue() as i128 / pv % m).collect();
                (e[0] * e[3] - e[1] * e[2]).rem_euclid(m) == 0
            }
            _ => self.is_zero(self.sub(self.mul(d1.0, d2.1), self.mul(d1.1, d2.0))),
        }
    }

    /// The valuation of `a - b` (0 over fields unless equal).
    fn distance_rank(&self, a: Point, b: Point) -> u32 {
        match (*self, self.sub(a.0, b.0), self.sub(a.1, b.1)) {
            (Ring::Padic { .. }, Scalar::Padic(x), Scalar::Padic(y)) => x.valuation().min(y.valuation()),
            _ => (a == b) as u32,
        }
    }

    /// Line through `a` and `b`, as `α x + β y = γ`.
    pub fn line_through(&self, a: Point, b: Point) -> AffineLine {
        let (mut dx, mut dy) = (self.sub(b.0, a.0), self.sub(b.1, a.1));
        if self.is_zero(dx) && self.is_zero(dy) {
            (dx, dy) = (self.from_i64(1), self.from_i64(0));
        }
        if let (Ring::Padic { p, precision }, Scalar::Padic(x), Scalar::Padic(y)) = (*self, dx, dy) {
            let v = x.valuation().min(y.valuation());
            let pv = p.pow(v);
            dx = Scalar::Padic(Padic::from_i64(p, precision, (x.residue() / pv) as i64));
            dy = Scalar::Padic(Padic::from_i64(p, precision, (y.residue() / pv) as i64));
        }
        let alpha = self.neg(dy);
        let beta = dx;
        let gamma = self.add(self.mul(alpha, a.0), self.mul(beta, a.1));
        AffineLine { alpha, beta, gamma }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineLine {
    pub alpha: Scalar,
    pub beta: Scalar,
    pub gamma: Scalar,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiMap {
    #[serde(skip)]
    pub space: Arc<ProjectiveSpace>,
    pub ring: Ring,
    /// Image of each point of the space.
    pub images: Vec<Point>,
}

impl PhiMap {
    pub fn from_images(space: Arc<ProjectiveSpace>, ring: Ring, images: Vec<Point>) -> PhiMap {
        PhiMap { space, ring, images }
    }

    /// Points of the space over each image point.
    pub fn fibers(&self) -> BTreeMap<Point, Vec<usize>> {
        let mut out: BTreeMap<Point, Vec<usize>> = BTreeMap::new();
        for (i, &pt) in self.images.iter().enumerate() {
            out.entry(pt).or_default().push(i);
        }
        out
    }

    pub fn distinct(&self) -> Vec<Point> {
        self.fibers().into_keys().collect()
    }

    /// A line of the space whose image is not contained in an affine line.
    pub fn line_law_violation(&self) -> Option<usize> {
        self.space.lines().iter().position(|line| {
            let mut pts: Vec<Point> = line.iter().map(|&i| self.images[i]).collect();
            pts.sort();
            pts.dedup();
            !covered_by_line(&self.ring, &pts)
        })
    }
}

fn covered_by_line(ring: &Ring, pts: &[Point]) -> bool {
    if pts.len() <= 2 {
        return true;
    }
    let a = pts[0];
    let b = *pts[1..].iter().min_by_key(|&&x| ring.distance_rank(a, x)).unwrap();
    pts.iter().all(|&c| ring.collinear(a, b, c))
}

pub fn phi_image(f1: &InvariantFunction, f2: &InvariantFunction, ring: Ring) -> Result<PhiMap> {
    let Some(q) = f1.lattice().modulus() else {
        return Err(Error::DomainMismatch("the φ-map is defined on projective spaces over F_q".into()));
    };
    if f1.lattice() != f2.lattice() {
        return Err(Error::DomainMismatch("both functions must live on the same space".into()));
    }
    let space = Arc::new(ProjectiveSpace::new(q, f1.rank())?);
    let l1 = space.labels_of(f1)?;
    let l2 = space.labels_of(f2)?;
    let images =
        l1.iter().zip(&l2).map(|(&a, &b)| Ok((ring.scalar(f1.value_of(a))?, ring.scalar(f2.value_of(b))?))).collect::<Result<Vec<_>>>()?;
    Ok(PhiMap { space, ring, images })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ImageShape {
    PointAndLine {
        point: Point,
        line: AffineLine,
    },
    /// A smallest set of image points admitting no point-plus-line cover.
    Violation {
        points: Vec<Point>,
    },
}

fn cover(ring: &Ring, pts: &[Point]) -> Option<(Point, AffineLine)> {
    if pts.len() <= 2 {
        return Some((pts[0], ring.line_through(pts[0], *pts.last()?)));
    }
    for (i, &d) in pts.iter().enumerate() {
        let rest: Vec<Point> = pts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
        if covered_by_line(ring, &rest) {
            let a = rest[0];
            let b = *rest[1..].iter().min_by_key(|&&x| ring.distance_rank(a, x)).unwrap();
            return Some((d, ring.line_through(a, b)));
        }
    }
    None
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if acc.len() == k {
            out.push(acc.clone());
            return;
        }
        for i in start..n {
            acc.push(i);
            rec(i + 1, n, k, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Covers the image by one point and one affine line, or reports a smallest
/// uncoverable subset. With `rank3` the space must be a projective plane and
/// the line law is checked first.
pub fn image_shape(pm: &PhiMap, rank3: bool) -> Result<ImageShape> {
    pm.ring.check_supported()?;
    if rank3 {
        if pm.space.rank() != 3 {
            return Err(Error::DomainMismatch(format!("expected a projective plane, got rank {}", pm.space.rank())));
        }
        if let Some(l) = pm.line_law_violation() {
            return Err(Error::NotACPair(format!("image of line {:?} is not collinear", pm.space.lines()[l])));
        }
    }
    let pts = pm.distinct();
    if let Some((point, line)) = cover(&pm.ring, &pts) {
        return Ok(ImageShape::PointAndLine { point, line });
    }
    for k in 4..=pts.len() {
        for s in subsets(pts.len(), k) {
            let chosen: Vec<Point> = s.iter().map(|&i| pts[i]).collect();
            if cover(&pm.ring, &chosen).is_none() {
                return Ok(ImageShape::Violation { points: chosen });
            }
        }
    }
    unreachable!("the full image is uncoverable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::ValueSet;

    fn f3(vals: &[u64]) -> InvariantFunction {
        let s = ProjectiveSpace::new(3, 3).unwrap();
        let per: Vec<Value> = vals.iter().map(|&v| Value::Residue(v)).collect();
        s.table(ValueSet::Residue(3), &per).unwrap()
    }

    #[test]
    fn delta_pair_image() {
        let mut a = vec![0; 13];
        let mut b = vec![0; 13];
        a[0] = 1;
        b[5] = 1;
        let pm = phi_image(&f3(&a), &f3(&b), Ring::Residue { p: 3 }).unwrap();
        let r = |x| Scalar::Residue(x);
        assert_eq!(pm.distinct(), vec![(r(0), r(0)), (r(0), r(1)), (r(1), r(0))]);
        assert!(matches!(image_shape(&pm, false).unwrap(), ImageShape::PointAndLine { .. }));
        // The line through both supports sees three non-collinear images.
        assert!(matches!(image_shape(&pm, true), Err(Error::NotACPair(_))));
    }

    #[test]
    fn equal_pair_is_diagonal() {
        let vals: Vec<u64> = (0..13).map(|i| i % 3).collect();
        let pm = phi_image(&f3(&vals), &f3(&vals), Ring::Residue { p: 3 }).unwrap();
        assert!(pm.images.iter().all(|(x, y)| x == y));
    }

    #[test]
    fn constant_pair_degenerate_line() {
        let z = vec![0; 13];
        let pm = phi_image(&f3(&z), &f3(&z), Ring::Residue { p: 3 }).unwrap();
        let ImageShape::PointAndLine { point, .. } = image_shape(&pm, true).unwrap() else { panic!() };
        assert_eq!(point, (Scalar::Residue(0), Scalar::Residue(0)));
    }

    #[test]
    fn general_position_violates() {
        let s = Arc::new(ProjectiveSpace::new(3, 3).unwrap());
        let ring = Ring::Residue { p: 3 };
        let r = |x: u64, y: u64| (Scalar::Residue(x), Scalar::Residue(y));
        let mut images = vec![r(0, 0); 13];
        images[1] = r(1, 0);
        images[2] = r(0, 1);
        images[3] = r(1, 1);
        images[4] = r(2, 1);
        let pm = PhiMap::from_images(s, ring, images);
        let ImageShape::Violation { points } = image_shape(&pm, false).unwrap() else { panic!() };
        assert_eq!(points.len(), 4);
    }

    #[test]
    fn padic_field_rejected() {
        let z = vec![0; 13];
        let mut pm = phi_image(&f3(&z), &f3(&z), Ring::Residue { p: 3 }).unwrap();
        pm.ring = Ring::PadicField { p: 3 };
        assert!(matches!(image_shape(&pm, false), Err(Error::RingUnsupported(_))));
    }

    #[test]
    fn padic_collinearity_uses_remaining_precision() {
        let ring = Ring::Padic { p: 3, precision: 4 };
        let s = |n| ring.from_i64(n);
        // (0,0), (3,0), (6, 27): the direction (1,0) and (2,9) differ mod 3^3.
        assert!(!ring.collinear((s(0), s(0)), (s(3), s(0)), (s(6), s(27))));
        assert!(ring.collinear((s(0), s(0)), (s(3), s(0)), (s(6), s(81))));
    }
}
