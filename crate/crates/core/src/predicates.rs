//! Exact integer geometric kernels.
//!
//! Every kernel here is total and exact: coordinates are bounded integers
//! (see [`COORD_BOUND`]) so all determinants fit in `i128`. These kernels
//! define ground truth. Algorithms never call them directly; they go through
//! the noisy Boolean views in [`crate::noise`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible absolute coordinate of an input point.
pub const COORD_BOUND: i64 = 1 << 20;

/// Exact sign of a determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(v: i128) -> Sign {
        match v.cmp(&0) {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Sign::Zero
    }

    pub fn from_ordering(o: Ordering) -> Sign {
        match o {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }

    pub fn to_ordering(self) -> Ordering {
        match self {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// A point on the integer grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point2 {
    pub x: i64,
    pub y: i64,
}

impl Point2 {
    pub const fn new(x: i64, y: i64) -> Self {
        Point2 { x, y }
    }

    /// Builds a point, rejecting coordinates beyond [`COORD_BOUND`].
    pub fn checked(x: i64, y: i64) -> Result<Self> {
        for c in [x, y] {
            if c.abs() > COORD_BOUND {
                return Err(Error::CoordinateOutOfRange(c));
            }
        }
        Ok(Point2 { x, y })
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A closed straight segment, stored with its lexicographically smaller
/// endpoint first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment2 {
    pub a: Point2,
    pub b: Point2,
}

impl Segment2 {
    /// Normalizes endpoint order so `a` is the left (lexicographically
    /// smaller) endpoint.
    pub fn new(p: Point2, q: Point2) -> Result<Self> {
        if p == q {
            return Err(crate::error::gp(format!("degenerate segment at {p}")));
        }
        Ok(if p < q { Segment2 { a: p, b: q } } else { Segment2 { a: q, b: p } })
    }

    pub fn left(&self) -> Point2 {
        self.a
    }

    pub fn right(&self) -> Point2 {
        self.b
    }

    pub fn is_vertical(&self) -> bool {
        self.a.x == self.b.x
    }
}

impl fmt::Display for Segment2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

/// Sign of `det[[b - a], [c - a]]`: positive for a counterclockwise turn.
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> Sign {
    let abx = (b.x - a.x) as i128;
    let aby = (b.y - a.y) as i128;
    let acx = (c.x - a.x) as i128;
    let acy = (c.y - a.y) as i128;
    Sign::of(abx * acy - aby * acx)
}

/// Whether `d` lies inside (+), outside (-) or on (0) the circle through
/// `a`, `b`, `c`, independent of the orientation of the triangle.
pub fn in_circle(a: Point2, b: Point2, c: Point2, d: Point2) -> Result<Sign> {
    let o = orient2d(a, b, c);
    if o.is_zero() {
        return Err(crate::error::gp(format!("collinear circle triple {a} {b} {c}")));
    }
    let row = |p: Point2| {
        let dx = (p.x - d.x) as i128;
        let dy = (p.y - d.y) as i128;
        (dx, dy, dx * dx + dy * dy)
    };
    let (ax, ay, al) = row(a);
    let (bx, by, bl) = row(b);
    let (cx, cy, cl) = row(c);
    let det = ax * (by * cl - bl * cy) - ay * (bx * cl - bl * cx) + al * (bx * cy - by * cx);
    let s = Sign::of(det);
    Ok(if o == Sign::Positive { s } else { -s })
}

/// Sign of `q` relative to the supporting line of `s`, oriented left to
/// right: positive means strictly above.
pub fn above_segment(q: Point2, s: &Segment2) -> Sign {
    orient2d(s.left(), s.right(), q)
}

pub fn compare_x(a: Point2, b: Point2) -> Sign {
    Sign::from_ordering(a.x.cmp(&b.x))
}

pub fn compare_y(a: Point2, b: Point2) -> Sign {
    Sign::from_ordering(a.y.cmp(&b.y))
}

/// Lexicographic (x, then y) comparison.
pub fn compare_lex(a: Point2, b: Point2) -> Sign {
    Sign::from_ordering(a.cmp(&b))
}

pub fn dist2(a: Point2, b: Point2) -> i128 {
    let dx = (a.x - b.x) as i128;
    let dy = (a.y - b.y) as i128;
    dx * dx + dy * dy
}

/// Sign of `|a - b|^2 - |c - d|^2`.
pub fn compare_dist(a: Point2, b: Point2, c: Point2, d: Point2) -> Sign {
    Sign::of(dist2(a, b) - dist2(c, d))
}

/// True iff the two segments share a point (closed segments).
pub fn segments_touch(s: &Segment2, t: &Segment2) -> bool {
    let d1 = orient2d(s.a, s.b, t.a);
    let d2 = orient2d(s.a, s.b, t.b);
    let d3 = orient2d(t.a, t.b, s.a);
    let d4 = orient2d(t.a, t.b, s.b);
    if d1 != d2 && d3 != d4 && !d1.is_zero() && !d2.is_zero() && !d3.is_zero() && !d4.is_zero() {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2| {
        orient2d(p, q, r).is_zero()
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(s.a, s.b, t.a) || on(s.a, s.b, t.b) || on(t.a, t.b, s.a) || on(t.a, t.b, s.b)
}

/// True iff the segments cross at a single point interior to both.
pub fn segments_cross(s: &Segment2, t: &Segment2) -> bool {
    let d1 = orient2d(s.a, s.b, t.a);
    let d2 = orient2d(s.a, s.b, t.b);
    let d3 = orient2d(t.a, t.b, s.a);
    let d4 = orient2d(t.a, t.b, s.b);
    d1.as_i8() * d2.as_i8() < 0 && d3.as_i8() * d4.as_i8() < 0
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact rational with positive denominator, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    pub num: i128,
    pub den: i128,
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Rational {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Rational { num: s * num / g, den: s * den / g }
    }

    pub fn integer(v: i64) -> Rational {
        Rational { num: v as i128, den: 1 }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let l = self.num.checked_mul(other.den).expect("rational magnitude bound");
        let r = other.num.checked_mul(self.den).expect("rational magnitude bound");
        l.cmp(&r)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A point with exact rational coordinates, ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RatPoint {
    pub x: Rational,
    pub y: Rational,
}

impl From<Point2> for RatPoint {
    fn from(p: Point2) -> Self {
        RatPoint { x: Rational::integer(p.x), y: Rational::integer(p.y) }
    }
}

impl fmt::Display for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Intersection point of two properly crossing segments, or `None` if they
/// do not cross.
pub fn crossing_point(s: &Segment2, t: &Segment2) -> Option<RatPoint> {
    if !segments_cross(s, t) {
        return None;
    }
    line_intersection(s, t)
}

/// Intersection of the supporting lines, `None` for parallel lines.
pub fn line_intersection(s: &Segment2, t: &Segment2) -> Option<RatPoint> {
    let rx = (s.b.x - s.a.x) as i128;
    let ry = (s.b.y - s.a.y) as i128;
    let sx = (t.b.x - t.a.x) as i128;
    let sy = (t.b.y - t.a.y) as i128;
    let denom = rx * sy - ry * sx;
    if denom == 0 {
        return None;
    }
    let qpx = (t.a.x - s.a.x) as i128;
    let qpy = (t.a.y - s.a.y) as i128;
    let tn = qpx * sy - qpy * sx;
    let xn = s.a.x as i128 * denom + rx * tn;
    let yn = s.a.y as i128 * denom + ry * tn;
    Some(RatPoint { x: Rational::new(xn, denom), y: Rational::new(yn, denom) })
}

/// Signed doubled area of a triangle.
pub fn doubled_area(a: Point2, b: Point2, c: Point2) -> i128 {
    let abx = (b.x - a.x) as i128;
    let aby = (b.y - a.y) as i128;
    let acx = (c.x - a.x) as i128;
    let acy = (c.y - a.y) as i128;
    abx * acy - aby * acx
}

pub mod symbolic {
    //! Kernels over points of the form `base + M * dir` evaluated in the
    //! limit `M -> infinity`. Used for the unbounded enclosing triangle of
    //! the Delaunay construction: a predicate's sign is the sign of the
    //! leading nonzero coefficient of its polynomial in `M`.

    use super::{Point2, Sign};
    use crate::error::Result;

    const DEG: usize = 5;

    /// Polynomial in `M` of degree below [`DEG`].
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    struct Poly([i128; DEG]);

    impl Poly {
        fn lin(c0: i64, c1: i64) -> Poly {
            let mut p = [0; DEG];
            p[0] = c0 as i128;
            p[1] = c1 as i128;
            Poly(p)
        }

        fn add(self, o: Poly) -> Poly {
            let mut r = [0; DEG];
            for (i, v) in r.iter_mut().enumerate() {
                *v = self.0[i].checked_add(o.0[i]).expect("symbolic coefficient overflow");
            }
            Poly(r)
        }

        fn sub(self, o: Poly) -> Poly {
            let mut r = [0; DEG];
            for (i, v) in r.iter_mut().enumerate() {
                *v = self.0[i].checked_sub(o.0[i]).expect("symbolic coefficient overflow");
            }
            Poly(r)
        }

        fn mul(self, o: Poly) -> Poly {
            let mut r = [0i128; DEG];
            for i in 0..DEG {
                if self.0[i] == 0 {
                    continue;
                }
                for j in 0..DEG {
                    if o.0[j] == 0 {
                        continue;
                    }
                    assert!(i + j < DEG, "symbolic degree overflow");
                    let t = self.0[i].checked_mul(o.0[j]).expect("symbolic coefficient overflow");
                    r[i + j] = r[i + j].checked_add(t).expect("symbolic coefficient overflow");
                }
            }
            Poly(r)
        }

        fn sign(self) -> Sign {
            self.0.iter().rev().find(|c| **c != 0).map_or(Sign::Zero, |c| Sign::of(*c))
        }
    }

    /// `base + M * dir` for an unbounded symbolic `M`.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
    pub struct SymPoint {
        pub base: Point2,
        pub dir: (i64, i64),
    }

    impl SymPoint {
        pub fn finite(p: Point2) -> SymPoint {
            SymPoint { base: p, dir: (0, 0) }
        }

        pub fn at_infinity(dx: i64, dy: i64) -> SymPoint {
            SymPoint { base: Point2::new(0, 0), dir: (dx, dy) }
        }

        pub fn is_finite(&self) -> bool {
            self.dir == (0, 0)
        }

        fn dx(&self, o: &SymPoint) -> Poly {
            Poly::lin(self.base.x - o.base.x, self.dir.0 - o.dir.0)
        }

        fn dy(&self, o: &SymPoint) -> Poly {
            Poly::lin(self.base.y - o.base.y, self.dir.1 - o.dir.1)
        }
    }

    pub fn orient2d(a: &SymPoint, b: &SymPoint, c: &SymPoint) -> Sign {
        if a.is_finite() && b.is_finite() && c.is_finite() {
            return super::orient2d(a.base, b.base, c.base);
        }
        b.dx(a).mul(c.dy(a)).sub(b.dy(a).mul(c.dx(a))).sign()
    }

    /// Inside (+) / outside (-) / on (0) the circle through `a, b, c`,
    /// independent of triangle orientation.
    pub fn in_circle(a: &SymPoint, b: &SymPoint, c: &SymPoint, d: &SymPoint) -> Result<Sign> {
        if a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite() {
            return super::in_circle(a.base, b.base, c.base, d.base);
        }
        let o = orient2d(a, b, c);
        if o.is_zero() {
            return Err(crate::error::gp("collinear symbolic circle triple"));
        }
        let row = |p: &SymPoint| {
            let x = p.dx(d);
            let y = p.dy(d);
            (x, y, x.mul(x).add(y.mul(y)))
        };
        let (ax, ay, al) = row(a);
        let (bx, by, bl) = row(b);
        let (cx, cy, cl) = row(c);
        let det = ax
            .mul(by.mul(cl).sub(bl.mul(cy)))
            .sub(ay.mul(bx.mul(cl).sub(bl.mul(cx))))
            .add(al.mul(bx.mul(cy).sub(by.mul(cx))));
        let s = det.sign();
        Ok(if o == Sign::Positive { s } else { -s })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn orient_examples() {
        assert_eq!(orient2d(p(0, 0), p(1, 0), p(0, 1)), Sign::Positive);
        assert_eq!(orient2d(p(0, 0), p(1, 1), p(2, 2)), Sign::Zero);
        assert_eq!(orient2d(p(0, 0), p(1, 0), p(2, -1)), Sign::Negative);
    }

    #[test]
    fn in_circle_examples() {
        let (a, b, c) = (p(0, 0), p(2, 0), p(0, 2));
        assert_eq!(in_circle(a, b, c, p(1, 1)).unwrap(), Sign::Positive);
        assert_eq!(in_circle(a, b, c, p(3, 3)).unwrap(), Sign::Negative);
        assert_eq!(in_circle(a, b, c, p(2, 2)).unwrap(), Sign::Zero);
        // clockwise input reports the same containment
        assert_eq!(in_circle(a, c, b, p(1, 1)).unwrap(), Sign::Positive);
        assert!(matches!(
            in_circle(p(0, 0), p(1, 1), p(2, 2), p(5, 0)),
            Err(Error::GeneralPositionViolation(_))
        ));
    }

    #[test]
    fn above_examples() {
        let s = Segment2::new(p(0, 0), p(2, 0)).unwrap();
        assert_eq!(above_segment(p(1, 1), &s), Sign::Positive);
        assert_eq!(above_segment(p(1, -1), &s), Sign::Negative);
        assert_eq!(above_segment(p(1, 0), &s), Sign::Zero);
        // endpoint order does not matter
        let r = Segment2::new(p(2, 0), p(0, 0)).unwrap();
        assert_eq!(above_segment(p(1, 1), &r), Sign::Positive);
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare_x(p(0, 5), p(1, 0)), Sign::Negative);
        assert_eq!(compare_x(p(3, 0), p(3, 9)), Sign::Zero);
        assert_eq!(compare_x(p(7, 0), p(2, 0)), Sign::Positive);
        assert_eq!(compare_dist(p(0, 0), p(1, 0), p(0, 0), p(3, 0)), Sign::Negative);
        assert_eq!(compare_dist(p(0, 0), p(3, 4), p(0, 0), p(5, 0)), Sign::Zero);
        assert_eq!(compare_dist(p(0, 0), p(2, 2), p(0, 0), p(1, 1)), Sign::Positive);
    }

    #[test]
    fn crossing_of_diagonals() {
        let s = Segment2::new(p(0, 0), p(4, 4)).unwrap();
        let t = Segment2::new(p(0, 4), p(4, 0)).unwrap();
        let c = crossing_point(&s, &t).unwrap();
        assert_eq!(c, RatPoint::from(p(2, 2)));
        let u = Segment2::new(p(0, 1), p(4, 5)).unwrap();
        assert!(crossing_point(&s, &u).is_none());
        assert!(!segments_touch(&s, &u));
        let w = Segment2::new(p(2, 2), p(5, 0)).unwrap();
        assert!(segments_touch(&s, &w));
        assert!(!segments_cross(&s, &w));
    }

    #[test]
    fn rational_order() {
        assert!(Rational::new(1, 3) < Rational::new(1, 2));
        assert_eq!(Rational::new(2, -4), Rational::new(-1, 2));
        assert!(Rational::new(-7, 2) < Rational::integer(-3));
    }

    #[test]
    fn symbolic_matches_finite() {
        use symbolic::SymPoint;
        let f = SymPoint::finite;
        let (a, b, c, d) = (p(0, 0), p(2, 0), p(0, 2), p(1, 1));
        assert_eq!(symbolic::orient2d(&f(a), &f(b), &f(c)), orient2d(a, b, c));
        assert_eq!(symbolic::in_circle(&f(a), &f(b), &f(c), &f(d)).unwrap(), Sign::Positive);
    }

    #[test]
    fn symbolic_infinite_vertices() {
        use symbolic::SymPoint;
        let far = SymPoint::at_infinity(-5, -7);
        let a = SymPoint::finite(p(0, 0));
        let b = SymPoint::finite(p(10, 0));
        let c = SymPoint::finite(p(0, 10));
        // a point infinitely far away is outside every finite circle
        assert_eq!(symbolic::in_circle(&a, &b, &c, &far).unwrap(), Sign::Negative);
        // orientation against a far point follows its direction
        assert_eq!(symbolic::orient2d(&a, &b, &far), Sign::Negative);
        let up = SymPoint::at_infinity(1, 9);
        assert_eq!(symbolic::orient2d(&a, &b, &up), Sign::Positive);
    }
}
