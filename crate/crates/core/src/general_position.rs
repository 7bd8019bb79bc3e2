//! Exact general-position validation, run before any noise is introduced.

use std::collections::HashSet;

use crate::error::{gp, Error, Result};
use crate::predicates::{self, segments_touch, Point2, Segment2, COORD_BOUND};

fn check_coord(c: i64) -> Result<()> {
    if c.abs() > COORD_BOUND {
        Err(Error::CoordinateOutOfRange(c))
    } else {
        Ok(())
    }
}

/// Some index `c` such that `pts[a]`, `pts[b]`, `pts[c]` are collinear, found
/// by sorting directions around every point.
pub fn find_collinear(pts: &[Point2]) -> Option<(usize, usize, usize)> {
    let mut dirs: Vec<(i64, i64, usize)> = Vec::with_capacity(pts.len());
    for (a, &pa) in pts.iter().enumerate() {
        dirs.clear();
        for (b, &pb) in pts.iter().enumerate() {
            if b == a {
                continue;
            }
            let (mut dx, mut dy) = (pb.x - pa.x, pb.y - pa.y);
            if dx < 0 || (dx == 0 && dy < 0) {
                dx = -dx;
                dy = -dy;
            }
            dirs.push((dx, dy, b));
        }
        // directions in the half plane dx > 0 or (dx == 0, dy > 0), sorted
        // by angle; no wraparound because the half plane is half-open
        dirs.sort_unstable_by(|u, v| {
            let cross = u.0 as i128 * v.1 as i128 - u.1 as i128 * v.0 as i128;
            0i128.cmp(&cross)
        });
        for w in dirs.windows(2) {
            if w[0].0 as i128 * w[1].1 as i128 == w[0].1 as i128 * w[1].0 as i128 {
                return Some((a, w[0].2, w[1].2));
            }
        }
    }
    None
}

/// Exact validation: at least three bounded, distinct points, no three
/// collinear. Cocircular quadruples are reported when a test meets one.
pub fn validate_points(pts: &[Point2]) -> Result<()> {
    if pts.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: pts.len() });
    }
    for p in pts {
        check_coord(p.x)?;
        check_coord(p.y)?;
    }
    let mut sorted = pts.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(gp(format!("duplicate point {}", w[0])));
    }
    if let Some((a, b, c)) = find_collinear(pts) {
        return Err(gp(format!("collinear {} {} {}", pts[a], pts[b], pts[c])));
    }
    Ok(())
}

/// Exact validation of the input: bounded, non-vertical, pairwise disjoint
/// segments with distinct endpoint abscissae and no endpoint on the
/// supporting line of another segment.
pub fn validate_segments(segs: &[Segment2]) -> Result<()> {
    let mut xs = HashSet::new();
    for s in segs {
        for p in [s.a, s.b] {
            check_coord(p.x)?;
            check_coord(p.y)?;
            if !xs.insert(p.x) {
                return Err(gp(format!("two endpoints at x = {}", p.x)));
            }
        }
    }
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if segments_touch(&segs[i], &segs[j]) {
                return Err(Error::CrossingSegments(i, j));
            }
            for (u, v) in [(i, j), (j, i)] {
                for p in [segs[u].a, segs[u].b] {
                    if predicates::above_segment(p, &segs[v]).is_zero() {
                        return Err(gp(format!("endpoint {p} lies on the line of segment {v}")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Exact validation for a sweep over possibly crossing segments: bounded,
/// non-vertical segments, no endpoint on another segment, and all event
/// abscissae (endpoints and crossings) distinct. The last condition also
/// rules out three segments through one point.
pub fn validate_sweep_segments(segs: &[Segment2]) -> Result<()> {
    let mut xs: HashSet<predicates::Rational> = HashSet::new();
    for s in segs {
        for p in [s.a, s.b] {
            check_coord(p.x)?;
            check_coord(p.y)?;
            if !xs.insert(predicates::Rational::integer(p.x)) {
                return Err(gp(format!("two events at x = {}", p.x)));
            }
        }
    }
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if !segments_touch(&segs[i], &segs[j]) {
                continue;
            }
            match predicates::crossing_point(&segs[i], &segs[j]) {
                None => return Err(gp(format!("segments {i} and {j} touch without crossing"))),
                Some(c) => {
                    if !xs.insert(c.x) {
                        return Err(gp(format!("crossing of {i} and {j} shares its abscissa {}", c.x)));
                    }
                }
            }
        }
    }
    Ok(())
}
