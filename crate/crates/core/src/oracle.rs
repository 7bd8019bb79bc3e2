//! Exact brute-force references used to judge noisy runs. Nothing here
//! touches a [`NoisyContext`](crate::noise::NoisyContext); every answer is
//! computed from the exact kernels by a method independent of the
//! algorithm it checks.

use std::cmp::Ordering;

use crate::predicates::{
    above_segment, compare_x, crossing_point, dist2, orient2d, Point2, RatPoint, Rational, Segment2, Sign,
};
use crate::trapezoid::{Edge, TrapId, TrapKey, TrapMap, BOX};

/// Exact height of the supporting line of `s` at abscissa `x`.
pub fn y_at(s: &Segment2, x: i64) -> Rational {
    let (a, b) = (s.left(), s.right());
    let dx = (b.x - a.x) as i128;
    Rational::new(a.y as i128 * dx + (b.y - a.y) as i128 * (x - a.x) as i128, dx)
}

/// Trapezoidal decomposition of non-crossing segments inside the box, by
/// shooting walls from every endpoint.
pub fn trapezoid_decomposition(segs: &[Segment2]) -> Vec<TrapKey> {
    let box_right = Point2::new(BOX, 0);
    let right_of = |e: Edge| match e {
        Edge::Seg(i) => segs[i].right(),
        _ => box_right,
    };
    // walls above and below a point
    let wall = |v: Point2| -> (Edge, Edge) {
        let (mut up, mut down) = (Edge::BoxTop, Edge::BoxBottom);
        let (mut up_y, mut down_y): (Option<Rational>, Option<Rational>) = (None, None);
        for (i, s) in segs.iter().enumerate() {
            if !(s.left().x < v.x && v.x < s.right().x) {
                continue;
            }
            let y = y_at(s, v.x);
            if above_segment(v, s) == Sign::Negative {
                if up_y.is_none_or(|u| y < u) {
                    up_y = Some(y);
                    up = Edge::Seg(i);
                }
            } else if down_y.is_none_or(|d| y > d) {
                down_y = Some(y);
                down = Edge::Seg(i);
            }
        }
        (up, down)
    };
    let between = |w: Point2, top: Edge, bottom: Edge| {
        let below_top = match top {
            Edge::Seg(i) => above_segment(w, &segs[i]) == Sign::Negative,
            _ => true,
        };
        let above_bottom = match bottom {
            Edge::Seg(i) => above_segment(w, &segs[i]) == Sign::Positive,
            _ => true,
        };
        below_top && above_bottom
    };
    let close = |top: Edge, bottom: Edge, leftp: Point2| -> TrapKey {
        let (rt, rb) = (right_of(top), right_of(bottom));
        let mut rightp = if rt.x < rb.x { rt } else { rb };
        for s in segs {
            for w in [s.a, s.b] {
                if leftp.x < w.x && w.x < rightp.x && between(w, top, bottom) {
                    rightp = w;
                }
            }
        }
        TrapKey { top, bottom, leftp, rightp }
    };

    let mut out = vec![close(Edge::BoxTop, Edge::BoxBottom, Point2::new(-BOX, 0))];
    for (i, s) in segs.iter().enumerate() {
        let (up, down) = wall(s.left());
        out.push(close(up, Edge::Seg(i), s.left()));
        out.push(close(Edge::Seg(i), down, s.left()));
        let (up, down) = wall(s.right());
        out.push(close(up, down, s.right()));
    }
    out.sort();
    out
}

/// Leaf of a finished map containing `q`, by scanning every leaf.
pub fn locate_leaf(map: &TrapMap, q: Point2) -> Option<TrapId> {
    map.leaves().into_iter().find(|&id| map.contains_point(id, q))
}

/// All crossing pairs `(i, j)`, `i < j`, in sweep order of their crossing
/// points.
pub fn all_crossings(segs: &[Segment2]) -> Vec<(usize, usize, RatPoint)> {
    let mut out = Vec::new();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if let Some(x) = crossing_point(&segs[i], &segs[j]) {
                out.push((i, j, x));
            }
        }
    }
    out.sort_by_key(|a| (a.2.x, a.2.y));
    out
}

/// Closest pair by index, `i < j`; ties broken by index order.
pub fn closest_pair(pts: &[Point2]) -> Option<(usize, usize)> {
    let mut best: Option<(i128, usize, usize)> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = dist2(pts[i], pts[j]);
            if best.is_none_or(|b| d < b.0) {
                best = Some((d, i, j));
            }
        }
    }
    best.map(|b| (b.1, b.2))
}

/// Number of pairs attaining the minimum distance.
pub fn closest_pair_multiplicity(pts: &[Point2]) -> usize {
    let Some((i, j)) = closest_pair(pts) else { return 0 };
    let d = dist2(pts[i], pts[j]);
    let mut c = 0;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            c += usize::from(dist2(pts[a], pts[b]) == d);
        }
    }
    c
}

/// Convex hull by gift wrapping, counterclockwise from the lexicographically
/// smallest point. Assumes no three collinear points.
pub fn convex_hull(pts: &[Point2]) -> Vec<Point2> {
    if pts.len() < 3 {
        return pts.to_vec();
    }
    let start = *pts.iter().min().unwrap();
    let mut hull = vec![start];
    let mut cur = start;
    loop {
        let mut next = if pts[0] == cur { pts[1] } else { pts[0] };
        for &x in pts {
            if x != cur && x != next && orient2d(cur, next, x) == Sign::Negative {
                next = x;
            }
        }
        if next == start {
            break;
        }
        hull.push(next);
        cur = next;
        if hull.len() > pts.len() {
            break;
        }
    }
    hull
}

/// Edge order for spanning trees: squared length, then endpoint indices.
pub fn edge_order(pts: &[Point2], a: (usize, usize), b: (usize, usize)) -> Ordering {
    dist2(pts[a.0], pts[a.1]).cmp(&dist2(pts[b.0], pts[b.1])).then(a.cmp(&b))
}

/// Euclidean minimum spanning tree of the complete graph by Prim's
/// algorithm, edges as sorted `(i, j)` with `i < j`.
pub fn emst(pts: &[Point2]) -> Vec<(usize, usize)> {
    let n = pts.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best: Vec<Option<(usize, usize)>> = vec![None; n];
    in_tree[0] = true;
    for (v, b) in best.iter_mut().enumerate().skip(1) {
        *b = Some((0, v));
    }
    let mut out = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick: Option<usize> = None;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let e = best[v].unwrap();
            if pick.is_none_or(|u| edge_order(pts, e, best[u].unwrap()) == Ordering::Less) {
                pick = Some(v);
            }
        }
        let u = pick.unwrap();
        in_tree[u] = true;
        out.push(best[u].unwrap());
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let e = (u.min(v), u.max(v));
            if edge_order(pts, e, best[v].unwrap()) == Ordering::Less {
                best[v] = Some(e);
            }
        }
    }
    out.sort();
    out
}

/// Lexicographic order on points as an exact sign.
pub fn lex(a: Point2, b: Point2) -> Sign {
    match compare_x(a, b) {
        Sign::Zero => Sign::from_ordering(a.y.cmp(&b.y)),
        s => s,
    }
}

/// Exact validation of a claimed Delaunay triangulation: counterclockwise
/// triangles, a consistent edge structure whose boundary is the convex hull,
/// total area equal to the hull area, Euler counts, and every interior edge
/// locally Delaunay.
pub fn check_delaunay(pts: &[Point2], tris: &[[usize; 3]]) -> Result<(), String> {
    use std::collections::HashMap;
    let n = pts.len();
    let hull = convex_hull(pts);
    let h = hull.len();
    if tris.len() != 2 * n - h - 2 {
        return Err(format!("{} triangles, expected {}", tris.len(), 2 * n - h - 2));
    }
    let mut area = 0i128;
    // directed edge -> opposite vertex
    let mut half: HashMap<(usize, usize), usize> = HashMap::new();
    for t in tris {
        let [a, b, c] = *t;
        if orient2d(pts[a], pts[b], pts[c]) != Sign::Positive {
            return Err(format!("triangle {t:?} is not counterclockwise"));
        }
        area += crate::predicates::doubled_area(pts[a], pts[b], pts[c]);
        for (u, v, w) in [(a, b, c), (b, c, a), (c, a, b)] {
            if half.insert((u, v), w).is_some() {
                return Err(format!("directed edge {u}->{v} used twice"));
            }
        }
    }
    let mut hull_area = 0i128;
    for i in 1..h.saturating_sub(1) {
        hull_area += crate::predicates::doubled_area(hull[0], hull[i], hull[i + 1]);
    }
    if area != hull_area {
        return Err(format!("area {area} differs from hull area {hull_area}"));
    }
    let edges = half.keys().filter(|&&(u, v)| u < v || !half.contains_key(&(v, u))).count();
    if edges != 3 * n - h - 3 {
        return Err(format!("{edges} edges, expected {}", 3 * n - h - 3));
    }
    let mut boundary = 0;
    for (&(u, v), &w) in &half {
        match half.get(&(v, u)) {
            None => boundary += 1,
            Some(&x) => {
                let s = crate::predicates::in_circle(pts[u], pts[v], pts[w], pts[x]).map_err(|e| e.to_string())?;
                if s != Sign::Negative {
                    return Err(format!("edge {u}-{v} is not locally Delaunay"));
                }
            }
        }
    }
    if boundary != h {
        return Err(format!("{boundary} boundary edges, hull has {h}"));
    }
    Ok(())
}

/// Slow check: no input point strictly inside any circumcircle.
pub fn empty_circumcircles(pts: &[Point2], tris: &[[usize; 3]]) -> bool {
    tris.iter().all(|&[a, b, c]| {
        pts.iter().enumerate().all(|(i, &p)| {
            i == a
                || i == b
                || i == c
                || (crate::predicates::in_circle(pts[a], pts[b], pts[c], p) == Ok(Sign::Negative))
        })
    })
}

/// Exact post-check of a claimed hull: strictly convex counterclockwise
/// turns and every input point inside or on the polygon.
pub fn check_hull(pts: &[Point2], hull: &[Point2]) -> Result<(), String> {
    let h = hull.len();
    if h < 3 {
        return Err(format!("hull has {h} vertices"));
    }
    for i in 0..h {
        let (a, b, c) = (hull[i], hull[(i + 1) % h], hull[(i + 2) % h]);
        if orient2d(a, b, c) != Sign::Positive {
            return Err(format!("turn at {b} is not counterclockwise"));
        }
    }
    for &p in pts {
        for i in 0..h {
            if orient2d(hull[i], hull[(i + 1) % h], p) == Sign::Negative {
                return Err(format!("{p} lies outside edge {}", i));
            }
        }
    }
    Ok(())
}
