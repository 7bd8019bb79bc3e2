//! Randomized incremental Delaunay triangulation with a history DAG.
//!
//! The construction starts from a triangle whose corners are points at
//! infinity (see [`crate::predicates::symbolic`]), so every input point is
//! strictly inside it and no finite enclosing triangle can distort the hull.
//! Each insertion locates its point with the pushdown walk, splits the leaf
//! into three and repairs with edge flips whose in-circle tests are
//! amplified by repetition.
//!
//! A split node records the inserted point; its children are told apart by
//! two orientation tests against spokes from that point. A flip node records
//! the inserted point and the far vertex of the new diagonal; one test
//! against the diagonal picks the child.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::general_position::validate_points;
use crate::noise::{NoisyContext, RepetitionPlan};
use crate::params::Params;
use crate::predicates::symbolic::SymPoint;
use crate::predicates::{dist2, Point2};
use crate::walk::{run_walk_with_retries, SearchDag, Transition, TransitionOracle};

pub type TriId = u32;

/// Directions of the three corners at infinity, counterclockwise. Every
/// direction has a component larger than any difference of input
/// coordinates, so no edge between input points is parallel to one.
const K: i64 = (1 << 22) + 1;
const CORNERS: [(i64, i64); 3] = [(-K, -(K + 2)), (K + 2, -K), (1, K)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum History {
    Leaf,
    /// Split at `apex`; child `i` is `(v[i], v[i+1], apex)`.
    Split { apex: u32, kids: [TriId; 3] },
    /// Flipped while inserting `apex`; the new diagonal runs to `spoke`.
    Flip { apex: u32, spoke: u32, right: TriId, left: TriId },
}

#[derive(Debug, Clone)]
pub struct Triangle {
    /// Vertex indices in counterclockwise order; indices `n..n+3` are the
    /// corners at infinity.
    pub v: [u32; 3],
    /// `nb[i]` is across the edge opposite `v[i]`.
    nb: [Option<TriId>; 3],
    history: History,
    pub depth: u32,
}

impl Triangle {
    pub fn is_leaf(&self) -> bool {
        self.history == History::Leaf
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DtStats {
    pub located: u64,
    pub path_len_sum: u64,
    pub walk_consultations: u64,
    pub flips: u64,
}

/// Finished triangulation: CCW triangles with the smallest index first,
/// sorted, and the edges as `(i, j, |pi - pj|^2)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriangulationResult {
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<(usize, usize, i128)>,
}

#[derive(Debug, Clone)]
pub struct Delaunay {
    pts: Vec<Point2>,
    tris: Vec<Triangle>,
    max_depth: u32,
    order: Vec<usize>,
    /// For each insertion, the leaf triangles around the inserted point in
    /// counterclockwise order right after its insertion.
    stars: Vec<Vec<TriId>>,
    pub stats: DtStats,
}

impl Delaunay {
    fn new(pts: &[Point2]) -> Self {
        let n = pts.len() as u32;
        Delaunay {
            pts: pts.to_vec(),
            tris: vec![Triangle { v: [n, n + 1, n + 2], nb: [None; 3], history: History::Leaf, depth: 0 }],
            max_depth: 0,
            order: Vec::new(),
            stars: Vec::new(),
            stats: DtStats::default(),
        }
    }

    pub fn points(&self) -> &[Point2] {
        &self.pts
    }

    pub fn insertion_order(&self) -> &[usize] {
        &self.order
    }

    pub fn node_count(&self) -> usize {
        self.tris.len()
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn triangle(&self, t: TriId) -> &Triangle {
        &self.tris[t as usize]
    }

    /// Star of the `i`-th inserted point.
    pub fn star(&self, i: usize) -> &[TriId] {
        &self.stars[i]
    }

    pub fn leaves(&self) -> Vec<TriId> {
        (0..self.tris.len() as TriId).filter(|&t| self.tris[t as usize].is_leaf()).collect()
    }

    fn sym(&self, v: u32) -> SymPoint {
        let n = self.pts.len() as u32;
        if v < n {
            SymPoint::finite(self.pts[v as usize])
        } else {
            let d = CORNERS[(v - n) as usize];
            SymPoint::at_infinity(d.0, d.1)
        }
    }

    fn is_real(&self, v: u32) -> bool {
        (v as usize) < self.pts.len()
    }

    /// Exact containment of `q` in the interior of triangle `t`.
    pub fn contains_point(&self, t: TriId, q: Point2) -> bool {
        use crate::predicates::symbolic::orient2d;
        use crate::predicates::Sign;
        let v = self.tris[t as usize].v;
        let q = SymPoint::finite(q);
        (0..3).all(|i| orient2d(&self.sym(v[i]), &self.sym(v[(i + 1) % 3]), &q) == Sign::Positive)
    }

    /// Leaf containing `q` found by a noisy walk down the history DAG.
    pub fn locate(&self, q: Point2, ctx: &mut NoisyContext, params: &Params) -> Result<TriId> {
        self.walk_locate(q, ctx, params).map(|r| r.0)
    }

    fn walk_locate(&self, q: Point2, ctx: &mut NoisyContext, params: &Params) -> Result<(TriId, u64, u64)> {
        if self.tris[0].is_leaf() {
            return Ok((0, 0, 0));
        }
        let cfg = params.walk_config(self.pts.len(), self.max_depth as u64 + 1);
        let mut oracle = TriOracle { dt: self, q: SymPoint::finite(q) };
        let out = run_walk_with_retries(self, &mut oracle, 0, &cfg, ctx, params.max_retries)?;
        Ok((out.target, out.path().len() as u64 - 1, out.consultations))
    }

    fn push(&mut self, v: [u32; 3], depth: u32) -> TriId {
        self.tris.push(Triangle { v, nb: [None; 3], history: History::Leaf, depth });
        self.max_depth = self.max_depth.max(depth);
        (self.tris.len() - 1) as TriId
    }

    /// Index of `vertex` within triangle `t`.
    fn slot(&self, t: TriId, vertex: u32) -> usize {
        self.tris[t as usize].v.iter().position(|&x| x == vertex).expect("vertex of triangle")
    }

    /// In neighbour `nb`, replace the back link to `old` by `new`.
    fn relink(&mut self, nb: Option<TriId>, old: TriId, new: TriId) {
        if let Some(u) = nb {
            for s in self.tris[u as usize].nb.iter_mut() {
                if *s == Some(old) {
                    *s = Some(new);
                }
            }
        }
    }

    fn insert(&mut self, pi: usize, ctx: &mut NoisyContext, params: &Params, plan: RepetitionPlan) -> Result<()> {
        let (t, len, cons) = self.walk_locate(self.pts[pi], ctx, params)?;
        self.stats.located += 1;
        self.stats.path_len_sum += len;
        self.stats.walk_consultations += cons;
        let p = pi as u32;
        let old = self.tris[t as usize].clone();
        let [a, b, c] = old.v;
        let depth = old.depth + 1;
        let t0 = self.push([a, b, p], depth);
        let t1 = self.push([b, c, p], depth);
        let t2 = self.push([c, a, p], depth);
        self.tris[t0 as usize].nb = [Some(t1), Some(t2), old.nb[2]];
        self.tris[t1 as usize].nb = [Some(t2), Some(t0), old.nb[0]];
        self.tris[t2 as usize].nb = [Some(t0), Some(t1), old.nb[1]];
        self.relink(old.nb[2], t, t0);
        self.relink(old.nb[0], t, t1);
        self.relink(old.nb[1], t, t2);
        self.tris[t as usize].history = History::Split { apex: p, kids: [t0, t1, t2] };

        // every triangle on the stack has p as v[2]; test the far edge
        let mut stack = vec![t0, t1, t2];
        let mut last = t0;
        while let Some(tt) = stack.pop() {
            if !self.tris[tt as usize].is_leaf() {
                continue;
            }
            last = tt;
            let tri = self.tris[tt as usize].clone();
            let [x, y, _] = tri.v;
            let Some(u) = tri.nb[2] else { continue };
            let ut = self.tris[u as usize].clone();
            let d = ut.v[(self.slot(u, x) + 1) % 3];
            if !ctx.in_circle_sym(&self.sym(x), &self.sym(y), &self.sym(p), &self.sym(d), plan)? {
                continue;
            }
            self.stats.flips += 1;
            let depth = tri.depth.max(ut.depth) + 1;
            let na = self.push([x, d, p], depth);
            let nb = self.push([d, y, p], depth);
            let out_px = tri.nb[1];
            let out_yp = tri.nb[0];
            let out_xd = ut.nb[self.slot(u, y)];
            let out_dy = ut.nb[self.slot(u, x)];
            self.tris[na as usize].nb = [Some(nb), out_px, out_xd];
            self.tris[nb as usize].nb = [out_yp, Some(na), out_dy];
            self.relink(out_px, tt, na);
            self.relink(out_xd, u, na);
            self.relink(out_yp, tt, nb);
            self.relink(out_dy, u, nb);
            let h = History::Flip { apex: p, spoke: d, right: na, left: nb };
            self.tris[tt as usize].history = h;
            self.tris[u as usize].history = h;
            stack.push(na);
            stack.push(nb);
            last = na;
        }
        let star = self.collect_star(last, p);
        self.stars.push(star);
        Ok(())
    }

    /// Leaves around vertex `p`, counterclockwise, starting at `start`.
    fn collect_star(&self, start: TriId, p: u32) -> Vec<TriId> {
        let mut out = vec![start];
        let mut cur = start;
        loop {
            // rotate counterclockwise around p: cross the edge (p, v[next])
            let s = self.slot(cur, p);
            let Some(next) = self.tris[cur as usize].nb[(s + 1) % 3] else { break };
            if next == start || out.len() > self.tris.len() {
                break;
            }
            out.push(next);
            cur = next;
        }
        out
    }

    /// Triangles and edges between input points.
    pub fn result(&self) -> TriangulationResult {
        let mut triangles = Vec::new();
        let mut edges = Vec::new();
        for t in &self.tris {
            if !t.is_leaf() || !t.v.iter().all(|&v| self.is_real(v)) {
                continue;
            }
            let v = t.v.map(|x| x as usize);
            let r = (0..3).min_by_key(|&i| v[i]).unwrap();
            triangles.push([v[r], v[(r + 1) % 3], v[(r + 2) % 3]]);
            for i in 0..3 {
                let (a, b) = (v[i].min(v[(i + 1) % 3]), v[i].max(v[(i + 1) % 3]));
                edges.push((a, b, dist2(self.pts[a], self.pts[b])));
            }
        }
        triangles.sort_unstable();
        edges.sort_unstable();
        edges.dedup();
        TriangulationResult { triangles, edges }
    }
}

/// Builds the triangulation inserting points in a random order from `ctx`.
pub fn build_delaunay(pts: &[Point2], ctx: &mut NoisyContext, params: &Params) -> Result<Delaunay> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.shuffle(ctx.rng());
    build_with_order(pts, &order, ctx, params)
}

pub fn build_with_order(pts: &[Point2], order: &[usize], ctx: &mut NoisyContext, params: &Params) -> Result<Delaunay> {
    validate_points(pts)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..pts.len()).collect::<Vec<_>>() {
        return Err(Error::StructuralError("insertion order is not a permutation".into()));
    }
    let plan = params.amplify(ctx.p(), pts.len())?;
    let mut dt = Delaunay::new(pts);
    for &i in order {
        dt.insert(i, ctx, params, plan)?;
        dt.order.push(i);
    }
    Ok(dt)
}

/// Euclidean minimum spanning tree: Delaunay edges sorted noisily by length
/// (ties by index), then Kruskal. Returns sorted `(i, j)` pairs.
pub fn emst(pts: &[Point2], ctx: &mut NoisyContext, params: &Params) -> Result<Vec<(usize, usize)>> {
    let dt = build_delaunay(pts, ctx, params)?;
    emst_from(&dt, ctx, params)
}

pub fn emst_from(dt: &Delaunay, ctx: &mut NoisyContext, params: &Params) -> Result<Vec<(usize, usize)>> {
    let pts = dt.points();
    let edges: Vec<(usize, usize)> = dt.result().edges.iter().map(|e| (e.0, e.1)).collect();
    let by_length = |a: &(usize, usize), b: &(usize, usize)| -> Result<std::cmp::Ordering> {
        Ok(crate::oracle::edge_order(pts, *a, *b))
    };
    let mut t = crate::bst::OrderedTree::with_scale(pts.len());
    for e in edges {
        t.insert(e, &by_length, ctx, params)?;
    }
    let mut uf: Vec<usize> = (0..pts.len()).collect();
    fn find(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    let mut out = Vec::with_capacity(pts.len().saturating_sub(1));
    for &(i, j) in t.keys() {
        let (a, b) = (find(&mut uf, i), find(&mut uf, j));
        if a != b {
            uf[a] = b;
            out.push((i, j));
        }
    }
    out.sort_unstable();
    Ok(out)
}

impl SearchDag for Delaunay {
    type Vertex = TriId;

    fn contains(&self, v: TriId) -> bool {
        (v as usize) < self.tris.len()
    }

    fn has_edge(&self, from: TriId, to: TriId) -> bool {
        match self.tris[from as usize].history {
            History::Leaf => false,
            History::Split { kids, .. } => kids.contains(&to),
            History::Flip { right, left, .. } => to == right || to == left,
        }
    }

    fn is_sink(&self, v: TriId) -> bool {
        self.tris[v as usize].is_leaf()
    }
}

/// Three containment tests plus at most two spoke tests.
struct TriOracle<'a> {
    dt: &'a Delaunay,
    q: SymPoint,
}

impl TransitionOracle<TriId> for TriOracle<'_> {
    fn tests_per_consultation(&self) -> u32 {
        5
    }

    fn consult(&mut self, t: TriId, ctx: &mut NoisyContext, plan: RepetitionPlan) -> Result<Transition<TriId>> {
        let dt = self.dt;
        let q = &self.q;
        let tri = &dt.tris[t as usize];
        let v = tri.v.map(|x| dt.sym(x));
        for i in 0..3 {
            if !ctx.ccw_sym(&v[i], &v[(i + 1) % 3], q, plan)? {
                return Ok(Transition::OffPath);
            }
        }
        let next = match tri.history {
            History::Leaf => t,
            History::Split { apex, kids } => {
                let a = dt.sym(apex);
                // spokes from the apex to v0, v1, v2 bound kids 2|0, 0|1, 1|2
                if ctx.ccw_sym(&a, &v[1], q, plan)? {
                    if ctx.ccw_sym(&a, &v[2], q, plan)? {
                        kids[2]
                    } else {
                        kids[1]
                    }
                } else if ctx.ccw_sym(&a, &v[0], q, plan)? {
                    kids[0]
                } else {
                    kids[2]
                }
            }
            History::Flip { apex, spoke, right, left } => {
                if ctx.ccw_sym(&dt.sym(apex), &dt.sym(spoke), q, plan)? {
                    left
                } else {
                    right
                }
            }
        };
        Ok(Transition::Next(next))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<Point2> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn three_points_one_triangle() {
        let p = pts(&[(0, 0), (10, 1), (3, 8)]);
        let dt = build_delaunay(&p, &mut NoisyContext::exact(), &Params::default()).unwrap();
        assert_eq!(dt.result().triangles, vec![[0, 1, 2]]);
    }

    #[test]
    fn inner_point_three_triangles() {
        let p = pts(&[(0, 0), (10, 1), (3, 8), (4, 3)]);
        let r = build_delaunay(&p, &mut NoisyContext::exact(), &Params::default()).unwrap().result();
        assert_eq!(r.triangles, vec![[0, 1, 3], [0, 3, 2], [1, 2, 3]]);
        assert_eq!(r.edges.len(), 6);
    }

    #[test]
    fn emst_example() {
        let p = pts(&[(0, 0), (3, 0), (0, 4)]);
        let t = emst(&p, &mut NoisyContext::exact(), &Params::default()).unwrap();
        assert_eq!(t, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn rejects_degenerate_input() {
        let mut ctx = NoisyContext::exact();
        let p = Params::default();
        assert!(matches!(
            build_delaunay(&pts(&[(0, 0), (1, 1)]), &mut ctx, &p),
            Err(Error::TooFewPoints { needed: 3, got: 2 })
        ));
        assert!(matches!(
            build_delaunay(&pts(&[(0, 0), (1, 1), (2, 2), (5, 0)]), &mut ctx, &p),
            Err(Error::GeneralPositionViolation(_))
        ));
    }

    #[test]
    fn locate_in_single_triangle_dag() {
        let p = pts(&[(0, 0), (10, 1), (3, 8)]);
        let dt = Delaunay::new(&p);
        assert_eq!(dt.locate(Point2::new(1, 1), &mut NoisyContext::exact(), &Params::default()).unwrap(), 0);
    }
}
