//! Randomized incremental trapezoidal map over non-crossing segments.
//!
//! The history DAG has one node per trapezoid ever created. Inserting a
//! segment destroys the leaves it crosses; each destroyed node gets up to
//! four children (left piece, right piece, the piece above the segment, the
//! piece below it), and pieces merged across removed walls get several
//! parents. Endpoints are located with the pushdown walk; the trapezoids
//! between them are found by an amplified walk along the segment.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::general_position::validate_segments;
use crate::noise::{NoisyContext, RepetitionPlan};
use crate::params::Params;
use crate::predicates::{self, compare_x, Point2, Segment2, Sign};
use crate::walk::{run_walk_with_retries, SearchDag, Transition, TransitionOracle};

/// Half-width of the bounding box.
pub const BOX: i64 = 1 << 21;

pub type TrapId = u32;

/// A trapezoid boundary: an input segment (by input index) or a box side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Edge {
    BoxBottom,
    Seg(usize),
    BoxTop,
}

/// Canonical description of a trapezoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TrapKey {
    pub top: Edge,
    pub bottom: Edge,
    pub leftp: Point2,
    pub rightp: Point2,
}

const LEFT: usize = 0;
const RIGHT: usize = 1;
const UPPER: usize = 2;
const LOWER: usize = 3;

#[derive(Debug, Clone)]
pub struct Trapezoid {
    /// Indices into the line table: input segments, then box top and bottom.
    pub top: usize,
    pub bottom: usize,
    pub leftp: Point2,
    pub rightp: Point2,
    ul: Option<TrapId>,
    ll: Option<TrapId>,
    ur: Option<TrapId>,
    lr: Option<TrapId>,
    children: [Option<TrapId>; 4],
    pub destroyed_by: Option<usize>,
    pub depth: u32,
}

impl Trapezoid {
    fn new(top: usize, bottom: usize, leftp: Point2, rightp: Point2) -> Self {
        Trapezoid {
            top,
            bottom,
            leftp,
            rightp,
            ul: None,
            ll: None,
            ur: None,
            lr: None,
            children: [None; 4],
            destroyed_by: None,
            depth: 0,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.destroyed_by.is_none()
    }

    pub fn children(&self) -> impl Iterator<Item = TrapId> + '_ {
        self.children.iter().flatten().copied()
    }
}

/// Counters gathered while building.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TrapStats {
    pub endpoint_walks: u64,
    /// Sum of the collapsed search-path lengths of all endpoint walks.
    pub path_len_sum: u64,
    pub walk_consultations: u64,
    /// Trapezoids visited by the walks along inserted segments.
    pub crossed: u64,
}

#[derive(Debug, Clone)]
pub struct TrapMap {
    lines: Vec<Segment2>,
    n: usize,
    nodes: Vec<Trapezoid>,
    max_depth: u32,
    order: Vec<usize>,
    scale: usize,
    pub stats: TrapStats,
}

const BOX_LEFT: Point2 = Point2::new(-BOX, 0);
const BOX_RIGHT: Point2 = Point2::new(BOX, 0);

impl TrapMap {
    fn empty(segs: &[Segment2], scale: usize) -> Self {
        let mut lines = segs.to_vec();
        lines.push(Segment2 { a: Point2::new(-BOX, BOX), b: Point2::new(BOX, BOX) });
        lines.push(Segment2 { a: Point2::new(-BOX, -BOX), b: Point2::new(BOX, -BOX) });
        let n = segs.len();
        TrapMap {
            lines,
            n,
            nodes: vec![Trapezoid::new(n, n + 1, BOX_LEFT, BOX_RIGHT)],
            max_depth: 0,
            order: Vec::new(),
            scale,
            stats: TrapStats::default(),
        }
    }

    pub fn segments(&self) -> &[Segment2] {
        &self.lines[..self.n]
    }

    /// Insertion order actually used, as input indices.
    pub fn insertion_order(&self) -> &[usize] {
        &self.order
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn trapezoid(&self, id: TrapId) -> &Trapezoid {
        &self.nodes[id as usize]
    }

    pub fn line(&self, idx: usize) -> &Segment2 {
        &self.lines[idx]
    }

    pub fn leaves(&self) -> Vec<TrapId> {
        (0..self.nodes.len() as TrapId).filter(|&i| self.nodes[i as usize].is_leaf()).collect()
    }

    pub fn edge(&self, idx: usize) -> Edge {
        match idx {
            i if i < self.n => Edge::Seg(i),
            i if i == self.n => Edge::BoxTop,
            _ => Edge::BoxBottom,
        }
    }

    pub fn key(&self, id: TrapId) -> TrapKey {
        let t = &self.nodes[id as usize];
        TrapKey { top: self.edge(t.top), bottom: self.edge(t.bottom), leftp: t.leftp, rightp: t.rightp }
    }

    /// Leaf trapezoids in canonical sorted form.
    pub fn canonical_leaves(&self) -> Vec<TrapKey> {
        let mut v: Vec<TrapKey> = self.leaves().into_iter().map(|i| self.key(i)).collect();
        v.sort();
        v
    }

    /// Exact containment of `q` in the interior of trapezoid `id`.
    pub fn contains_point(&self, id: TrapId, q: Point2) -> bool {
        let t = &self.nodes[id as usize];
        compare_x(t.leftp, q) == Sign::Negative
            && compare_x(q, t.rightp) == Sign::Negative
            && predicates::above_segment(q, &self.lines[t.bottom]) == Sign::Positive
            && predicates::above_segment(q, &self.lines[t.top]) == Sign::Negative
    }

    /// Locates the leaf containing `q` with a noisy walk down the history DAG.
    pub fn query(&self, q: Point2, ctx: &mut NoisyContext, params: &Params) -> Result<TrapId> {
        self.walk_locate(q, ctx, params).map(|(leaf, _, _)| leaf)
    }

    fn walk_locate(&self, q: Point2, ctx: &mut NoisyContext, params: &Params) -> Result<(TrapId, u64, u64)> {
        if self.nodes[0].is_leaf() {
            return Ok((0, 0, 0));
        }
        let cfg = params.walk_config(self.scale, self.max_depth as u64 + 1);
        let mut oracle = TrapOracle { map: self, q };
        let out = run_walk_with_retries(self, &mut oracle, 0, &cfg, ctx, params.max_retries)?;
        Ok((out.target, out.path().len() as u64 - 1, out.consultations))
    }

    fn locate_endpoint(&mut self, q: Point2, ctx: &mut NoisyContext, params: &Params) -> Result<TrapId> {
        let (leaf, len, cons) = self.walk_locate(q, ctx, params)?;
        self.stats.endpoint_walks += 1;
        self.stats.path_len_sum += len;
        self.stats.walk_consultations += cons;
        Ok(leaf)
    }

    fn push(&mut self, t: Trapezoid) -> TrapId {
        self.nodes.push(t);
        (self.nodes.len() - 1) as TrapId
    }

    fn insert(&mut self, si: usize, ctx: &mut NoisyContext, params: &Params, plan: RepetitionPlan) -> Result<()> {
        let s = self.lines[si];
        let (p, q) = (s.a, s.b);
        let first = self.locate_endpoint(p, ctx, params)?;
        let last = self.locate_endpoint(q, ctx, params)?;

        // trapezoids crossed by s, left to right; above[i] says whether the
        // wall point between seq[i] and seq[i+1] lies above s
        let mut seq = vec![first];
        let mut above = Vec::new();
        let mut cur = first;
        while cur != last {
            if seq.len() > self.nodes.len() {
                return Err(Error::StructuralError(format!("walk along segment {si} did not terminate")));
            }
            let t = &self.nodes[cur as usize];
            let (next, a) = match (t.ur, t.lr) {
                (Some(u), Some(l)) if u != l => {
                    if ctx.above(t.rightp, &s, plan)? {
                        (l, true)
                    } else {
                        (u, false)
                    }
                }
                (Some(u), None) => (u, false),
                (None, Some(l)) => (l, true),
                _ => {
                    return Err(Error::StructuralError(format!("walk along segment {si} left the map")));
                }
            };
            above.push(a);
            seq.push(next);
            cur = next;
        }
        self.stats.crossed += seq.len() as u64;
        let k = seq.len() - 1;
        let d = |m: &TrapMap, i: usize| m.nodes[seq[i] as usize].clone();
        let d0 = d(self, 0);
        let dk = d(self, k);

        let base = self.nodes.len() as TrapId;
        let a_id = self.push(Trapezoid::new(d0.top, d0.bottom, d0.leftp, p));
        let b_id = self.push(Trapezoid::new(dk.top, dk.bottom, q, dk.rightp));
        let mut upper_of = Vec::with_capacity(k + 1);
        let mut lower_of = Vec::with_capacity(k + 1);
        let mut u = self.push(Trapezoid::new(d0.top, si, p, p));
        let mut l = self.push(Trapezoid::new(si, d0.bottom, p, p));
        upper_of.push(u);
        lower_of.push(l);
        for i in 1..=k {
            let di = d(self, i);
            if above[i - 1] {
                self.nodes[u as usize].rightp = di.leftp;
                u = self.push(Trapezoid::new(di.top, si, di.leftp, di.leftp));
            } else {
                self.nodes[l as usize].rightp = di.leftp;
                l = self.push(Trapezoid::new(si, di.bottom, di.leftp, di.leftp));
            }
            upper_of.push(u);
            lower_of.push(l);
        }
        self.nodes[u as usize].rightp = q;
        self.nodes[l as usize].rightp = q;
        let end = self.nodes.len() as TrapId;

        // history links
        for (i, &di) in seq.iter().enumerate() {
            let node = &mut self.nodes[di as usize];
            node.destroyed_by = Some(si);
            node.children[UPPER] = Some(upper_of[i]);
            node.children[LOWER] = Some(lower_of[i]);
            if i == 0 {
                node.children[LEFT] = Some(a_id);
            }
            if i == k {
                node.children[RIGHT] = Some(b_id);
            }
        }
        for (i, &di) in seq.iter().enumerate() {
            let depth = self.nodes[di as usize].depth + 1;
            let mut kids = vec![upper_of[i], lower_of[i]];
            if i == 0 {
                kids.push(a_id);
            }
            if i == k {
                kids.push(b_id);
            }
            for c in kids {
                let t = &mut self.nodes[c as usize];
                t.depth = t.depth.max(depth);
                self.max_depth = self.max_depth.max(depth);
            }
        }

        // neighbour links, matched structurally by shared wall point and
        // shared top or bottom
        let mut old: Vec<TrapId> = Vec::new();
        for &di in &seq {
            let t = &self.nodes[di as usize];
            for x in [t.ul, t.ll, t.ur, t.lr].into_iter().flatten() {
                if self.nodes[x as usize].is_leaf() && !old.contains(&x) {
                    old.push(x);
                }
            }
        }
        let mut by_left: HashMap<Point2, Vec<TrapId>> = HashMap::new();
        let mut by_right: HashMap<Point2, Vec<TrapId>> = HashMap::new();
        for id in (base..end).chain(old.iter().copied()) {
            let t = &self.nodes[id as usize];
            by_left.entry(t.leftp).or_default().push(id);
            by_right.entry(t.rightp).or_default().push(id);
        }
        let pick = |m: &TrapMap, cands: Option<&Vec<TrapId>>, me: TrapId, top: bool| -> Option<TrapId> {
            let t = &m.nodes[me as usize];
            cands?.iter().copied().find(|&c| {
                let x = &m.nodes[c as usize];
                c != me && if top { x.top == t.top } else { x.bottom == t.bottom }
            })
        };
        for id in base..end {
            let (lp, rp) = (self.nodes[id as usize].leftp, self.nodes[id as usize].rightp);
            let ul = pick(self, by_right.get(&lp), id, true);
            let ll = pick(self, by_right.get(&lp), id, false);
            let ur = pick(self, by_left.get(&rp), id, true);
            let lr = pick(self, by_left.get(&rp), id, false);
            let t = &mut self.nodes[id as usize];
            (t.ul, t.ll, t.ur, t.lr) = (ul, ll, ur, lr);
        }
        let fresh = |m: &TrapMap, cands: Option<&Vec<TrapId>>, me: TrapId, top: bool| -> Option<TrapId> {
            pick(m, cands, me, top).filter(|&c| c >= base)
        };
        for &x in &old {
            let dead = |m: &TrapMap, v: Option<TrapId>| v.is_some_and(|v| !m.nodes[v as usize].is_leaf());
            let (lp, rp) = (self.nodes[x as usize].leftp, self.nodes[x as usize].rightp);
            let t = self.nodes[x as usize].clone();
            let mut links = (t.ul, t.ll, t.ur, t.lr);
            if dead(self, t.ul) {
                links.0 = fresh(self, by_right.get(&lp), x, true);
            }
            if dead(self, t.ll) {
                links.1 = fresh(self, by_right.get(&lp), x, false);
            }
            if dead(self, t.ur) {
                links.2 = fresh(self, by_left.get(&rp), x, true);
            }
            if dead(self, t.lr) {
                links.3 = fresh(self, by_left.get(&rp), x, false);
            }
            let t = &mut self.nodes[x as usize];
            (t.ul, t.ll, t.ur, t.lr) = links;
        }
        Ok(())
    }
}

/// Builds the map inserting segments in a random order drawn from `ctx`.
pub fn build_trap_map(segs: &[Segment2], ctx: &mut NoisyContext, params: &Params) -> Result<TrapMap> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..segs.len()).collect();
    order.shuffle(ctx.rng());
    build_with_order(segs, &order, ctx, params)
}

/// Builds the map inserting `segs[order[0]]`, `segs[order[1]]`, ...
pub fn build_with_order(
    segs: &[Segment2],
    order: &[usize],
    ctx: &mut NoisyContext,
    params: &Params,
) -> Result<TrapMap> {
    validate_segments(segs)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..segs.len()).collect::<Vec<_>>() {
        return Err(Error::StructuralError("insertion order is not a permutation".into()));
    }
    let mut map = TrapMap::empty(segs, segs.len());
    let plan = params.amplify(ctx.p(), segs.len())?;
    for &si in order {
        map.insert(si, ctx, params, plan)?;
        map.order.push(si);
    }
    Ok(map)
}

impl SearchDag for TrapMap {
    type Vertex = TrapId;

    fn contains(&self, v: TrapId) -> bool {
        (v as usize) < self.nodes.len()
    }

    fn has_edge(&self, from: TrapId, to: TrapId) -> bool {
        self.nodes[from as usize].children.contains(&Some(to))
    }

    fn is_sink(&self, v: TrapId) -> bool {
        self.nodes[v as usize].is_leaf()
    }
}

/// Seven tests per consultation: four for containment, up to three to pick
/// the child.
struct TrapOracle<'a> {
    map: &'a TrapMap,
    q: Point2,
}

impl TransitionOracle<TrapId> for TrapOracle<'_> {
    fn tests_per_consultation(&self) -> u32 {
        7
    }

    fn consult(&mut self, v: TrapId, ctx: &mut NoisyContext, plan: RepetitionPlan) -> Result<Transition<TrapId>> {
        let m = self.map;
        let q = self.q;
        let t = &m.nodes[v as usize];
        let inside = ctx.x_less(t.leftp, q, plan)?
            && ctx.x_less(q, t.rightp, plan)?
            && ctx.above(q, &m.lines[t.bottom], plan)?
            && !ctx.above(q, &m.lines[t.top], plan)?;
        if !inside {
            return Ok(Transition::OffPath);
        }
        let Some(si) = t.destroyed_by else {
            return Ok(Transition::Next(v));
        };
        let s = &m.lines[si];
        if let Some(c) = t.children[LEFT] {
            if ctx.x_less(q, s.a, plan)? {
                return Ok(Transition::Next(c));
            }
        }
        if let Some(c) = t.children[RIGHT] {
            if ctx.x_less(s.b, q, plan)? {
                return Ok(Transition::Next(c));
            }
        }
        let side = if ctx.above(q, s, plan)? { UPPER } else { LOWER };
        t.children[side]
            .map(Transition::Next)
            .ok_or_else(|| Error::StructuralError(format!("node {v} lacks a child")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: (i64, i64), b: (i64, i64)) -> Segment2 {
        Segment2::new(Point2::new(a.0, a.1), Point2::new(b.0, b.1)).unwrap()
    }

    #[test]
    fn empty_map_is_the_box() {
        let mut ctx = NoisyContext::exact();
        let m = build_trap_map(&[], &mut ctx, &Params::default()).unwrap();
        assert_eq!(m.leaves(), vec![0]);
        assert_eq!(m.query(Point2::new(5, 5), &mut ctx, &Params::default()).unwrap(), 0);
    }

    #[test]
    fn one_segment_gives_four_leaves() {
        let mut ctx = NoisyContext::exact();
        let p = Params::default();
        let m = build_trap_map(&[seg((0, 0), (10, 2))], &mut ctx, &p).unwrap();
        let leaves = m.canonical_leaves();
        assert_eq!(leaves.len(), 4);
        // above the segment's supporting line, left of both endpoints
        let leaf = m.query(Point2::new(-5, 100), &mut ctx, &p).unwrap();
        let k = m.key(leaf);
        assert_eq!((k.top, k.bottom, k.leftp, k.rightp), (Edge::BoxTop, Edge::BoxBottom, BOX_LEFT, Point2::new(0, 0)));
        let leaf = m.query(Point2::new(5, 3), &mut ctx, &p).unwrap();
        assert_eq!(m.key(leaf).bottom, Edge::Seg(0));
    }

    #[test]
    fn rejects_bad_input() {
        let mut ctx = NoisyContext::exact();
        let p = Params::default();
        let crossing = [seg((0, 0), (4, 4)), seg((1, 4), (5, 0))];
        assert_eq!(build_trap_map(&crossing, &mut ctx, &p).unwrap_err(), Error::CrossingSegments(0, 1));
        let shared_x = [seg((0, 0), (4, 4)), seg((0, 10), (5, 12))];
        assert!(matches!(build_trap_map(&shared_x, &mut ctx, &p), Err(Error::GeneralPositionViolation(_))));
    }
}
