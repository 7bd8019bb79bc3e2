//! Plane sweeps on noisy comparisons: segment intersection with optional
//! vertical decomposition, and closest pair.
//!
//! Both keep their event queue and status in [`OrderedTree`]s. Every search
//! in a tree is a noisy walk; everything that follows from the tree shape
//! (neighbours, deletion by handle, swapping two adjacent entries) is
//! structural and costs no comparisons. Decisions taken outside a tree are
//! majority votes amplified to error `n^-(c+1)`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::bst::{noisy_sort, NodeId, OrderedTree};
use crate::error::{gp, Error, Result};
use crate::general_position::validate_sweep_segments;
use crate::noise::NoisyContext;
use crate::predicates::{
    above_segment, crossing_point, dist2, line_intersection, segments_cross, Point2, RatPoint, Rational, Segment2,
    Sign, COORD_BOUND,
};
use crate::trapezoid::{Edge, TrapKey, BOX};
use crate::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Left(usize),
    Cross(usize, usize),
    Right(usize),
}

/// A sweep event, ordered by its exact position and then its kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SweepEvent {
    pub at: RatPoint,
    pub kind: EventKind,
}

/// A cell of the vertical decomposition; walls may sit at crossings, so
/// the defining points are rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SweepTrapezoid {
    pub top: Edge,
    pub bottom: Edge,
    pub leftp: RatPoint,
    pub rightp: RatPoint,
}

impl From<TrapKey> for SweepTrapezoid {
    fn from(k: TrapKey) -> Self {
        SweepTrapezoid { top: k.top, bottom: k.bottom, leftp: k.leftp.into(), rightp: k.rightp.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SweepStats {
    pub events: u64,
    pub pair_checks: u64,
    pub status_checks: u64,
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    /// `(i, j, point)` with `i < j`, in the order the sweep met them.
    pub crossings: Vec<(usize, usize, RatPoint)>,
    /// Sorted decomposition cells, present when requested.
    pub trapezoids: Option<Vec<SweepTrapezoid>>,
    pub stats: SweepStats,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    pub emit_trapezoids: bool,
    /// Re-check the status against the exact vertical order after every
    /// event and fail on the first mismatch.
    pub instrumented: bool,
}

/// Exact order of two active segments just right of abscissa `x`.
pub fn order_right_of(segs: &[Segment2], u: usize, v: usize, x: Rational) -> Ordering {
    if u == v {
        return Ordering::Equal;
    }
    let (su, sv) = (&segs[u], &segs[v]);
    let below = if su.left().x >= sv.left().x {
        above_segment(su.left(), sv) == Sign::Negative
    } else {
        above_segment(sv.left(), su) == Sign::Positive
    };
    let flipped = crossing_point(su, sv).is_some_and(|c| c.x <= x);
    if below != flipped {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Reports every crossing among `segs` in sweep order.
pub fn intersect_segments(
    segs: &[Segment2],
    ctx: &mut NoisyContext,
    params: &Params,
    opts: SweepOptions,
) -> Result<SweepResult> {
    validate_sweep_segments(segs)?;
    Sweep::new(segs, ctx, params, opts)?.run()
}

type Gap = (Option<usize>, Option<usize>);

struct Sweep<'a> {
    segs: &'a [Segment2],
    ctx: &'a mut NoisyContext,
    params: &'a Params,
    opts: SweepOptions,
    plan: crate::noise::RepetitionPlan,
    events: OrderedTree<SweepEvent>,
    status: OrderedTree<usize>,
    node_of: Vec<Option<NodeId>>,
    seen: HashSet<(usize, usize)>,
    gaps: HashMap<Gap, RatPoint>,
    traps: Vec<SweepTrapezoid>,
    out: SweepResult,
}

impl<'a> Sweep<'a> {
    fn new(segs: &'a [Segment2], ctx: &'a mut NoisyContext, params: &'a Params, opts: SweepOptions) -> Result<Self> {
        let n = segs.len();
        let plan = params.amplify(ctx.p(), n)?;
        Ok(Sweep {
            segs,
            ctx,
            params,
            opts,
            plan,
            events: OrderedTree::with_scale(2 * n),
            status: OrderedTree::with_scale(n),
            node_of: vec![None; n],
            seen: HashSet::new(),
            gaps: HashMap::new(),
            traps: Vec::new(),
            out: SweepResult::default(),
        })
    }

    fn push_event(&mut self, ev: SweepEvent) -> Result<()> {
        let order = |a: &SweepEvent, b: &SweepEvent| Ok(a.cmp(b));
        self.events.insert(ev, &order, self.ctx, self.params)?;
        Ok(())
    }

    fn run(mut self) -> Result<SweepResult> {
        for (i, s) in self.segs.iter().enumerate() {
            self.push_event(SweepEvent { at: s.left().into(), kind: EventKind::Left(i) })?;
            self.push_event(SweepEvent { at: s.right().into(), kind: EventKind::Right(i) })?;
        }
        self.open((None, None), Point2::new(-BOX, 0).into());
        while !self.events.is_empty() {
            let ev = self.events.pq_extract_min()?;
            self.out.stats.events += 1;
            match ev.kind {
                EventKind::Left(i) => self.left(i, ev.at)?,
                EventKind::Right(i) => self.right(i, ev.at)?,
                EventKind::Cross(a, b) => self.cross(a, b, ev.at)?,
            }
            if self.opts.instrumented {
                self.check_status(ev.at.x)?;
            }
        }
        self.close((None, None), Point2::new(BOX, 0).into())?;
        if self.opts.emit_trapezoids {
            self.traps.sort();
            self.out.trapezoids = Some(std::mem::take(&mut self.traps));
        }
        Ok(self.out)
    }

    fn seg_at(&self, id: Option<NodeId>) -> Option<usize> {
        id.map(|v| *self.status.key(v))
    }

    fn left(&mut self, i: usize, at: RatPoint) -> Result<()> {
        let segs = self.segs;
        let order = |q: &usize, k: &usize| match above_segment(segs[*q].left(), &segs[*k]) {
            Sign::Positive => Ok(Ordering::Greater),
            Sign::Negative => Ok(Ordering::Less),
            Sign::Zero => Err(gp(format!("left endpoint of {q} on segment {k}"))),
        };
        let id = self.status.insert(i, &order, self.ctx, self.params)?;
        self.node_of[i] = Some(id);
        let below = self.seg_at(self.status.predecessor(id));
        let above = self.seg_at(self.status.successor(id));
        self.close((below, above), at)?;
        self.open((below, Some(i)), at);
        self.open((Some(i), above), at);
        if let Some(b) = below {
            self.check_pair(b, i)?;
        }
        if let Some(a) = above {
            self.check_pair(i, a)?;
        }
        Ok(())
    }

    fn right(&mut self, i: usize, at: RatPoint) -> Result<()> {
        let id = self.node_of[i].take().ok_or_else(|| Error::StructuralError(format!("segment {i} is not active")))?;
        let below = self.seg_at(self.status.predecessor(id));
        let above = self.seg_at(self.status.successor(id));
        self.status.delete(id)?;
        self.close((below, Some(i)), at)?;
        self.close((Some(i), above), at)?;
        self.open((below, above), at);
        if let (Some(b), Some(a)) = (below, above) {
            self.check_pair(b, a)?;
        }
        Ok(())
    }

    fn cross(&mut self, s: usize, t: usize, at: RatPoint) -> Result<()> {
        let missing = || Error::StructuralError("crossing of an inactive segment".into());
        let (ns, nt) = (self.node_of[s].ok_or_else(missing)?, self.node_of[t].ok_or_else(missing)?);
        let (i, j) = (s.min(t), s.max(t));
        self.out.crossings.push((i, j, at));
        // s is the lower one before the crossing
        let below = self.seg_at(self.status.predecessor(ns));
        let above = self.seg_at(self.status.successor(nt));
        self.close((below, Some(s)), at)?;
        self.close((Some(s), Some(t)), at)?;
        self.close((Some(t), above), at)?;
        self.open((below, Some(t)), at);
        self.open((Some(t), Some(s)), at);
        self.open((Some(s), above), at);
        self.status.swap_keys(ns, nt)?;
        self.node_of[s] = Some(nt);
        self.node_of[t] = Some(ns);
        if let Some(b) = below {
            self.check_pair(b, t)?;
        }
        if let Some(a) = above {
            self.check_pair(s, a)?;
        }
        Ok(())
    }

    /// `lower` and `upper` just became adjacent; schedule their crossing
    /// unless this pair was already scheduled.
    fn check_pair(&mut self, lower: usize, upper: usize) -> Result<()> {
        let key = (lower.min(upper), lower.max(upper));
        if self.seen.contains(&key) {
            return Ok(());
        }
        self.out.stats.pair_checks += 1;
        let (a, b) = (&self.segs[lower], &self.segs[upper]);
        if !self.ctx.vote(segments_cross(a, b), self.plan) {
            return Ok(());
        }
        let Some(at) = line_intersection(a, b) else { return Ok(()) };
        self.seen.insert(key);
        self.push_event(SweepEvent { at, kind: EventKind::Cross(lower, upper) })
    }

    fn open(&mut self, gap: Gap, at: RatPoint) {
        if self.opts.emit_trapezoids {
            self.gaps.insert(gap, at);
        }
    }

    fn close(&mut self, gap: Gap, at: RatPoint) -> Result<()> {
        if !self.opts.emit_trapezoids {
            return Ok(());
        }
        let leftp = self
            .gaps
            .remove(&gap)
            .ok_or_else(|| Error::StructuralError(format!("no open cell between {:?} and {:?}", gap.0, gap.1)))?;
        let bottom = gap.0.map_or(Edge::BoxBottom, Edge::Seg);
        let top = gap.1.map_or(Edge::BoxTop, Edge::Seg);
        self.traps.push(SweepTrapezoid { top, bottom, leftp, rightp: at });
        Ok(())
    }

    fn check_status(&mut self, x: Rational) -> Result<()> {
        self.out.stats.status_checks += 1;
        let keys: Vec<usize> = self.status.keys().copied().collect();
        let active = self
            .segs
            .iter()
            .filter(|s| Rational::integer(s.left().x) <= x && x < Rational::integer(s.right().x))
            .count();
        if keys.len() != active {
            return Err(Error::StructuralError(format!("{} segments in the status, {active} active", keys.len())));
        }
        for w in keys.windows(2) {
            if order_right_of(self.segs, w[0], w[1], x) != Ordering::Less {
                return Err(Error::StructuralError(format!("status order wrong at x = {x}: {} above {}", w[0], w[1])));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClosestPairStats {
    pub sort_calls: u64,
    pub candidates: u64,
    pub deactivations: u64,
}

/// Number of y-table neighbours examined on each side of a new point.
pub const NEIGHBOURS: usize = 7;

/// Closest pair of distinct points, returned in lexicographic order.
pub fn closest_pair(pts: &[Point2], ctx: &mut NoisyContext, params: &Params) -> Result<(Point2, Point2)> {
    closest_pair_with_stats(pts, ctx, params).map(|(p, _)| p)
}

pub fn closest_pair_with_stats(
    pts: &[Point2],
    ctx: &mut NoisyContext,
    params: &Params,
) -> Result<((Point2, Point2), ClosestPairStats)> {
    let n = pts.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut seen = HashSet::with_capacity(n);
    for &p in pts {
        for c in [p.x, p.y] {
            if c.abs() > COORD_BOUND {
                return Err(Error::CoordinateOutOfRange(c));
            }
        }
        if !seen.insert(p) {
            return Err(gp(format!("duplicate point {p}")));
        }
    }
    let mut stats = ClosestPairStats::default();
    let c0 = ctx.calls();
    let idx: Vec<usize> = (0..n).collect();
    let by_x = |a: &usize, b: &usize| Ok(pts[*a].cmp(&pts[*b]));
    let sorted = noisy_sort(&idx, &by_x, ctx, params)?;
    stats.sort_calls = ctx.calls() - c0;
    let plan = params.amplify(ctx.p(), n)?;

    let by_y = |a: &usize, b: &usize| Ok((pts[*a].y, pts[*a].x).cmp(&(pts[*b].y, pts[*b].x)));
    let mut table: OrderedTree<usize> = OrderedTree::with_scale(n);
    let mut handle: Vec<Option<NodeId>> = vec![None; n];
    let mut best: Option<(usize, usize)> = None;
    let mut tail = 0;
    for (k, &q) in sorted.iter().enumerate() {
        let pq = pts[q];
        // retire old points whose horizontal gap already reaches the best
        // distance, oldest first
        if let Some((a, b)) = best {
            let d = dist2(pts[a], pts[b]);
            while tail < k {
                let old = sorted[tail];
                let dx = (pq.x - pts[old].x) as i128;
                if !ctx.vote(dx * dx >= d, plan) {
                    break;
                }
                if let Some(h) = handle[old].take() {
                    table.delete(h)?;
                    stats.deactivations += 1;
                }
                tail += 1;
            }
        }
        let h = table.insert(q, &by_y, ctx, params)?;
        handle[q] = Some(h);
        let mut cands = Vec::with_capacity(2 * NEIGHBOURS);
        let mut cur = h;
        for _ in 0..NEIGHBOURS {
            match table.predecessor(cur) {
                Some(v) => {
                    cands.push(*table.key(v));
                    cur = v;
                }
                None => break,
            }
        }
        cur = h;
        for _ in 0..NEIGHBOURS {
            match table.successor(cur) {
                Some(v) => {
                    cands.push(*table.key(v));
                    cur = v;
                }
                None => break,
            }
        }
        for r in cands {
            stats.candidates += 1;
            best = match best {
                None => Some((q, r)),
                Some((a, b)) if ctx.dist_less(pq, pts[r], pts[a], pts[b], plan) => Some((q, r)),
                keep => keep,
            };
        }
    }
    let (a, b) = best.ok_or(Error::EmptyStructure)?;
    let (a, b) = (pts[a].min(pts[b]), pts[a].max(pts[b]));
    Ok(((a, b), stats))
}
