//! Instance generation and the line-oriented instance format.
//!
//! ```text
//! ngeo v1 points-uniform 3
//! 10 -4
//! 7 12
//! -3 5
//! ```
//!
//! Segment records are `x1 y1 x2 y2`. Generators sample uniformly at the
//! full coordinate range and reject samples until the exact general
//! position checks for the target algorithms pass.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::delaunay;
use crate::error::{Error, Result};
use crate::noise::{derive_seed, NoisyContext};
use crate::oracle;
use crate::params::Params;
use crate::general_position::find_collinear;
use crate::predicates::{
    crossing_point, orient2d, segments_cross, segments_touch, Point2, Rational, Segment2, COORD_BOUND,
};

/// Rejections tolerated before generation gives up.
pub const MAX_REJECTIONS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    PointsUniform,
    SortedAdversarial,
    SegmentsNoncrossing,
    SegmentsCrossing,
}

impl Kind {
    pub const ALL: [Kind; 4] =
        [Kind::PointsUniform, Kind::SortedAdversarial, Kind::SegmentsNoncrossing, Kind::SegmentsCrossing];

    pub fn name(self) -> &'static str {
        match self {
            Kind::PointsUniform => "points-uniform",
            Kind::SortedAdversarial => "sorted-adversarial",
            Kind::SegmentsNoncrossing => "segments-noncrossing",
            Kind::SegmentsCrossing => "segments-crossing",
        }
    }

    pub fn is_segments(self) -> bool {
        matches!(self, Kind::SegmentsNoncrossing | Kind::SegmentsCrossing)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown instance kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Points { kind: Kind, points: Vec<Point2> },
    Segments { kind: Kind, segments: Vec<Segment2> },
}

impl Instance {
    pub fn kind(&self) -> Kind {
        match self {
            Instance::Points { kind, .. } | Instance::Segments { kind, .. } => *kind,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Instance::Points { points, .. } => points.len(),
            Instance::Segments { segments, .. } => segments.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Result<&[Point2]> {
        match self {
            Instance::Points { points, .. } => Ok(points),
            _ => Err(Error::Parse("expected a point instance".into())),
        }
    }

    pub fn segments(&self) -> Result<&[Segment2]> {
        match self {
            Instance::Segments { segments, .. } => Ok(segments),
            _ => Err(Error::Parse("expected a segment instance".into())),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("ngeo v1 {} {}\n", self.kind(), self.len());
        match self {
            Instance::Points { points, .. } => {
                for p in points {
                    writeln!(out, "{} {}", p.x, p.y).unwrap();
                }
            }
            Instance::Segments { segments, .. } => {
                for s in segments {
                    writeln!(out, "{} {} {} {}", s.a.x, s.a.y, s.b.x, s.b.y).unwrap();
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Instance> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "ngeo" || h[1] != "v1" {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let kind: Kind = h[2].parse()?;
        let n: usize = h[3].parse().map_err(|_| Error::Parse(format!("bad count {:?}", h[3])))?;
        let mut rows = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|_| Error::Parse(format!("record {}: bad integer {t:?}", i + 1))))
                .collect::<Result<Vec<i64>>>()?;
            let want = if kind.is_segments() { 4 } else { 2 };
            if row.len() != want {
                return Err(Error::Parse(format!("record {} has {} fields, want {want}", i + 1, row.len())));
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::Parse(format!("header says {n} records, found {}", rows.len())));
        }
        if kind.is_segments() {
            let segments = rows
                .iter()
                .map(|r| Segment2::new(Point2::checked(r[0], r[1])?, Point2::checked(r[2], r[3])?))
                .collect::<Result<Vec<_>>>()?;
            Ok(Instance::Segments { kind, segments })
        } else {
            let points = rows.iter().map(|r| Point2::checked(r[0], r[1])).collect::<Result<Vec<_>>>()?;
            Ok(Instance::Points { kind, points })
        }
    }
}

/// Deterministic instance for `(kind, n, seed)`.
pub fn generate_instance(kind: Kind, n: usize, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, kind as u64 + 0x9e37));
    Ok(match kind {
        Kind::PointsUniform => Instance::Points { kind, points: uniform_points(n, &mut rng)? },
        Kind::SortedAdversarial => {
            let mut points = uniform_points(n, &mut rng)?;
            points.sort();
            Instance::Points { kind, points }
        }
        Kind::SegmentsNoncrossing => Instance::Segments { kind, segments: noncrossing_segments(n, &mut rng)? },
        Kind::SegmentsCrossing => Instance::Segments { kind, segments: crossing_segments(n, &mut rng)? },
    })
}

fn coord(rng: &mut impl Rng) -> i64 {
    rng.gen_range(-COORD_BOUND..=COORD_BOUND)
}

/// Points checks: distinct abscissae, no three collinear, a unique closest
/// pair, and an exact Delaunay triangulation free of cocircular quadruples.
fn uniform_points(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point2>> {
    let mut rejections = 0u64;
    let reject = |r: &mut u64| -> Result<()> {
        *r += 1;
        if *r > MAX_REJECTIONS {
            Err(Error::GenerationBudgetExceeded(*r))
        } else {
            Ok(())
        }
    };
    let mut xs = HashSet::new();
    let mut pts = Vec::with_capacity(n);
    let fresh = |rng: &mut ChaCha8Rng, xs: &mut HashSet<i64>, r: &mut u64| -> Result<Point2> {
        loop {
            let p = Point2::new(coord(rng), coord(rng));
            if xs.insert(p.x) {
                return Ok(p);
            }
            *r += 1;
            if *r > MAX_REJECTIONS {
                return Err(Error::GenerationBudgetExceeded(*r));
            }
        }
    };
    while pts.len() < n {
        let p = fresh(rng, &mut xs, &mut rejections)?;
        pts.push(p);
    }
    let mut replace = |pts: &mut Vec<Point2>, i: usize, xs: &mut HashSet<i64>, r: &mut u64| -> Result<()> {
        xs.remove(&pts[i].x);
        pts[i] = fresh(rng, xs, r)?;
        Ok(())
    };
    loop {
        if let Some((_, _, c)) = find_collinear(&pts) {
            reject(&mut rejections)?;
            replace(&mut pts, c, &mut xs, &mut rejections)?;
            continue;
        }
        if n >= 2 && oracle::closest_pair_multiplicity(&pts) > 1 {
            reject(&mut rejections)?;
            let (i, _) = oracle::closest_pair(&pts).unwrap();
            replace(&mut pts, i, &mut xs, &mut rejections)?;
            continue;
        }
        if n >= 3 {
            let mut ctx = NoisyContext::exact();
            match delaunay::build_delaunay(&pts, &mut ctx, &Params::default()) {
                Err(Error::GeneralPositionViolation(_)) => {
                    reject(&mut rejections)?;
                    let i = (rejections as usize * 7919) % n;
                    replace(&mut pts, i, &mut xs, &mut rejections)?;
                    continue;
                }
                Err(e) => return Err(e),
                Ok(_) => {}
            }
        }
        return Ok(pts);
    }
}

fn random_segment(rng: &mut ChaCha8Rng, len: f64) -> Option<Segment2> {
    let cx = coord(rng) as f64;
    let cy = coord(rng) as f64;
    let th: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let (dx, dy) = (0.5 * len * th.cos(), 0.5 * len * th.sin());
    let b = COORD_BOUND as f64;
    let (x1, y1, x2, y2) = (cx - dx, cy - dy, cx + dx, cy + dy);
    if [x1, y1, x2, y2].iter().any(|v| v.abs() > b) {
        return None;
    }
    let a = Point2::new(x1.round() as i64, y1.round() as i64);
    let c = Point2::new(x2.round() as i64, y2.round() as i64);
    if a.x == c.x {
        return None;
    }
    Segment2::new(a, c).ok()
}

/// Checks a candidate against accepted segments: fresh endpoint abscissae
/// and no endpoint on the supporting line of another segment.
fn endpoints_ok(s: &Segment2, segs: &[Segment2], xs: &HashSet<i64>) -> bool {
    if xs.contains(&s.a.x) || xs.contains(&s.b.x) {
        return false;
    }
    segs.iter().all(|t| {
        [s.a, s.b].iter().all(|&p| !orient2d(t.a, t.b, p).is_zero())
            && [t.a, t.b].iter().all(|&p| !orient2d(s.a, s.b, p).is_zero())
    })
}

fn noncrossing_segments(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Segment2>> {
    let side = 2.0 * COORD_BOUND as f64;
    let mut segs: Vec<Segment2> = Vec::with_capacity(n);
    let mut xs = HashSet::new();
    let mut rejections = 0u64;
    while segs.len() < n {
        let len = side / (n.max(1) as f64).sqrt() * rng.gen_range(0.25..1.0);
        let ok = random_segment(rng, len)
            .filter(|s| endpoints_ok(s, &segs, &xs) && segs.iter().all(|t| !segments_touch(s, t)));
        match ok {
            Some(s) => {
                xs.insert(s.a.x);
                xs.insert(s.b.x);
                segs.push(s);
            }
            None => {
                rejections += 1;
                if rejections > MAX_REJECTIONS * n.max(1) as u64 {
                    return Err(Error::GenerationBudgetExceeded(rejections));
                }
            }
        }
    }
    Ok(segs)
}

/// Segments of length `sqrt(5 pi / (2 n))` times the box side, which gives
/// about `2.5 n` crossings. All event abscissae (endpoints and crossings)
/// are distinct.
fn crossing_segments(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Segment2>> {
    let side = 2.0 * COORD_BOUND as f64;
    let len = side * (5.0 * std::f64::consts::PI / (2.0 * n.max(1) as f64)).sqrt().min(0.7);
    let mut segs: Vec<Segment2> = Vec::with_capacity(n);
    let mut xs = HashSet::new();
    let mut events: HashSet<Rational> = HashSet::new();
    let mut rejections = 0u64;
    'outer: while segs.len() < n {
        let mut reject = || -> Result<()> {
            rejections += 1;
            if rejections > MAX_REJECTIONS * n.max(1) as u64 {
                return Err(Error::GenerationBudgetExceeded(rejections));
            }
            Ok(())
        };
        let Some(s) = random_segment(rng, len) else {
            reject()?;
            continue;
        };
        if !endpoints_ok(&s, &segs, &xs)
            || events.contains(&Rational::integer(s.a.x))
            || events.contains(&Rational::integer(s.b.x))
        {
            reject()?;
            continue;
        }
        let mut fresh = HashSet::new();
        for t in &segs {
            if segments_touch(&s, t) && !segments_cross(&s, t) {
                reject()?;
                continue 'outer;
            }
            if let Some(c) = crossing_point(&s, t) {
                if events.contains(&c.x) || !fresh.insert(c.x) {
                    reject()?;
                    continue 'outer;
                }
            }
        }
        xs.insert(s.a.x);
        xs.insert(s.b.x);
        events.insert(Rational::integer(s.a.x));
        events.insert(Rational::integer(s.b.x));
        events.extend(fresh);
        segs.push(s);
    }
    Ok(segs)
}
