//! Synthetic DAGs and lying oracles shared by the walk tests and the
//! acceptance suite.
#![allow(dead_code)]

use noisy_geom::noise::{NoisyContext, RepetitionPlan};
use noisy_geom::walk::{SearchDag, Transition, TransitionOracle};
use noisy_geom::Result;
use rand::Rng;

/// Directed path `0 -> 1 -> ... -> len - 1`.
pub struct PathDag {
    pub len: u64,
}

impl SearchDag for PathDag {
    type Vertex = u64;
    fn contains(&self, v: u64) -> bool {
        v < self.len
    }
    fn has_edge(&self, a: u64, b: u64) -> bool {
        b == a + 1 && b < self.len
    }
    fn is_sink(&self, v: u64) -> bool {
        v + 1 >= self.len
    }
}

/// The search path is `0..=target`; vertices past the target are off the
/// path. With probability `p_e` the oracle answers whatever hurts most:
/// a false stay before the target, an overshoot at the target, and a false
/// stay past it.
pub struct AdversarialPath {
    pub target: u64,
    pub p_e: f64,
}

impl TransitionOracle<u64> for AdversarialPath {
    fn consult(&mut self, v: u64, ctx: &mut NoisyContext, _: RepetitionPlan) -> Result<Transition<u64>> {
        let lie = ctx.rng().gen_bool(self.p_e);
        let t = self.target;
        Ok(match (v.cmp(&t), lie) {
            (std::cmp::Ordering::Less, false) => Transition::Next(v + 1),
            (std::cmp::Ordering::Equal, false) => Transition::Next(v),
            (std::cmp::Ordering::Greater, false) => Transition::OffPath,
            (std::cmp::Ordering::Less, true) => Transition::Next(v),
            (std::cmp::Ordering::Equal, true) => Transition::Next(v + 1),
            (std::cmp::Ordering::Greater, true) => Transition::Next(v),
        })
    }
}

/// Complete binary tree in heap numbering (root 1) of the given height.
pub struct HeapTree {
    pub height: u32,
}

pub fn heap_depth(v: u64) -> u32 {
    63 - v.leading_zeros()
}

impl HeapTree {
    /// Root-to-`t` path.
    pub fn path_to(&self, t: u64) -> Vec<u64> {
        let mut p: Vec<u64> = (0..=heap_depth(t)).rev().map(|s| t >> s).collect();
        p.dedup();
        p
    }

    pub fn is_ancestor_or_self(&self, a: u64, t: u64) -> bool {
        let (da, dt) = (heap_depth(a), heap_depth(t));
        da <= dt && t >> (dt - da) == a
    }
}

impl SearchDag for HeapTree {
    type Vertex = u64;
    fn contains(&self, v: u64) -> bool {
        v >= 1 && heap_depth(v) <= self.height
    }
    fn has_edge(&self, a: u64, b: u64) -> bool {
        b > 1 && b / 2 == a && self.contains(b)
    }
    fn is_sink(&self, v: u64) -> bool {
        heap_depth(v) == self.height
    }
}

/// Tree search for `target`; a lie is uniformly one of the wrong answers
/// among off-path, stay, and each child.
pub struct LyingTreeOracle<'a> {
    pub tree: &'a HeapTree,
    pub target: u64,
    pub p_e: f64,
}

impl TransitionOracle<u64> for LyingTreeOracle<'_> {
    fn consult(&mut self, v: u64, ctx: &mut NoisyContext, _: RepetitionPlan) -> Result<Transition<u64>> {
        let t = self.tree;
        let truth = if !t.is_ancestor_or_self(v, self.target) {
            Transition::OffPath
        } else if v == self.target {
            Transition::Next(v)
        } else {
            let d = heap_depth(self.target) - heap_depth(v) - 1;
            Transition::Next(self.target >> d)
        };
        if !ctx.rng().gen_bool(self.p_e) {
            return Ok(truth);
        }
        let mut options = vec![Transition::OffPath, Transition::Next(v)];
        if !t.is_sink(v) {
            options.extend([Transition::Next(2 * v), Transition::Next(2 * v + 1)]);
        }
        options.retain(|o| *o != truth);
        Ok(options[ctx.rng().gen_range(0..options.len())])
    }
}

/// Diamond chain: `0 -> {1, 2} -> 3 -> {4, 5} -> 6 ...`; the search path
/// takes the lower-numbered branch, so a lie can leave it through the other
/// branch and rejoin at the next junction.
pub struct Diamonds {
    pub junctions: u64,
}

impl Diamonds {
    pub fn target(&self) -> u64 {
        3 * self.junctions
    }

    pub fn on_path(&self, v: u64) -> bool {
        v % 3 != 2
    }
}

impl SearchDag for Diamonds {
    type Vertex = u64;
    fn contains(&self, v: u64) -> bool {
        v <= self.target()
    }
    fn has_edge(&self, a: u64, b: u64) -> bool {
        if !self.contains(b) {
            return false;
        }
        match a % 3 {
            0 => b == a + 1 || b == a + 2,
            1 => b == a + 2,
            _ => b == a + 1,
        }
    }
    fn is_sink(&self, v: u64) -> bool {
        v == self.target()
    }
}

pub struct LyingDiamonds<'a> {
    pub dag: &'a Diamonds,
    pub p_e: f64,
}

impl TransitionOracle<u64> for LyingDiamonds<'_> {
    fn consult(&mut self, v: u64, ctx: &mut NoisyContext, _: RepetitionPlan) -> Result<Transition<u64>> {
        let d = self.dag;
        let truth = if !d.on_path(v) {
            Transition::OffPath
        } else if v == d.target() {
            Transition::Next(v)
        } else if v.is_multiple_of(3) {
            Transition::Next(v + 1)
        } else {
            Transition::Next(v + 2)
        };
        if !ctx.rng().gen_bool(self.p_e) {
            return Ok(truth);
        }
        // a lie at a junction takes the wrong branch; elsewhere it stays
        // or advances
        Ok(match (truth, v % 3) {
            (Transition::Next(_), 0) if v != d.target() => Transition::Next(v + 2),
            (Transition::OffPath, _) => Transition::Next(v + 1),
            (Transition::Next(w), _) if w == v => Transition::OffPath,
            _ => Transition::Next(v),
        })
    }
}
