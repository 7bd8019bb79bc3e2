//! A search problem on which the generalized walk (valid and goal nodes
//! instead of a single path) is slow: a complete binary tree whose leftmost
//! root-to-leaf path is valid, with goal marks alternating along it, and an
//! oracle that at goal nodes sometimes advances anyway.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::{NoisyContext, RepetitionPlan};
use crate::walk::{run_generalized_walk, SearchDag, Transition, TransitionOracle};
use crate::Params;

/// Probability that a valid non-leaf node answers like an exact oracle.
pub const TRUTHFUL: f64 = 14.0 / 15.0;

/// Complete binary tree in heap numbering, root 1.
#[derive(Debug, Clone, Copy)]
pub struct BinaryTree {
    pub height: u32,
}

pub fn depth(v: u64) -> u32 {
    63 - v.leading_zeros()
}

impl BinaryTree {
    pub fn is_valid(&self, v: u64) -> bool {
        v.is_power_of_two()
    }

    pub fn is_goal(&self, v: u64) -> bool {
        self.is_valid(v) && (depth(v) % 2 == 1 || depth(v) == self.height)
    }

    pub fn leaf_goal(&self) -> u64 {
        1 << self.height
    }

    /// Goal nodes strictly above the leaf.
    pub fn inner_goals(&self) -> u32 {
        (1..self.height).filter(|d| d % 2 == 1).count() as u32
    }
}

impl SearchDag for BinaryTree {
    type Vertex = u64;

    fn contains(&self, v: u64) -> bool {
        v >= 1 && depth(v) <= self.height
    }

    fn has_edge(&self, a: u64, b: u64) -> bool {
        self.contains(b) && b / 2 == a && b > 1
    }

    fn is_sink(&self, v: u64) -> bool {
        depth(v) == self.height
    }
}

/// The three-branch oracle: exact with probability 14/15 less the other
/// two branches, the valid child with probability `advance`, the invalid
/// child with probability `stray`. Invalid nodes and leaves are exact.
#[derive(Debug, Clone, Copy)]
pub struct ThreeBranchOracle {
    pub tree: BinaryTree,
    pub advance: f64,
    pub stray: f64,
}

impl TransitionOracle<u64> for ThreeBranchOracle {
    fn consult(&mut self, v: u64, ctx: &mut NoisyContext, _: RepetitionPlan) -> Result<Transition<u64>> {
        let t = &self.tree;
        if !t.is_valid(v) {
            return Ok(Transition::OffPath);
        }
        if t.is_sink(v) {
            return Ok(Transition::Next(v));
        }
        let r: f64 = ctx.rng().gen();
        let next = if r < self.stray {
            2 * v + 1
        } else if r < self.stray + self.advance || !t.is_goal(v) {
            2 * v
        } else {
            v
        };
        Ok(Transition::Next(next))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleConfig {
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    /// Constant in the advance probability `K log log n / log n`.
    pub k: f64,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub n: u64,
    pub height: u32,
    pub k: f64,
    pub advance: f64,
    pub stray: f64,
    pub threshold: u32,
    pub trials: u64,
    pub mean_steps: f64,
    /// `mean_steps / (log^2 n / log log n)`, logs base 2.
    pub normalized: f64,
    /// The path walk's budget `3 (log n + log 1/eps)` for comparison.
    pub path_budget: f64,
    pub leaf_rate: f64,
    pub unterminated: u64,
    /// Chance that one goal node collects `threshold` stays before the
    /// oracle advances.
    pub escape_estimate: f64,
    pub escape_limit: f64,
}

/// `K log log n / log n`, logs base 2.
pub fn advance_probability(n: u64, k: f64) -> f64 {
    let l = (n as f64).log2();
    k * l.log2() / l
}

pub fn counterexample_walk(cfg: &CounterexampleConfig) -> Result<CounterexampleReport> {
    if cfg.n < 256 || !cfg.n.is_power_of_two() {
        return Err(Error::InvalidConfig(format!("n = {} must be a power of two >= 256", cfg.n)));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    let height = cfg.n.trailing_zeros();
    let advance = advance_probability(cfg.n, cfg.k);
    let stray = 1.0 / 15.0 - advance;
    if !(0.0..=1.0 / 15.0).contains(&advance) {
        return Err(Error::InvalidConfig(format!("advance probability {advance} outside [0, 1/15]")));
    }
    run_three_branch(cfg, height, advance, stray.max(0.0))
}

/// Runs the scenario with explicit branch probabilities.
pub fn run_three_branch(
    cfg: &CounterexampleConfig,
    height: u32,
    advance: f64,
    stray: f64,
) -> Result<CounterexampleReport> {
    let tree = BinaryTree { height };
    let wc = cfg.params.walk_config(cfg.n as usize, height as u64);
    let threshold = wc.threshold();
    let max_steps = 1000 * (threshold as u64 + height as u64);
    let outcomes: Vec<(u64, Option<u64>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut ctx = NoisyContext::for_trial(0.0, cfg.seed, trial)?;
            let mut oracle = ThreeBranchOracle { tree, advance, stray };
            let out = run_generalized_walk(&tree, &mut oracle, 1, threshold, max_steps, &mut ctx)?;
            Ok((out.steps, out.target))
        })
        .collect::<Result<_>>()?;
    let mut steps = 0u64;
    let mut leaf = 0u64;
    let mut unterminated = 0u64;
    for &(s, target) in &outcomes {
        steps += s;
        match target {
            Some(t) => leaf += u64::from(t == tree.leaf_goal()),
            None => unterminated += 1,
        }
    }
    let l = (cfg.n as f64).log2();
    let mean_steps = steps as f64 / cfg.trials as f64;
    let escape_estimate = (TRUTHFUL / (TRUTHFUL + advance)).powi(threshold as i32);
    Ok(CounterexampleReport {
        n: cfg.n,
        height,
        k: cfg.k,
        advance,
        stray,
        threshold,
        trials: cfg.trials,
        mean_steps,
        normalized: mean_steps / (l * l / l.log2()),
        path_budget: 3.0 * (l + (1.0 / wc.epsilon).log2()),
        leaf_rate: leaf as f64 / cfg.trials as f64,
        unterminated,
        escape_estimate,
        escape_limit: 1.0 / (2.0 * l),
    })
}
