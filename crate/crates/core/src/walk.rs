//! Path-guided pushdown random walks.
//!
//! A walk searches a DAG for the end of an implicit path using a transition
//! oracle that may lie. The walk keeps a stack holding an actual walk in the
//! DAG; each consultation either backtracks, pushes evidence that the
//! current vertex is the target, undoes such evidence, or advances. The walk
//! stops once one vertex has accumulated `threshold` consecutive copies on
//! top of the stack.
//!
//! The engine never looks at geometry. Oracles build their answers out of
//! noisy primitives drawn from a [`NoisyContext`], amplified with the
//! per-primitive [`RepetitionPlan`] the engine hands them so that a whole
//! consultation errs with probability at most `p_e_max`.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{consultation_plan, NoisyContext, RepetitionPlan};

/// Read-only view of the DAG being searched. Structural queries are exact.
pub trait SearchDag {
    type Vertex: Copy + Eq + Debug;

    fn contains(&self, v: Self::Vertex) -> bool;

    fn has_edge(&self, from: Self::Vertex, to: Self::Vertex) -> bool;

    /// True if `v` has no outgoing edges.
    fn is_sink(&self, v: Self::Vertex) -> bool;
}

/// Answer of one oracle consultation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition<V> {
    /// The queried vertex is not on the search path.
    OffPath,
    /// The vertex is on the path and this is the next vertex; naming the
    /// vertex itself claims it is the target.
    Next(V),
}

/// A possibly lying transition oracle.
pub trait TransitionOracle<V> {
    /// Number of noisy primitives one consultation may evaluate. The engine
    /// splits the per-consultation error budget across them.
    fn tests_per_consultation(&self) -> u32 {
        1
    }

    fn consult(&mut self, v: V, ctx: &mut NoisyContext, plan: RepetitionPlan) -> Result<Transition<V>>;
}

/// Walk parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Failure tolerance.
    pub epsilon: f64,
    /// Per-consultation error the engine amplifies oracles down to.
    pub p_e_max: f64,
    /// Upper bound on the length of the search path.
    pub path_hint: u64,
    pub budget_factor: f64,
    pub threshold_factor: f64,
}

pub const DEFAULT_P_E_MAX: f64 = 1.0 / 16.0;
pub const DEFAULT_BUDGET_FACTOR: f64 = 12.0;
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 3.0;

impl WalkConfig {
    pub fn new(epsilon: f64, path_hint: u64) -> Self {
        WalkConfig {
            epsilon,
            p_e_max: DEFAULT_P_E_MAX,
            path_hint,
            budget_factor: DEFAULT_BUDGET_FACTOR,
            threshold_factor: DEFAULT_THRESHOLD_FACTOR,
        }
    }

    /// Tolerance `n^-c`.
    pub fn whp(n: usize, c: f64, path_hint: u64) -> Self {
        WalkConfig::new(whp_epsilon(n, c), path_hint)
    }

    pub fn with_threshold_factor(mut self, beta: f64) -> Self {
        self.threshold_factor = beta;
        self
    }

    pub fn with_budget_factor(mut self, gamma: f64) -> Self {
        self.budget_factor = gamma;
        self
    }

    fn log_inv_eps(&self) -> f64 {
        (1.0 / self.epsilon).log2()
    }

    /// Repetition count at which the walk stops.
    pub fn threshold(&self) -> u32 {
        ((self.threshold_factor * self.log_inv_eps()).ceil() as u32).max(1)
    }

    /// Maximum number of consultations per attempt.
    pub fn budget(&self) -> u64 {
        (self.budget_factor * (self.path_hint as f64 + self.log_inv_eps())).ceil() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidTarget(self.epsilon));
        }
        if !(self.p_e_max > 0.0 && self.p_e_max < 1.0 / 15.0) {
            return Err(Error::InvalidNoiseLevel(self.p_e_max));
        }
        Ok(())
    }
}

/// `n^-c`, clamped so tiny instances still get a meaningful tolerance.
pub fn whp_epsilon(n: usize, c: f64) -> f64 {
    (n.max(2) as f64).powf(-c).min(0.25)
}

/// Result of a terminated walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkOutcome<V> {
    pub target: V,
    /// Final stack, bottom first, with repetition counts.
    pub stack: Vec<(V, u32)>,
    pub consultations: u64,
    pub forward_moves: u64,
    pub stay_pushes: u64,
    pub backtracks: u64,
    pub rejected: u64,
}

impl<V: Copy + Eq> WalkOutcome<V> {
    /// The stack with consecutive repetitions collapsed.
    pub fn path(&self) -> Vec<V> {
        let mut out: Vec<V> = Vec::with_capacity(self.stack.len());
        for &(v, _) in &self.stack {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        out
    }
}

/// Runs one walk attempt from `start`.
pub fn run_walk<D, O>(
    dag: &D,
    oracle: &mut O,
    start: D::Vertex,
    cfg: &WalkConfig,
    ctx: &mut NoisyContext,
) -> Result<WalkOutcome<D::Vertex>>
where
    D: SearchDag,
    O: TransitionOracle<D::Vertex>,
{
    cfg.validate()?;
    if !dag.contains(start) {
        return Err(Error::StructuralError(format!("start {start:?} is not in the dag")));
    }
    if dag.is_sink(start) {
        return Err(Error::StructuralError(format!("start {start:?} has no successors")));
    }
    let plan = consultation_plan(ctx.p(), oracle.tests_per_consultation(), cfg.p_e_max)?;
    let threshold = cfg.threshold();
    let budget = cfg.budget();
    ctx.stats_mut().walks += 1;

    let mut stack: Vec<(D::Vertex, u32)> = Vec::new();
    let mut v = start;
    let mut out = WalkOutcome {
        target: start,
        stack: Vec::new(),
        consultations: 0,
        forward_moves: 0,
        stay_pushes: 0,
        backtracks: 0,
        rejected: 0,
    };

    loop {
        if out.consultations >= budget {
            ctx.stats_mut().consultations += out.consultations;
            ctx.stats_mut().stay_pushes += out.stay_pushes;
            return Err(Error::BudgetExhausted { budget, retries: 0 });
        }
        out.consultations += 1;
        match oracle.consult(v, ctx, plan)? {
            Transition::OffPath => {
                if v != start {
                    v = stack.pop().map_or(start, |(u, _)| u);
                    out.backtracks += 1;
                }
            }
            Transition::Next(w) if w == v => {
                let count = match stack.last() {
                    Some(&(top, c)) if top == v => c + 1,
                    _ => 1,
                };
                stack.push((v, count));
                out.stay_pushes += 1;
                if count >= threshold {
                    out.target = v;
                    break;
                }
            }
            Transition::Next(w) => {
                if !dag.has_edge(v, w) {
                    out.rejected += 1;
                    continue;
                }
                if stack.last().map(|e| e.0) == Some(v) {
                    stack.pop();
                    out.backtracks += 1;
                } else {
                    stack.push((v, 1));
                    v = w;
                    out.forward_moves += 1;
                }
            }
        }
    }
    ctx.stats_mut().consultations += out.consultations;
    ctx.stats_mut().stay_pushes += out.stay_pushes;
    out.stack = stack;
    Ok(out)
}

/// Default number of restarts after a budget overrun.
pub const MAX_RETRIES: u32 = 3;

/// Runs a walk, restarting with fresh noise (the context's stream simply
/// continues) on budget overruns, at most `max_retries` times.
pub fn run_walk_with_retries<D, O>(
    dag: &D,
    oracle: &mut O,
    start: D::Vertex,
    cfg: &WalkConfig,
    ctx: &mut NoisyContext,
    max_retries: u32,
) -> Result<WalkOutcome<D::Vertex>>
where
    D: SearchDag,
    O: TransitionOracle<D::Vertex>,
{
    let mut retries = 0;
    loop {
        match run_walk(dag, oracle, start, cfg, ctx) {
            Err(Error::BudgetExhausted { budget, .. }) => {
                if retries == max_retries {
                    return Err(Error::BudgetExhausted { budget, retries });
                }
                retries += 1;
                ctx.stats_mut().retries += 1;
            }
            other => return other,
        }
    }
}

/// Walk on a rooted tree from its root. On success the collapsed stack is
/// the unique root-to-target path.
pub fn run_walk_on_tree<D, O>(
    tree: &D,
    oracle: &mut O,
    root: D::Vertex,
    cfg: &WalkConfig,
    ctx: &mut NoisyContext,
) -> Result<(D::Vertex, Vec<D::Vertex>)>
where
    D: SearchDag,
    O: TransitionOracle<D::Vertex>,
{
    let out = run_walk_with_retries(tree, oracle, root, cfg, ctx, MAX_RETRIES)?;
    let path = out.path();
    Ok((out.target, path))
}

/// Outcome of a generalized walk.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedOutcome<V> {
    /// Terminal vertex, `None` if `max_steps` ran out first.
    pub target: Option<V>,
    pub steps: u64,
}

/// The tempting generalization of the walk: identical except that an
/// advance answer after stays moves on instead of undoing a stay. Used only
/// to exhibit its slow termination.
pub fn run_generalized_walk<D, O>(
    dag: &D,
    oracle: &mut O,
    start: D::Vertex,
    threshold: u32,
    max_steps: u64,
    ctx: &mut NoisyContext,
) -> Result<GeneralizedOutcome<D::Vertex>>
where
    D: SearchDag,
    O: TransitionOracle<D::Vertex>,
{
    if !dag.contains(start) {
        return Err(Error::StructuralError(format!("start {start:?} is not in the dag")));
    }
    let plan = RepetitionPlan::SINGLE;
    let mut stack: Vec<(D::Vertex, u32)> = Vec::new();
    let mut v = start;
    let mut steps = 0;
    while steps < max_steps {
        steps += 1;
        let count = match stack.last() {
            Some(&(top, c)) if top == v => c + 1,
            _ => 1,
        };
        match oracle.consult(v, ctx, plan)? {
            Transition::OffPath => {
                if v != start {
                    v = stack.pop().map_or(start, |(u, _)| u);
                }
            }
            Transition::Next(w) if w == v => {
                stack.push((v, count));
                if count >= threshold {
                    return Ok(GeneralizedOutcome { target: Some(v), steps });
                }
            }
            Transition::Next(w) => {
                if dag.has_edge(v, w) {
                    stack.push((v, count));
                    v = w;
                }
            }
        }
    }
    Ok(GeneralizedOutcome { target: None, steps })
}
