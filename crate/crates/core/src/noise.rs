//! The noise layer.
//!
//! [`NoisyContext`] is the single gate through which algorithms read
//! geometry. Each evaluation computes the exact answer and independently
//! negates it with probability `p`. Repetition plans implement majority
//! amplification with an exact binomial-tail criterion.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{gp, Error, Result};
use crate::predicates::{self, symbolic, Point2, Segment2, Sign};

/// Counters accumulated by a context over its lifetime.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseStats {
    /// Noisy primitive evaluations (one per underlying kernel evaluation).
    pub calls: u64,
    /// Transition-oracle consultations made by walks.
    pub consultations: u64,
    /// Consultations that pushed the current vertex onto its own copy.
    pub stay_pushes: u64,
    pub walks: u64,
    /// Walk restarts after a budget overrun.
    pub retries: u64,
}

impl NoiseStats {
    pub fn merge(&mut self, o: &NoiseStats) {
        self.calls += o.calls;
        self.consultations += o.consultations;
        self.stay_pushes += o.stay_pushes;
        self.walks += o.walks;
        self.retries += o.retries;
    }
}

/// SplitMix64 finalizer, used to derive independent per-trial seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `index` under a master seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// A seeded stream of independent coin flips with error probability `p`.
#[derive(Debug, Clone)]
pub struct NoisyContext {
    p: f64,
    seed: u64,
    flip_below: u64,
    rng: ChaCha8Rng,
    stats: NoiseStats,
}

impl NoisyContext {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::InvalidNoiseLevel(p));
        }
        let flip_below = (p * 18_446_744_073_709_551_616.0) as u64;
        Ok(NoisyContext {
            p,
            seed,
            flip_below,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: NoiseStats::default(),
        })
    }

    /// A noiseless context; every evaluation returns the exact answer.
    pub fn exact() -> Self {
        NoisyContext::new(0.0, 0).expect("p = 0 is valid")
    }

    /// Context for trial `trial` of an experiment seeded with `seed`.
    pub fn for_trial(p: f64, seed: u64, trial: u64) -> Result<Self> {
        NoisyContext::new(p, derive_seed(seed, trial))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn calls(&self) -> u64 {
        self.stats.calls
    }

    pub fn stats(&self) -> NoiseStats {
        self.stats
    }

    pub(crate) fn stats_mut(&mut self) -> &mut NoiseStats {
        &mut self.stats
    }

    /// Randomness for algorithmic choices (insertion orders). Drawn from the
    /// same stream, so a run is fully determined by its seed.
    pub fn rng(&mut self) -> &mut impl Rng {
        &mut self.rng
    }

    #[inline]
    fn lie(&mut self) -> bool {
        self.flip_below != 0 && self.rng.next_u64() < self.flip_below
    }

    /// One noisy evaluation of a primitive whose exact answer is `exact`.
    #[inline]
    pub fn noisy_eval(&mut self, exact: bool) -> bool {
        self.stats.calls += 1;
        exact ^ self.lie()
    }

    /// Majority of `plan.reps` independent noisy evaluations of `exact`.
    pub fn vote(&mut self, exact: bool, plan: RepetitionPlan) -> bool {
        let r = plan.reps as u64;
        self.stats.calls += r;
        if self.flip_below == 0 {
            return exact;
        }
        let mut wrong = 0u32;
        for _ in 0..plan.reps {
            if self.rng.next_u64() < self.flip_below {
                wrong += 1;
            }
        }
        if 2 * wrong > plan.reps {
            !exact
        } else {
            exact
        }
    }

    /// Evaluates the deferred predicate once exactly, then votes on it.
    pub fn majority_vote<F>(&mut self, predicate: F, plan: RepetitionPlan) -> Result<bool>
    where
        F: FnOnce() -> Result<bool>,
    {
        let exact = predicate()?;
        Ok(self.vote(exact, plan))
    }

    /// Is `c` strictly to the left of the directed line `a -> b`?
    pub fn ccw(&mut self, a: Point2, b: Point2, c: Point2, plan: RepetitionPlan) -> Result<bool> {
        let s = predicates::orient2d(a, b, c);
        if s.is_zero() {
            return Err(gp(format!("collinear {a} {b} {c}")));
        }
        Ok(self.vote(s == Sign::Positive, plan))
    }

    /// `ccw` over points that may lie at infinity.
    pub fn ccw_sym(
        &mut self,
        a: &symbolic::SymPoint,
        b: &symbolic::SymPoint,
        c: &symbolic::SymPoint,
        plan: RepetitionPlan,
    ) -> Result<bool> {
        let s = symbolic::orient2d(a, b, c);
        if s.is_zero() {
            return Err(gp("collinear symbolic triple"));
        }
        Ok(self.vote(s == Sign::Positive, plan))
    }

    /// Is `q` strictly above the supporting line of `s`?
    pub fn above(&mut self, q: Point2, s: &Segment2, plan: RepetitionPlan) -> Result<bool> {
        let v = predicates::above_segment(q, s);
        if v.is_zero() {
            return Err(gp(format!("{q} on the line of {s}")));
        }
        Ok(self.vote(v == Sign::Positive, plan))
    }

    /// Is `a.x < b.x`? Equal abscissae violate general position.
    pub fn x_less(&mut self, a: Point2, b: Point2, plan: RepetitionPlan) -> Result<bool> {
        let s = predicates::compare_x(a, b);
        if s.is_zero() {
            return Err(gp(format!("{a} and {b} share an x-coordinate")));
        }
        Ok(self.vote(s == Sign::Negative, plan))
    }

    /// Is `d` strictly inside the circle through `a, b, c`?
    pub fn in_circle_sym(
        &mut self,
        a: &symbolic::SymPoint,
        b: &symbolic::SymPoint,
        c: &symbolic::SymPoint,
        d: &symbolic::SymPoint,
        plan: RepetitionPlan,
    ) -> Result<bool> {
        let s = symbolic::in_circle(a, b, c, d)?;
        if s.is_zero() {
            return Err(gp("four cocircular points"));
        }
        Ok(self.vote(s == Sign::Positive, plan))
    }

    /// Is `|a - b| < |c - d|`? Ties answer false; distance ties between
    /// unrelated pairs are legitimate input.
    pub fn dist_less(
        &mut self,
        a: Point2,
        b: Point2,
        c: Point2,
        d: Point2,
        plan: RepetitionPlan,
    ) -> bool {
        let s = predicates::compare_dist(a, b, c, d);
        self.vote(s == Sign::Negative, plan)
    }
}

/// An odd repetition count together with the failure probability it
/// guarantees for majority voting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionPlan {
    pub reps: u32,
    pub target: f64,
}

impl RepetitionPlan {
    /// A single, unamplified evaluation.
    pub const SINGLE: RepetitionPlan = RepetitionPlan { reps: 1, target: 0.5 };
}

fn ln_choose(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `Pr[Bin(r, p) > r/2]`, the probability that a majority of `r` votes is
/// wrong.
pub fn majority_error(r: u32, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let terms: Vec<f64> = (r / 2 + 1..=r)
        .map(|k| ln_choose(r, k) + k as f64 * lp + (r - k) as f64 * lq)
        .collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m.exp() * terms.iter().map(|t| (t - m).exp()).sum::<f64>()
}

/// Smallest odd `r` whose majority error at probability `p` is at most
/// `target`.
pub fn repetitions_for(p: f64, target: f64) -> Result<RepetitionPlan> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::InvalidNoiseLevel(p));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidTarget(target));
    }
    let mut r = 1u32;
    loop {
        if majority_error(r, p) <= target {
            return Ok(RepetitionPlan { reps: r, target });
        }
        r += 2;
    }
}

/// Per-primitive plan so that a consultation built from `tests` primitives
/// errs with probability at most `p_e_max` (union bound).
pub fn consultation_plan(p: f64, tests: u32, p_e_max: f64) -> Result<RepetitionPlan> {
    repetitions_for(p, p_e_max / tests.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_is_exact() {
        let mut ctx = NoisyContext::new(0.0, 7).unwrap();
        for i in 0..1000 {
            let b = i % 3 == 0;
            assert_eq!(ctx.noisy_eval(b), b);
        }
        assert_eq!(ctx.calls(), 1000);
    }

    #[test]
    fn invalid_noise_levels() {
        assert_eq!(NoisyContext::new(0.5, 1).unwrap_err(), Error::InvalidNoiseLevel(0.5));
        assert!(NoisyContext::new(-0.1, 1).is_err());
        assert!(repetitions_for(0.5, 0.1).is_err());
        assert!(repetitions_for(0.1, 0.0).is_err());
    }

    #[test]
    fn flip_fraction_matches_p() {
        let mut ctx = NoisyContext::new(0.2, 42).unwrap();
        let n = 100_000;
        let wrong = (0..n).filter(|_| !ctx.noisy_eval(true)).count();
        let frac = wrong as f64 / n as f64;
        assert!((frac - 0.2).abs() <= 0.01, "flip fraction {frac}");
    }

    #[test]
    fn determinism_per_seed() {
        let run = |seed| {
            let mut ctx = NoisyContext::new(0.3, seed).unwrap();
            (0..256).map(|_| ctx.noisy_eval(true)).collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn lag_one_autocorrelation_is_negligible() {
        let mut ctx = NoisyContext::new(0.2, 99).unwrap();
        let xs: Vec<f64> = (0..1_000_000).map(|_| if ctx.noisy_eval(true) { 0.0 } else { 1.0 }).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        let cov = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>();
        assert!((cov / var).abs() <= 0.005, "autocorrelation {}", cov / var);
    }

    #[test]
    fn plan_examples() {
        assert_eq!(repetitions_for(0.0, 0.01).unwrap().reps, 1);
        assert_eq!(repetitions_for(0.25, 1.0 / 15.0).unwrap().reps, 9);
        // exact binomial tail, frozen from a rational-arithmetic oracle
        let deep = repetitions_for(0.25, 2f64.powi(-20)).unwrap();
        assert_eq!(deep.reps, 79);
        assert!(deep.reps <= 111);
        assert!(deep.reps % 2 == 1);
    }

    #[test]
    fn majority_error_reference_values() {
        assert!((majority_error(7, 0.25) - 0.070_556_640_625).abs() < 1e-12);
        assert!((majority_error(9, 0.25) - 0.048_927_307_128_906_25).abs() < 1e-12);
        assert_eq!(majority_error(1, 0.3), 0.3);
    }

    #[test]
    fn vote_counts_every_repetition() {
        let mut ctx = NoisyContext::new(0.25, 3).unwrap();
        let plan = repetitions_for(0.25, 1.0 / 15.0).unwrap();
        ctx.vote(true, plan);
        assert_eq!(ctx.calls(), 9);
        let v = ctx.majority_vote(|| Ok(true), plan).unwrap();
        let _ = v;
        assert_eq!(ctx.calls(), 18);
    }

    #[test]
    fn majority_vote_error_rate() {
        let mut ctx = NoisyContext::new(0.25, 11).unwrap();
        let plan = repetitions_for(0.25, 1.0 / 15.0).unwrap();
        let trials = 100_000;
        let wrong = (0..trials).filter(|_| !ctx.majority_vote(|| Ok(true), plan).unwrap()).count();
        let rate = wrong as f64 / trials as f64;
        assert!(rate <= 0.0489 + 0.005, "majority error {rate}");
    }

    #[test]
    fn majority_vote_propagates_kernel_errors() {
        let mut ctx = NoisyContext::new(0.1, 1).unwrap();
        let a = Point2::new(0, 0);
        let r = ctx.ccw(a, Point2::new(1, 1), Point2::new(2, 2), RepetitionPlan::SINGLE);
        assert!(matches!(r, Err(Error::GeneralPositionViolation(_))));
    }

    #[test]
    fn derived_streams_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(9, 4), derive_seed(9, 4));
    }
}
