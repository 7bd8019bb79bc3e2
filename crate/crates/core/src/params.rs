use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::noise::{repetitions_for, RepetitionPlan};
use crate::walk::{whp_epsilon, WalkConfig, DEFAULT_BUDGET_FACTOR, DEFAULT_P_E_MAX, DEFAULT_THRESHOLD_FACTOR, MAX_RETRIES};

/// Tuning shared by every noise-tolerant algorithm.
///
/// High probability means failure at most `n^-c`: walks use tolerance
/// `n^-c`, and individually amplified decisions use `n^-(c+1)` so that a
/// linear number of them still fails with probability `O(n^-c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub c: f64,
    pub threshold_factor: f64,
    pub budget_factor: f64,
    pub p_e_max: f64,
    pub max_retries: u32,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            c: 2.0,
            threshold_factor: DEFAULT_THRESHOLD_FACTOR,
            budget_factor: DEFAULT_BUDGET_FACTOR,
            p_e_max: DEFAULT_P_E_MAX,
            max_retries: MAX_RETRIES,
        }
    }
}

impl Params {
    pub fn with_c(c: f64) -> Self {
        Params { c, ..Params::default() }
    }

    pub fn walk_config(&self, n: usize, path_hint: u64) -> WalkConfig {
        WalkConfig {
            epsilon: whp_epsilon(n, self.c),
            p_e_max: self.p_e_max,
            path_hint,
            budget_factor: self.budget_factor,
            threshold_factor: self.threshold_factor,
        }
    }

    /// Plan for a decision that must hold with probability `1 - n^-(c+1)`.
    pub fn amplify(&self, p: f64, n: usize) -> Result<RepetitionPlan> {
        repetitions_for(p, (n.max(2) as f64).powf(-(self.c + 1.0)))
    }
}
