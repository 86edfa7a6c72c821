//! Closed-form recurrence planner for Bell-pair purification.
//!
//! The exact one-round update and its success probability are exposed for
//! cross-checking; the plan itself iterates the linearized closed form
//! F_r = 1 − (2/3)^r·ε until the anonymity-derived fidelity target is met.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hard cap on planned purification rounds (bell cost is 2^r per pair).
pub const ROUND_CAP: u32 = 120;

/// One exact purification round applied to input fidelity `f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurifyStep {
    pub fidelity: f64,
    pub success_prob: f64,
}

/// Exact recurrence: F' = (F² + ((1−F)/3)²) / p_suc with
/// p_suc = F² + (2/3)F(1−F) + (5/9)(1−F)².
pub fn purify_round_exact(f: f64) -> PurifyStep {
    let g = 1.0 - f;
    let success_prob = f * f + (2.0 / 3.0) * f * g + (5.0 / 9.0) * g * g;
    let fidelity = (f * f + (g / 3.0) * (g / 3.0)) / success_prob;
    PurifyStep {
        fidelity,
        success_prob,
    }
}

/// Linearized closed form F_r = 1 − (2/3)^r·ε.
pub fn linearized_fidelity(epsilon: f64, rounds: u32) -> f64 {
    1.0 - (2.0f64 / 3.0).powi(rounds as i32) * epsilon
}

/// A purification schedule meeting the anonymity budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurificationPlan {
    pub rounds: u32,
    pub fidelity: f64,
    /// Bell pairs consumed per purified target pair: 2^rounds.
    pub bell_cost: u128,
    /// The fidelity target √(1 − γ²/(N⁸·log₂²N)) that was met.
    pub target: f64,
}

/// Smallest r with 1 − (2/3)^r·ε ≥ √(1 − γ²/(N⁸·log₂²N)), the fidelity
/// achieved, and the 2^r Bell cost per target pair.
pub fn purification_plan(epsilon: f64, gamma: f64, voters: usize) -> Result<PurificationPlan> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "initial infidelity must lie in [0,1): {epsilon}"
        )));
    }
    if gamma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "anonymity budget must be positive: {gamma}"
        )));
    }
    if voters < 2 {
        return Err(Error::InvalidArgument("plan needs at least 2 voters".into()));
    }
    let n = voters as f64;
    let log2n = n.log2();
    let shrink = (gamma * gamma / (n.powi(8) * log2n * log2n)).min(1.0);
    let target = (1.0 - shrink).sqrt();
    for rounds in 0..=ROUND_CAP {
        let fidelity = linearized_fidelity(epsilon, rounds);
        if fidelity >= target {
            return Ok(PurificationPlan {
                rounds,
                fidelity,
                bell_cost: 1u128 << rounds,
                target,
            });
        }
    }
    Err(Error::PlanningCap {
        target,
        cap: ROUND_CAP,
    })
}
