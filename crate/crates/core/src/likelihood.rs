//! Streaming log-likelihood.
//!
//! The log-likelihood separates over receiving dimensions,
//! `ℓ = Σ_i ℓ_i(θ_i)`, with
//!
//! ```text
//! ℓ_i = Σ_{events k of dim i} log λ*_i(T_k-) - Λ_i(horizon)
//! ```
//!
//! Left limits and the compensator are both read off the closed-form
//! recursion in [`crate::intensity`], so one pass over the events costs
//! `O(N)` per dimension. A dimension without events contributes
//! `-Λ_i(horizon)`.

use serde::{Deserialize, Serialize};

use crate::events::EventSequence;
use crate::intensity::{DimensionTrack, IntervalState};
use crate::model::{DimensionParams, HawkesModel};

/// Base value returned when some event falls where the intensity is zero.
pub const INFEASIBLE: f64 = -1e18;
/// Extra penalty per offending event, so that less infeasible points rank higher.
pub const VIOLATION_PENALTY: f64 = 1e15;

/// Which compensator enters the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Integral of the positive part, i.e. the true compensator.
    #[default]
    Exact,
    /// Integral of the signed underlying intensity.
    Approx,
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Objective::Exact),
            "approx" => Ok(Objective::Approx),
            other => Err(format!("unknown objective '{other}' (expected exact or approx)")),
        }
    }
}

pub fn is_infeasible(value: f64) -> bool {
    value <= INFEASIBLE / 10.0
}

fn finish(log_sum: f64, violations: usize, compensator: f64) -> f64 {
    if violations > 0 {
        INFEASIBLE - VIOLATION_PENALTY * violations as f64
    } else {
        log_sum - compensator
    }
}

/// `ℓ_i(θ_i)` for one sequence. Only the parameters of dimension `i` matter.
pub fn dimension_log_likelihood(
    params: DimensionParams<'_>,
    seq: &EventSequence,
    i: usize,
    objective: Objective,
) -> f64 {
    let DimensionParams { mu, alpha, beta } = params;
    let mut track = DimensionTrack::start(mu);
    let mut log_sum = 0.0;
    let mut violations = 0usize;
    for (t, mark) in seq.iter() {
        let left = track.advance(mu, beta, t, objective);
        if mark == i {
            if left > 0.0 {
                log_sum += left.ln();
            } else {
                violations += 1;
            }
        }
        track.jump(alpha[mark]);
    }
    if seq.horizon() > track.last_time() {
        track.advance(mu, beta, seq.horizon(), objective);
    }
    finish(log_sum, violations, track.compensator())
}

/// All `ℓ_i` in a single `O(N·d)` pass over the events.
pub fn per_dimension_log_likelihood(model: &HawkesModel, seq: &EventSequence, objective: Objective) -> Vec<f64> {
    let d = model.dim();
    let mut state = IntervalState::new(model);
    let mut log_sum = vec![0.0; d];
    let mut violations = vec![0usize; d];
    for (t, mark) in seq.iter() {
        state.advance(model, t, objective);
        let left = state.track(mark).lambda_star();
        if left > 0.0 {
            log_sum[mark] += left.ln();
        } else {
            violations[mark] += 1;
        }
        state.apply_event(model, mark);
    }
    if seq.horizon() > state.last_time() {
        state.advance(model, seq.horizon(), objective);
    }
    (0..d)
        .map(|i| finish(log_sum[i], violations[i], state.track(i).compensator()))
        .collect()
}

/// Exact log-likelihood `ℓ = Σ_i ℓ_i`.
pub fn log_likelihood(model: &HawkesModel, seq: &EventSequence) -> f64 {
    per_dimension_log_likelihood(model, seq, Objective::Exact).iter().sum()
}

/// Log-likelihood with the compensator replaced by the integral of the
/// signed underlying intensity.
pub fn approx_log_likelihood(model: &HawkesModel, seq: &EventSequence) -> f64 {
    per_dimension_log_likelihood(model, seq, Objective::Approx).iter().sum()
}
