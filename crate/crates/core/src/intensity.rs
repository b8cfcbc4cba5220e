//! Closed-form evolution of the underlying intensity between events.
//!
//! Because every kernel feeding dimension `i` decays at the same rate `β_i`,
//! the underlying intensity between two consecutive events is
//! `μ_i + (λ*_i(T_k) - μ_i)·exp(-β_i (t - T_k))`, which is monotone. The
//! conditional intensity is therefore zero up to a single restart time and
//! equal to `λ*_i` afterwards, and both the restart time and the integral of
//! the positive part have closed forms.

use crate::error::{HawkesError, Result};
use crate::events::EventSequence;
use crate::likelihood::Objective;
use crate::model::{DimensionParams, HawkesModel};

/// Lower clamp on the log argument `(μ - λ*)/μ` when `λ* < 0`.
const LOG_ARG_FLOOR: f64 = 1.0 + 1e-15;

/// First time in `[t_k, t_next]` at which the underlying intensity of a
/// dimension becomes non-negative, or `t_next` if it stays negative.
///
/// `lambda_star` is the underlying intensity at `t_k`, jump included.
pub fn restart_after(mu: f64, beta: f64, lambda_star: f64, t_k: f64, t_next: f64) -> f64 {
    if lambda_star >= 0.0 {
        return t_k;
    }
    let arg = ((mu - lambda_star) / mu).max(LOG_ARG_FLOOR);
    (t_k + arg.ln() / beta).min(t_next)
}

/// Restart time of dimension `i` on the interval `[t_k, t_next]`.
pub fn restart_time(model: &HawkesModel, lambda_star_at_tk: f64, i: usize, t_k: f64, t_next: f64) -> Result<f64> {
    model.check_index(i)?;
    if t_k.partial_cmp(&t_next) != Some(std::cmp::Ordering::Less) {
        return Err(HawkesError::domain(format!(
            "restart time needs t_k < t_next (got {t_k} and {t_next})"
        )));
    }
    Ok(restart_after(
        model.mu()[i],
        model.beta()[i],
        lambda_star_at_tk,
        t_k,
        t_next,
    ))
}

/// Recursion state of a single dimension.
///
/// After [`DimensionTrack::advance`] the stored intensity is the left limit
/// at the new anchor time; [`DimensionTrack::jump`] then adds the event's
/// contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionTrack {
    lambda_star: f64,
    last_time: f64,
    restart: f64,
    compensator: f64,
}

impl DimensionTrack {
    /// State at time zero with an empty history.
    pub fn start(mu: f64) -> Self {
        DimensionTrack {
            lambda_star: mu,
            last_time: 0.0,
            restart: 0.0,
            compensator: 0.0,
        }
    }

    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    pub fn last_time(&self) -> f64 {
        self.last_time
    }

    /// Restart time of the most recently traversed interval.
    pub fn restart(&self) -> f64 {
        self.restart
    }

    pub fn compensator(&self) -> f64 {
        self.compensator
    }

    /// Moves the anchor forward to `to`, accumulating the compensator of the
    /// traversed interval. Returns the underlying intensity at `to` (left
    /// limit when `to` is an event time).
    #[inline]
    pub fn advance(&mut self, mu: f64, beta: f64, to: f64, objective: Objective) -> f64 {
        let from = self.last_time;
        let excess = self.lambda_star - mu;
        let decay = (-beta * (to - from)).exp();
        match objective {
            Objective::Exact => {
                let restart = restart_after(mu, beta, self.lambda_star, from, to);
                if restart < to {
                    let decay_at_restart = if restart == from {
                        1.0
                    } else {
                        (-beta * (restart - from)).exp()
                    };
                    self.compensator += mu * (to - restart) + excess / beta * (decay_at_restart - decay);
                }
                self.restart = restart;
            }
            Objective::Approx => {
                self.compensator += mu * (to - from) + excess / beta * (1.0 - decay);
                self.restart = from;
            }
        }
        self.lambda_star = mu + excess * decay;
        self.last_time = to;
        self.lambda_star
    }

    #[inline]
    pub fn jump(&mut self, alpha: f64) {
        self.lambda_star += alpha;
    }

    /// Replays the events of `seq` with time `≤ t` and advances to `t`.
    pub fn replay(params: DimensionParams<'_>, seq: &EventSequence, t: f64, objective: Objective) -> Self {
        let mut track = DimensionTrack::start(params.mu);
        for (time, mark) in seq.iter().take_while(|&(time, _)| time <= t) {
            track.advance(params.mu, params.beta, time, objective);
            track.jump(params.alpha[mark]);
        }
        if t > track.last_time {
            track.advance(params.mu, params.beta, t, objective);
        }
        track
    }
}

/// Streaming state for all dimensions at once.
///
/// Holds, per dimension, `λ*_i` at the last anchor, the restart time of the
/// last traversed interval and the compensator accumulated so far.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalState {
    tracks: Vec<DimensionTrack>,
    last_time: f64,
}

impl IntervalState {
    pub fn new(model: &HawkesModel) -> Self {
        IntervalState {
            tracks: model.mu().iter().map(|&mu| DimensionTrack::start(mu)).collect(),
            last_time: 0.0,
        }
    }

    pub fn last_time(&self) -> f64 {
        self.last_time
    }

    pub fn track(&self, i: usize) -> &DimensionTrack {
        &self.tracks[i]
    }

    pub fn lambda_star(&self) -> impl Iterator<Item = f64> + '_ {
        self.tracks.iter().map(DimensionTrack::lambda_star)
    }

    pub fn restart(&self) -> impl Iterator<Item = f64> + '_ {
        self.tracks.iter().map(DimensionTrack::restart)
    }

    pub fn partial_compensator(&self) -> impl Iterator<Item = f64> + '_ {
        self.tracks.iter().map(DimensionTrack::compensator)
    }

    pub fn advance(&mut self, model: &HawkesModel, to: f64, objective: Objective) {
        debug_assert!(to >= self.last_time);
        for (i, track) in self.tracks.iter_mut().enumerate() {
            track.advance(model.mu()[i], model.beta()[i], to, objective);
        }
        self.last_time = to;
    }

    /// Adds the jumps caused by an event of dimension `mark`.
    pub fn apply_event(&mut self, model: &HawkesModel, mark: usize) {
        let d = model.dim();
        let alpha = model.alpha_flat();
        for (i, track) in self.tracks.iter_mut().enumerate() {
            track.jump(alpha[i * d + mark]);
        }
    }
}

/// Underlying (signed) intensity `λ*_i(t)`, jumps at `t` included.
pub fn underlying_intensity(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> Result<f64> {
    model.check_index(i)?;
    check_time(t)?;
    Ok(DimensionTrack::replay(model.dimension(i), seq, t, Objective::Exact).lambda_star())
}

/// Conditional intensity `λ_i(t)` as seen by the compensator recursion:
/// zero before the restart time of the current interval and `λ*_i` after it.
pub fn conditional_intensity(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> Result<f64> {
    model.check_index(i)?;
    check_time(t)?;
    let params = model.dimension(i);
    let n = seq.count_until(t);
    let track = if n == 0 {
        DimensionTrack::replay(params, seq, t, Objective::Exact)
    } else {
        DimensionTrack::replay(params, seq, seq.times()[n - 1], Objective::Exact)
    };
    let anchor = track.last_time();
    let at_anchor = track.lambda_star();
    if at_anchor >= 0.0 {
        return Ok(params.mu + (at_anchor - params.mu) * (-params.beta * (t - anchor)).exp());
    }
    let root = restart_after(params.mu, params.beta, at_anchor, anchor, f64::INFINITY);
    if t > root {
        Ok(params.mu + (at_anchor - params.mu) * (-params.beta * (t - anchor)).exp())
    } else {
        Ok(0.0)
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(HawkesError::domain(format!("time {t} must be finite and >= 0")));
    }
    Ok(())
}
