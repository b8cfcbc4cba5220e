use crate::error::Result;
use crate::events::EventSequence;
use crate::intensity::{check_time, DimensionTrack, IntervalState};
use crate::likelihood::Objective;
use crate::model::HawkesModel;

/// Compensator `Λ_i(t)`: the integral over `[0, t]` of the conditional
/// intensity of dimension `i`.
pub fn compensator(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> Result<f64> {
    model.check_index(i)?;
    check_time(t)?;
    Ok(DimensionTrack::replay(model.dimension(i), seq, t, Objective::Exact).compensator())
}

/// Integral of the underlying intensity over `[0, t]`, without the positive
/// part. Coincides with [`compensator`] when `λ*_i` never goes negative.
pub fn integrated_underlying(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> Result<f64> {
    model.check_index(i)?;
    check_time(t)?;
    Ok(DimensionTrack::replay(model.dimension(i), seq, t, Objective::Approx).compensator())
}

/// Compensator values at every event time and at the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensatorPath {
    /// `at_events[i][k] = Λ_i(T_(k))`.
    pub at_events: Vec<Vec<f64>>,
    /// `Λ_i(horizon)`.
    pub at_horizon: Vec<f64>,
}

impl CompensatorPath {
    /// `Λ(T_(k)) = Σ_i Λ_i(T_(k))`, summed in dimension order.
    pub fn total_at_events(&self) -> Vec<f64> {
        let n = self.at_events.first().map_or(0, Vec::len);
        (0..n).map(|k| self.at_events.iter().map(|row| row[k]).sum()).collect()
    }
}

/// Streams the sequence once, recording every `Λ_i(T_(k))`. `O(N·d)`.
pub fn compensator_path(model: &HawkesModel, seq: &EventSequence) -> CompensatorPath {
    let d = model.dim();
    let mut at_events = vec![Vec::with_capacity(seq.len()); d];
    let mut state = IntervalState::new(model);
    for (t, mark) in seq.iter() {
        state.advance(model, t, Objective::Exact);
        for (row, value) in at_events.iter_mut().zip(state.partial_compensator()) {
            row.push(value);
        }
        state.apply_event(model, mark);
    }
    if seq.horizon() > state.last_time() {
        state.advance(model, seq.horizon(), Objective::Exact);
    }
    CompensatorPath {
        at_events,
        at_horizon: state.partial_compensator().collect(),
    }
}
