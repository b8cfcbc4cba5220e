//! Shared fixtures for the criterion benches.

use hawkes_core::{scenario, simulate, EventSequence, HawkesModel, SimConfig, StopRule};

/// A built-in scenario and one realization of `events` events.
pub fn fixture(name: &str, events: usize, seed: u64) -> (HawkesModel, EventSequence) {
    let model = scenario(name, None).expect("built-in scenario");
    let seq = simulate(&SimConfig::new(model.clone(), StopRule::Events(events), seed)).expect("simulation");
    (model, seq)
}
