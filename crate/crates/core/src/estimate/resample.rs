use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{HawkesError, Result};
use crate::events::EventSequence;

/// Builds `reps` pseudo-realizations, each the concatenation of `k`
/// realizations drawn without replacement. The `r`-th drawn block is shifted
/// by `(r-1)·L`, where `L` is the common window length.
pub fn resample_concatenate(
    realizations: &[EventSequence],
    k: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<EventSequence>> {
    let first = realizations
        .first()
        .ok_or_else(|| HawkesError::data("no realizations to resample"))?;
    if k == 0 || k > realizations.len() {
        return Err(HawkesError::domain(format!(
            "cannot draw {k} of {} realizations",
            realizations.len()
        )));
    }
    let d = first.dim();
    let window = first.horizon();
    for s in realizations {
        if s.dim() != d {
            return Err(HawkesError::data("realizations have different dimensions"));
        }
        if (s.horizon() - window).abs() > 1e-9 * window {
            return Err(HawkesError::data(format!(
                "realizations must share one window length ({window} and {})",
                s.horizon()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..realizations.len()).collect();
    (0..reps)
        .map(|_| {
            let (drawn, _) = order.partial_shuffle(&mut rng, k);
            let mut times = Vec::new();
            let mut marks = Vec::new();
            for (r, &idx) in drawn.iter().enumerate() {
                let shift = r as f64 * window;
                let s = &realizations[idx];
                times.extend(s.times().iter().map(|t| t + shift));
                marks.extend_from_slice(s.marks());
            }
            // window lengths agree only up to rounding
            let horizon = times.last().map_or(k as f64 * window, |&t| t.max(k as f64 * window));
            EventSequence::new(times, marks, d, horizon)
        })
        .collect()
}
