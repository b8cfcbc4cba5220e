use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};

/// A marked realisation observed on the window `[0, horizon]`.
///
/// Marks are zero-based dimension indices in memory; files use one-based
/// marks and the conversion happens in [`crate::io`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSequence {
    times: Vec<f64>,
    marks: Vec<usize>,
    dim: usize,
    horizon: f64,
}

impl EventSequence {
    /// Validates strict ordering, positivity, mark range and the horizon.
    pub fn new(times: Vec<f64>, marks: Vec<usize>, dim: usize, horizon: f64) -> Result<Self> {
        if dim == 0 {
            return Err(HawkesError::data("sequence dimension must be at least 1"));
        }
        if times.len() != marks.len() {
            return Err(HawkesError::data(format!(
                "{} times but {} marks",
                times.len(),
                marks.len()
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(HawkesError::data(format!("horizon {horizon} must be finite and > 0")));
        }
        let mut prev = 0.0;
        for (k, &t) in times.iter().enumerate() {
            if !t.is_finite() || t <= prev {
                return Err(HawkesError::data(if k == 0 {
                    format!("first event time {t} must be > 0")
                } else {
                    format!("event times must be strictly increasing ({prev} then {t} at row {k})")
                }));
            }
            prev = t;
        }
        if prev > horizon {
            return Err(HawkesError::data(format!(
                "last event time {prev} exceeds horizon {horizon}"
            )));
        }
        if let Some(&m) = marks.iter().find(|&&m| m >= dim) {
            return Err(HawkesError::data(format!(
                "mark {} out of range for dimension {dim}",
                m + 1
            )));
        }
        Ok(EventSequence {
            times,
            marks,
            dim,
            horizon,
        })
    }

    pub fn empty(dim: usize, horizon: f64) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), dim, horizon)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn marks(&self) -> &[usize] {
        &self.marks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.times.iter().copied().zip(self.marks.iter().copied())
    }

    /// Number of events of each dimension, `N^i(horizon)`.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        for &m in &self.marks {
            c[m] += 1;
        }
        c
    }

    /// Event times of dimension `i`, `(T^i_k)_k`.
    pub fn times_of(&self, i: usize) -> Vec<f64> {
        self.iter().filter(|&(_, m)| m == i).map(|(t, _)| t).collect()
    }

    /// Number of events with time `≤ t`, `N(t)`.
    pub fn count_until(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t)
    }

    /// Restricts to events in `(0, t]` and sets the horizon to `t`.
    pub fn truncated(&self, t: f64) -> Result<Self> {
        let n = self.count_until(t);
        Self::new(self.times[..n].to_vec(), self.marks[..n].to_vec(), self.dim, t)
    }
}
