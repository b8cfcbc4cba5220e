//! Thinning simulation.
//!
//! Between events the kernels only decay, so the sum over dimensions of
//! `μ_i` plus the *excitatory* part of each intensity, evaluated at the
//! current time, bounds the total conditional intensity until the next
//! accepted event. Candidates are drawn at that frozen rate and accepted
//! with probability `λ(t)/λ+`; the bound is refreshed at every candidate.
//!
//! Randomness comes from [`ChaCha8Rng`] seeded with
//! [`SeedableRng::seed_from_u64`]. ChaCha is a counter-based stream cipher,
//! so the stream for a seed is fixed by the algorithm and not by this crate.

use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::events::EventSequence;
use crate::model::HawkesModel;
use crate::spectral::spectral_radius;

/// Candidate draws after which a simulation is abandoned.
pub const MAX_CANDIDATES: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StopRule {
    /// Stop at the `n`-th accepted event; the horizon is that event's time.
    Events(usize),
    /// Simulate on `[0, T]`.
    Horizon(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: HawkesModel,
    pub stop: StopRule,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(model: HawkesModel, stop: StopRule, seed: u64) -> Self {
        SimConfig { model, stop, seed }
    }
}

/// Per-dimension excitatory and inhibitory kernel sums at the current time.
struct KernelSums {
    excite: Vec<f64>,
    inhibit: Vec<f64>,
}

impl KernelSums {
    fn decay(&mut self, beta: &[f64], dt: f64) {
        for ((e, h), &b) in self.excite.iter_mut().zip(self.inhibit.iter_mut()).zip(beta) {
            let f = (-b * dt).exp();
            *e *= f;
            *h *= f;
        }
    }

    fn add_event(&mut self, model: &HawkesModel, mark: usize) {
        for i in 0..model.dim() {
            let a = model.alpha(i, mark);
            if a > 0.0 {
                self.excite[i] += a;
            } else {
                self.inhibit[i] -= a;
            }
        }
    }
}

pub fn simulate(config: &SimConfig) -> Result<EventSequence> {
    let model = &config.model;
    let d = model.dim();
    let (max_events, horizon) = match config.stop {
        StopRule::Events(0) => return Err(HawkesError::domain("target event count must be >= 1")),
        StopRule::Events(n) => (n, f64::INFINITY),
        StopRule::Horizon(t) if t.is_finite() && t > 0.0 => (usize::MAX, t),
        StopRule::Horizon(t) => return Err(HawkesError::domain(format!("horizon {t} must be finite and > 0"))),
    };
    let spectral = spectral_radius(model);
    if !spectral.stable {
        log::warn!(
            "spectral radius of the excitation matrix is {:.4} >= 1; the process may explode",
            spectral.radius
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mu = model.mu();
    let beta = model.beta();
    let mu_total: f64 = mu.iter().sum();
    let mut sums = KernelSums {
        excite: vec![0.0; d],
        inhibit: vec![0.0; d],
    };
    let mut intensity = vec![0.0; d];
    let mut times = Vec::new();
    let mut marks = Vec::new();
    let mut t = 0.0;
    let mut candidates = 0u64;

    loop {
        let bound = mu_total + sums.excite.iter().sum::<f64>();
        let wait: f64 = rng.sample::<f64, _>(Exp1) / bound;
        if t + wait > horizon {
            break;
        }
        candidates += 1;
        if candidates > MAX_CANDIDATES {
            return Err(HawkesError::numerical(format!(
                "thinning gave up after {MAX_CANDIDATES} candidates ({} events accepted)",
                times.len()
            )));
        }
        sums.decay(beta, wait);
        t += wait;

        let mut total = 0.0;
        for i in 0..d {
            intensity[i] = (mu[i] + sums.excite[i] - sums.inhibit[i]).max(0.0);
            total += intensity[i];
        }
        debug_assert!(
            total <= bound * (1.0 + 1e-12),
            "dominating rate violated: {total} > {bound}"
        );
        let u: f64 = rng.random();
        if u * bound >= total {
            continue;
        }
        let mark = pick_mark(&intensity, total, rng.random::<f64>());
        if t <= times.last().copied().unwrap_or(0.0) {
            // two candidates can only collide through rounding of a tiny wait
            continue;
        }
        times.push(t);
        marks.push(mark);
        sums.add_event(model, mark);
        if times.len() >= max_events {
            break;
        }
    }

    let horizon = if horizon.is_finite() { horizon } else { t };
    EventSequence::new(times, marks, d, horizon)
}

fn pick_mark(intensity: &[f64], total: f64, u: f64) -> usize {
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in intensity.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            acc += w;
            if target < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Parameter sets of the bivariate benchmark, plus a file-driven slot for
/// larger models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// All interactions active, strong self-inhibition of dimension 1.
    S1,
    /// `α_12 = 0`, dimension 2 weakly inhibited by dimension 1.
    S2,
    /// `α_21 = 0`, slow decays with self-inhibition in both dimensions.
    S3,
    /// Parameters read from a model document.
    D10Spec,
}

impl FromStr for Scenario {
    type Err = HawkesError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Scenario::S1),
            "S2" => Ok(Scenario::S2),
            "S3" => Ok(Scenario::S3),
            "D10-SPEC" | "D10" => Ok(Scenario::D10Spec),
            _ => Err(HawkesError::domain(format!(
                "unknown scenario '{s}' (expected S1, S2, S3 or D10-spec)"
            ))),
        }
    }
}

impl Scenario {
    /// Built-in parameters; `None` for the file-driven scenario.
    pub fn builtin(self) -> Option<HawkesModel> {
        let (mu, alpha, beta) = match self {
            Scenario::S1 => (vec![0.5, 1.0], vec![vec![-1.9, 3.0], vec![1.2, 1.5]], vec![5.0, 8.0]),
            Scenario::S2 => (vec![0.7, 1.0], vec![vec![0.2, 0.0], vec![-0.6, 1.2]], vec![3.0, 2.0]),
            Scenario::S3 => (vec![1.2, 1.0], vec![vec![-1.0, 0.1], vec![0.0, -0.8]], vec![0.3, 0.5]),
            Scenario::D10Spec => return None,
        };
        Some(HawkesModel::new(mu, alpha, beta).expect("built-in scenario is valid"))
    }
}

/// Resolves a scenario name; `D10-spec` requires a model document path.
pub fn scenario(name: &str, spec_file: Option<&Path>) -> Result<HawkesModel> {
    let sc: Scenario = name.parse()?;
    match sc.builtin() {
        Some(m) => Ok(m),
        None => {
            let path = spec_file.ok_or_else(|| HawkesError::domain("scenario D10-spec needs a model document path"))?;
            Ok(crate::io::read_model(path)?.model)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_parameters() {
        let s1 = scenario("S1", None).unwrap();
        assert_eq!(s1.mu(), &[0.5, 1.0]);
        assert_eq!(s1.alpha_rows(), vec![vec![-1.9, 3.0], vec![1.2, 1.5]]);
        assert_eq!(s1.beta(), &[5.0, 8.0]);
        let s2 = scenario("S2", None).unwrap();
        assert_eq!(s2.alpha_rows(), vec![vec![0.2, 0.0], vec![-0.6, 1.2]]);
        let s3 = scenario("S3", None).unwrap();
        assert_eq!(s3.alpha_rows(), vec![vec![-1.0, 0.1], vec![0.0, -0.8]]);
        assert_eq!(s3.mu(), &[1.2, 1.0]);
        assert_eq!(s3.beta(), &[0.3, 0.5]);
    }

    #[test]
    fn unknown_or_missing_scenario_file() {
        assert!(scenario("S9", None).is_err());
        assert!(scenario("D10-spec", None).is_err());
        assert!(scenario("D10-spec", Some(Path::new("/nonexistent/d10.json"))).is_err());
    }

    #[test]
    fn exact_event_count_and_reproducible() {
        let m = scenario("S3", None).unwrap();
        let cfg = SimConfig::new(m, StopRule::Events(500), 17);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.len(), 500);
        assert_eq!(a, b);
        assert_eq!(a.horizon(), *a.times().last().unwrap());
        let c = simulate(&SimConfig { seed: 18, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn horizon_stop() {
        let m = scenario("S2", None).unwrap();
        let s = simulate(&SimConfig::new(m, StopRule::Horizon(50.0), 3)).unwrap();
        assert_eq!(s.horizon(), 50.0);
        assert!(s.times().iter().all(|&t| t <= 50.0));
    }

    #[test]
    fn zero_events_rejected() {
        let m = scenario("S2", None).unwrap();
        assert!(simulate(&SimConfig::new(m.clone(), StopRule::Events(0), 1)).is_err());
        assert!(simulate(&SimConfig::new(m, StopRule::Horizon(-1.0), 1)).is_err());
    }

    #[test]
    fn poisson_rate() {
        let m = HawkesModel::new(vec![2.0], vec![vec![0.0]], vec![1.0]).unwrap();
        let s = simulate(&SimConfig::new(m, StopRule::Horizon(1000.0), 99)).unwrap();
        let rate = s.len() as f64 / 1000.0;
        let se = (2.0f64 / 1000.0).sqrt();
        assert!((rate - 2.0).abs() < 3.0 * se, "rate {rate}");
    }
}
