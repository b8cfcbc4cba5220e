use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::events::EventSequence;
use crate::likelihood::{dimension_log_likelihood, is_infeasible, Objective};
use crate::model::{DimensionParams, HawkesModel};
use crate::optim::{minimize, Bounds, MinimizerOptions};

/// `true` where `α_ij` is a free parameter, `false` where it is held at zero.
pub type Support = Vec<Vec<bool>>;

pub fn full_support(d: usize) -> Support {
    vec![vec![true; d]; d]
}

/// Box constraints on `(μ_i, α_ij, β_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitBounds {
    pub mu_min: f64,
    /// `None` means ten times the largest empirical rate `N^i / T`.
    pub mu_max: Option<f64>,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for FitBounds {
    fn default() -> Self {
        FitBounds {
            mu_min: 1e-8,
            mu_max: None,
            alpha_max: 20.0,
            beta_min: 1e-8,
            beta_max: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub objective: Objective,
    pub restarts: usize,
    pub bounds: FitBounds,
    pub optimizer: MinimizerOptions,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            objective: Objective::Exact,
            restarts: 5,
            bounds: FitBounds::default(),
            optimizer: MinimizerOptions::default(),
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: HawkesModel,
    /// Objective value `Σ_i ℓ_i` summed over all fitted sequences.
    pub loglik: f64,
    pub per_dimension_loglik: Vec<f64>,
    /// Whether the best restart of every dimension met a stopping tolerance.
    pub converged: bool,
    pub per_dimension_converged: Vec<bool>,
    pub n_evals: usize,
    pub objective: Objective,
}

/// Unconstrained maximum-likelihood fit over all interactions.
pub fn fit(seqs: &[EventSequence], config: &FitConfig) -> Result<FitResult> {
    fit_with_support(seqs, config, None, None)
}

/// Sum over sequences of `ℓ_i(θ_i)`.
pub fn pooled_dimension_loglik(
    params: DimensionParams<'_>,
    seqs: &[EventSequence],
    i: usize,
    objective: Objective,
) -> f64 {
    seqs.iter()
        .map(|s| dimension_log_likelihood(params, s, i, objective))
        .sum()
}

/// Maximum-likelihood fit with the interactions outside `support` fixed at
/// zero. `warm_start`, when given, is used as the first starting point.
///
/// The log-likelihood separates over receiving dimensions, so each
/// dimension's `(μ_i, α_i·, β_i)` is fitted on its own.
pub fn fit_with_support(
    seqs: &[EventSequence],
    config: &FitConfig,
    support: Option<&[Vec<bool>]>,
    warm_start: Option<&HawkesModel>,
) -> Result<FitResult> {
    let first = seqs
        .first()
        .ok_or_else(|| HawkesError::data("at least one event sequence is required"))?;
    let d = first.dim();
    if let Some(bad) = seqs.iter().find(|s| s.dim() != d) {
        return Err(HawkesError::data(format!(
            "dimension mismatch across sequences ({d} and {})",
            bad.dim()
        )));
    }
    if config.restarts == 0 {
        return Err(HawkesError::domain("restarts must be >= 1"));
    }
    let owned_support;
    let support = match support {
        Some(s) => {
            if s.len() != d || s.iter().any(|r| r.len() != d) {
                return Err(HawkesError::domain(format!("support must be {d}x{d}")));
            }
            s
        }
        None => {
            owned_support = full_support(d);
            &owned_support
        }
    };
    if let Some(w) = warm_start {
        if w.dim() != d {
            return Err(HawkesError::domain("warm start has the wrong dimension"));
        }
    }

    let total_time: f64 = seqs.iter().map(EventSequence::horizon).sum();
    let mut counts = vec![0usize; d];
    for s in seqs {
        for (c, n) in counts.iter_mut().zip(s.counts()) {
            *c += n;
        }
    }
    let rates: Vec<f64> = counts.iter().map(|&c| c as f64 / total_time).collect();
    let max_rate = rates.iter().cloned().fold(0.0, f64::max);
    let b = &config.bounds;
    let mu_max = b.mu_max.unwrap_or(10.0 * max_rate).max(10.0 * b.mu_min).max(1e-6);
    if !(b.alpha_max.is_finite() && b.alpha_max > 0.0)
        || !(b.beta_max.is_finite() && b.beta_max > b.beta_min && b.beta_min > 0.0)
        || !(mu_max.is_finite() && mu_max > b.mu_min && b.mu_min > 0.0)
    {
        return Err(HawkesError::domain("fit bounds must be finite with lower < upper"));
    }

    let problem = Problem {
        seqs,
        config,
        support,
        warm_start,
        rates: &rates,
        mu_max,
    };
    let dims: Vec<DimensionFit> = (0..d)
        .into_par_iter()
        .map(|i| problem.fit_dimension(i))
        .collect::<Result<_>>()?;

    let mut mu = Vec::with_capacity(d);
    let mut alpha = Vec::with_capacity(d * d);
    let mut beta = Vec::with_capacity(d);
    for df in &dims {
        mu.push(df.mu);
        alpha.extend_from_slice(&df.alpha);
        beta.push(df.beta);
    }
    let model = HawkesModel::from_flat(mu, alpha, beta)?;
    let per_dimension_loglik: Vec<f64> = dims.iter().map(|df| df.loglik).collect();
    let per_dimension_converged: Vec<bool> = dims.iter().map(|df| df.converged).collect();
    Ok(FitResult {
        loglik: per_dimension_loglik.iter().sum(),
        converged: per_dimension_converged.iter().all(|&c| c),
        n_evals: dims.iter().map(|df| df.n_evals).sum(),
        per_dimension_loglik,
        per_dimension_converged,
        model,
        objective: config.objective,
    })
}

struct DimensionFit {
    mu: f64,
    alpha: Vec<f64>,
    beta: f64,
    loglik: f64,
    converged: bool,
    n_evals: usize,
}

struct Problem<'a> {
    seqs: &'a [EventSequence],
    config: &'a FitConfig,
    support: &'a [Vec<bool>],
    warm_start: Option<&'a HawkesModel>,
    rates: &'a [f64],
    mu_max: f64,
}

/// Attempts at drawing a feasible random start before falling back to `α = 0`.
const START_DRAWS: usize = 50;

impl Problem<'_> {
    fn fit_dimension(&self, i: usize) -> Result<DimensionFit> {
        let d = self.support.len();
        let free: Vec<usize> = (0..d).filter(|&j| self.support[i][j]).collect();
        let nvar = free.len() + 2;
        let b = &self.config.bounds;
        let mut lower = vec![b.mu_min];
        let mut upper = vec![self.mu_max];
        for _ in &free {
            lower.push(-b.alpha_max);
            upper.push(b.alpha_max);
        }
        lower.push(b.beta_min);
        upper.push(b.beta_max);
        let bounds = Bounds { lower, upper };
        let objective = self.config.objective;

        let unpack = |x: &[f64], row: &mut [f64]| {
            row.iter_mut().for_each(|v| *v = 0.0);
            for (k, &j) in free.iter().enumerate() {
                row[j] = x[1 + k];
            }
        };
        let neg_loglik = |x: &[f64]| {
            let mut row = vec![0.0; d];
            unpack(x, &mut row);
            let params = DimensionParams {
                mu: x[0],
                alpha: &row,
                beta: x[nvar - 1],
            };
            -pooled_dimension_loglik(params, self.seqs, i, objective)
        };

        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let rate = self.rates[i].max(1e-3 * self.mu_max / 10.0).max(b.mu_min);
        let mut starts: Vec<Vec<f64>> = Vec::with_capacity(self.config.restarts);
        if let Some(w) = self.warm_start {
            let mut x = vec![w.mu()[i]];
            x.extend(free.iter().map(|&j| w.alpha(i, j)));
            x.push(w.beta()[i]);
            bounds.project(&mut x);
            starts.push(x);
        }
        while starts.len() < self.config.restarts {
            let mut chosen = None;
            for _ in 0..START_DRAWS {
                let mut x = vec![rng.random_range(0.5 * rate..2.0 * rate)];
                x.extend(free.iter().map(|_| rng.random_range(-1.0..1.0)));
                x.push(rng.random_range(0.5..5.0));
                bounds.project(&mut x);
                if neg_loglik(&x) < self.config.optimizer.barrier {
                    chosen = Some(x);
                    break;
                }
            }
            let x = chosen.unwrap_or_else(|| {
                let mut x = vec![0.0; nvar];
                x[0] = rate;
                x[nvar - 1] = rng.random_range(0.5..5.0);
                bounds.project(&mut x);
                x
            });
            starts.push(x);
        }

        let mut best: Option<(Vec<f64>, f64, bool)> = None;
        let mut n_evals = 0;
        for x0 in &starts {
            let m = minimize(neg_loglik, x0, &bounds, &self.config.optimizer);
            n_evals += m.n_evals;
            let better = match &best {
                None => true,
                Some((_, f, _)) => m.f < *f,
            };
            if better {
                best = Some((m.x, m.f, m.converged));
            }
        }
        let (x, f, converged) = best.expect("at least one restart");
        let loglik = -f;
        if is_infeasible(loglik) {
            return Err(HawkesError::numerical(format!(
                "all {} starting points of dimension {} are infeasible (best objective {loglik:e})",
                starts.len(),
                i + 1
            )));
        }
        let mut alpha = vec![0.0; d];
        unpack(&x, &mut alpha);
        Ok(DimensionFit {
            mu: x[0],
            alpha,
            beta: x[nvar - 1],
            loglik,
            converged,
            n_evals,
        })
    }
}
