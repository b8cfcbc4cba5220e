use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::bh::benjamini_hochberg;
use super::fit::{fit_with_support, FitConfig, FitResult, Support};
use crate::error::{HawkesError, Result};
use crate::events::EventSequence;
use crate::gof::{gof_report, GofOptions};
use crate::model::HawkesModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    MleEps,
    Cfe,
    Cfst,
}

/// Quantity ranked by the cumulative threshold rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdScore {
    #[default]
    Alpha,
    /// `|α_ij / β_i|`, the L1 mass of the kernel.
    KernelMass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportSelection {
    pub support: Support,
    pub method: SelectionMethod,
    /// `ε` for the threshold rule, `γ` for the confidence rules.
    pub level: f64,
    pub refit: FitResult,
    /// Confidence intervals per entry (confidence rules only).
    pub intervals: Option<Vec<Vec<(f64, f64)>>>,
    /// Two-sided p-values per entry (confidence rules only).
    pub pvalues: Option<Vec<Vec<f64>>>,
}

impl SupportSelection {
    /// `-1`, `0` or `+1` per entry of the refitted interaction matrix.
    pub fn sign_matrix(&self) -> Vec<Vec<i8>> {
        sign_matrix(&self.refit.model, &self.support)
    }
}

pub fn sign_matrix(model: &HawkesModel, support: &[Vec<bool>]) -> Vec<Vec<i8>> {
    let d = model.dim();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let a = model.alpha(i, j);
                    if !support[i][j] || a == 0.0 {
                        0
                    } else if a > 0.0 {
                        1
                    } else {
                        -1
                    }
                })
                .collect()
        })
        .collect()
}

/// Copy of `model` with every interaction outside `support` set to zero.
pub fn zero_outside(model: &HawkesModel, support: &[Vec<bool>]) -> HawkesModel {
    let d = model.dim();
    let alpha: Vec<f64> = (0..d * d)
        .map(|k| {
            if support[k / d][k % d] {
                model.alpha_flat()[k]
            } else {
                0.0
            }
        })
        .collect();
    HawkesModel::from_flat(model.mu().to_vec(), alpha, model.beta().to_vec())
        .expect("zeroing interactions keeps a model valid")
}

/// Support kept by the cumulative rule: entries are ranked by increasing
/// score and the `k`-th is dropped when the cumulative sum `s_k < ε·S`.
pub fn threshold_support(model: &HawkesModel, epsilon: f64, score: ThresholdScore) -> Result<Support> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(HawkesError::domain(format!("epsilon = {epsilon} must lie in [0, 1)")));
    }
    let d = model.dim();
    let values: Vec<f64> = (0..d * d)
        .map(|k| {
            let (i, j) = (k / d, k % d);
            match score {
                ThresholdScore::Alpha => model.alpha(i, j).abs(),
                ThresholdScore::KernelMass => (model.alpha(i, j) / model.beta()[i]).abs(),
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..d * d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let total: f64 = order.iter().map(|&k| values[k]).sum();
    let mut support = vec![vec![true; d]; d];
    let mut cumulative = 0.0;
    for &k in &order {
        cumulative += values[k];
        if cumulative < epsilon * total {
            support[k / d][k % d] = false;
        } else {
            break;
        }
    }
    Ok(support)
}

/// MLE-ε: thresholds `fit` and refits with the dropped entries held at zero,
/// warm-started from the thresholded point.
pub fn threshold_select(
    fit: &FitResult,
    seqs: &[EventSequence],
    epsilon: f64,
    config: &FitConfig,
    score: ThresholdScore,
) -> Result<SupportSelection> {
    let support = threshold_support(&fit.model, epsilon, score)?;
    let refit = refit_on_support(&fit.model, seqs, &support, config)?;
    Ok(SupportSelection {
        support,
        method: SelectionMethod::MleEps,
        level: epsilon,
        refit,
        intervals: None,
        pvalues: None,
    })
}

/// Refit on a fixed support, warm-started from `start` with entries outside
/// the support zeroed.
pub fn refit_on_support(
    start: &HawkesModel,
    seqs: &[EventSequence],
    support: &[Vec<bool>],
    config: &FitConfig,
) -> Result<FitResult> {
    let warm = zero_outside(start, support);
    fit_with_support(seqs, config, Some(support), Some(&warm))
}

/// One unconstrained fit with the data it was trained on.
#[derive(Debug, Clone, Copy)]
pub struct TrainedFit<'a> {
    pub fit: &'a FitResult,
    pub train: &'a [EventSequence],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonChoice {
    pub epsilon: f64,
    /// `(ε, mean p-value)` for every candidate, in increasing `ε`.
    pub scores: Vec<(f64, f64)>,
    /// Selections at the chosen `ε`, one per fit.
    pub selections: Vec<SupportSelection>,
}

/// Picks the `ε` whose thresholded refits maximise the mean of all
/// per-dimension and total p-values on `test_seqs`. Ties go to the larger
/// `ε`. Refits are shared between candidates that produce the same support.
pub fn choose_epsilon(
    fits: &[TrainedFit<'_>],
    test_seqs: &[EventSequence],
    candidates: &[f64],
    config: &FitConfig,
    score: ThresholdScore,
    gof: &GofOptions,
) -> Result<EpsilonChoice> {
    if candidates.is_empty() {
        return Err(HawkesError::domain("no candidate epsilon values"));
    }
    if fits.is_empty() {
        return Err(HawkesError::data("no fits to threshold"));
    }
    let mut eps: Vec<f64> = candidates.to_vec();
    eps.sort_by(f64::total_cmp);
    eps.dedup();

    // per fit: the support and refit score at every candidate
    let per_fit: Vec<Vec<(Support, FitResult, Option<f64>)>> = fits
        .par_iter()
        .map(|tf| {
            let mut cache: HashMap<Support, (FitResult, Option<f64>)> = HashMap::new();
            eps.iter()
                .map(|&e| {
                    let support = threshold_support(&tf.fit.model, e, score)?;
                    if !cache.contains_key(&support) {
                        let refit = refit_on_support(&tf.fit.model, tf.train, &support, config)?;
                        let report = gof_report(&refit.model, test_seqs, gof)?;
                        cache.insert(support.clone(), (refit, report.mean_p()));
                    }
                    let (refit, p) = &cache[&support];
                    Ok((support, refit.clone(), *p))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut scores = Vec::with_capacity(eps.len());
    let mut best: Option<(usize, f64)> = None;
    for (c, &e) in eps.iter().enumerate() {
        let present: Vec<f64> = per_fit.iter().filter_map(|row| row[c].2).collect();
        let mean = if present.is_empty() {
            f64::NAN
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        };
        scores.push((e, mean));
        if !mean.is_nan() && best.is_none_or(|(_, m)| mean >= m) {
            best = Some((c, mean));
        }
    }
    let chosen = best.map_or(eps.len() - 1, |(c, _)| c);
    let epsilon = eps[chosen];
    let selections = per_fit
        .into_iter()
        .map(|mut row| {
            let (support, refit, _) = row.swap_remove(chosen);
            SupportSelection {
                support,
                method: SelectionMethod::MleEps,
                level: epsilon,
                refit,
                intervals: None,
                pvalues: None,
            }
        })
        .collect();
    Ok(EpsilonChoice {
        epsilon,
        scores,
        selections,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Empirical,
    Student,
}

/// Interval and two-sided p-value of one entry from its `n` estimates.
pub fn confidence_interval(estimates: &[f64], gamma: f64, kind: IntervalKind) -> Result<((f64, f64), f64)> {
    let n = estimates.len();
    if n < 2 {
        return Err(HawkesError::domain(
            "confidence intervals need at least 2 realizations; use resample_concatenate to build more",
        ));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(HawkesError::domain(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    let nf = n as f64;
    match kind {
        IntervalKind::Empirical => {
            let lo = (gamma * nf / 2.0).floor() as usize;
            let hi = ((1.0 - gamma / 2.0) * nf).ceil() as usize;
            if lo < 1 || hi > n {
                return Err(HawkesError::domain(format!(
                    "{n} realizations are too few for an empirical interval at gamma = {gamma} \
                     (need at least {})",
                    (2.0 / gamma).ceil()
                )));
            }
            let mut sorted = estimates.to_vec();
            sorted.sort_by(f64::total_cmp);
            let below = estimates.iter().filter(|&&a| a <= 0.0).count();
            let above = estimates.iter().filter(|&&a| a >= 0.0).count();
            let p = (2.0 * below.min(above) as f64 / nf).min(1.0);
            Ok(((sorted[lo - 1], sorted[hi - 1]), p))
        }
        IntervalKind::Student => {
            let mean = estimates.iter().sum::<f64>() / nf;
            let var = estimates.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            let se = var.sqrt() / nf.sqrt();
            let t = StudentsT::new(0.0, 1.0, nf - 1.0).map_err(|e| HawkesError::numerical(e.to_string()))?;
            if se == 0.0 {
                let p = if mean == 0.0 { 1.0 } else { 0.0 };
                return Ok(((mean, mean), p));
            }
            let half = t.inverse_cdf(1.0 - gamma / 2.0) * se;
            let p = (2.0 * t.sf(mean.abs() / se)).min(1.0);
            Ok(((mean - half, mean + half), p))
        }
    }
}

/// Support chosen by a confidence rule, with the per-entry intervals and
/// two-sided p-values it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSupport {
    pub support: Support,
    pub intervals: Vec<Vec<(f64, f64)>>,
    pub pvalues: Vec<Vec<f64>>,
}

/// Keeps `(i, j)` when its interval over the per-realization estimates
/// excludes zero and Benjamini–Hochberg at level `γ` over the `d²` entries
/// rejects `α_ij = 0`.
pub fn confidence_support(models: &[&HawkesModel], gamma: f64, kind: IntervalKind) -> Result<ConfidenceSupport> {
    let first = models.first().ok_or_else(|| HawkesError::data("no fits"))?;
    let d = first.dim();
    if models.iter().any(|m| m.dim() != d) {
        return Err(HawkesError::data("fits have different dimensions"));
    }
    let mut intervals = vec![vec![(0.0, 0.0); d]; d];
    let mut pvalues = vec![vec![1.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let est: Vec<f64> = models.iter().map(|m| m.alpha(i, j)).collect();
            let (ci, p) = confidence_interval(&est, gamma, kind)?;
            intervals[i][j] = ci;
            pvalues[i][j] = p;
        }
    }
    let flat: Vec<f64> = pvalues.iter().flatten().copied().collect();
    let rejected = benjamini_hochberg(&flat, gamma, d * d)?;
    let support = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let (lo, hi) = intervals[i][j];
                    (lo > 0.0 || hi < 0.0) && rejected[i * d + j]
                })
                .collect()
        })
        .collect();
    Ok(ConfidenceSupport {
        support,
        intervals,
        pvalues,
    })
}

/// Entrywise mean of several models.
pub fn mean_model(models: &[&HawkesModel]) -> Result<HawkesModel> {
    let first = models
        .first()
        .ok_or_else(|| HawkesError::data("no models to average"))?;
    let n = models.len() as f64;
    let avg = |get: &dyn Fn(&HawkesModel) -> &[f64]| -> Vec<f64> {
        let mut acc = vec![0.0; get(first).len()];
        for m in models {
            for (a, v) in acc.iter_mut().zip(get(m)) {
                *a += v / n;
            }
        }
        acc
    };
    HawkesModel::from_flat(avg(&|m| m.mu()), avg(&|m| m.alpha_flat()), avg(&|m| m.beta()))
}

/// CfE / CfSt over `n` per-realization fits. Survivors are refitted on all
/// `seqs` pooled, warm-started from the mean of the estimates.
pub fn confidence_select(
    fits: &[FitResult],
    seqs: &[EventSequence],
    gamma: f64,
    kind: IntervalKind,
    config: &FitConfig,
) -> Result<SupportSelection> {
    let models: Vec<&HawkesModel> = fits.iter().map(|f| &f.model).collect();
    let cs = confidence_support(&models, gamma, kind)?;
    let refit = refit_on_support(&mean_model(&models)?, seqs, &cs.support, config)?;
    Ok(SupportSelection {
        support: cs.support,
        method: match kind {
            IntervalKind::Empirical => SelectionMethod::Cfe,
            IntervalKind::Student => SelectionMethod::Cfst,
        },
        level: gamma,
        refit,
        intervals: Some(cs.intervals),
        pvalues: Some(cs.pvalues),
    })
}
