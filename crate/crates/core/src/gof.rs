//! Time-rescaling goodness of fit.
//!
//! Under the true model the compensator increments between consecutive
//! events of one dimension (or of the superposed process, with the total
//! compensator) are i.i.d. unit exponentials. Each stream is checked with a
//! one-sample Kolmogorov–Smirnov test; the `d + 1` hypotheses are then
//! filtered with Benjamini–Hochberg.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compensator::{compensator_path, CompensatorPath};
use crate::error::{HawkesError, Result};
use crate::estimate::benjamini_hochberg;
use crate::estimate::bh::bh_threshold;
use crate::events::EventSequence;
use crate::model::HawkesModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Dimension(usize),
    Total,
}

/// Compensator increments between consecutive events of `target`. With
/// `include_first`, `Λ(T_1)` itself is prepended as an extra interval.
pub fn time_rescale(model: &HawkesModel, seq: &EventSequence, target: Target, include_first: bool) -> Result<Vec<f64>> {
    if model.dim() != seq.dim() {
        return Err(HawkesError::domain(format!(
            "model has dimension {} but the sequence has {}",
            model.dim(),
            seq.dim()
        )));
    }
    if let Target::Dimension(i) = target {
        model.check_index(i)?;
    }
    let path = compensator_path(model, seq);
    increments(&path, seq, target, include_first)
}

fn increments(path: &CompensatorPath, seq: &EventSequence, target: Target, include_first: bool) -> Result<Vec<f64>> {
    let points: Vec<f64> = match target {
        Target::Dimension(i) => seq
            .marks()
            .iter()
            .zip(&path.at_events[i])
            .filter(|(&m, _)| m == i)
            .map(|(_, &v)| v)
            .collect(),
        Target::Total => path.total_at_events(),
    };
    let needed = if include_first { 1 } else { 2 };
    if points.len() < needed {
        let name = match target {
            Target::Dimension(i) => format!("dimension {}", i + 1),
            Target::Total => "the total process".to_string(),
        };
        return Err(HawkesError::data(format!(
            "{name} has {} events, at least {needed} needed for time rescaling",
            points.len()
        )));
    }
    let mut out = Vec::with_capacity(points.len());
    if include_first {
        out.push(points[0]);
    }
    out.extend(points.windows(2).map(|w| (w[1] - w[0]).max(0.0)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample two-sided Kolmogorov–Smirnov test against `Exp(1)`.
pub fn ks_exp_test(sample: &[f64]) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(HawkesError::data("KS test on an empty sample"));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(HawkesError::data("KS sample contains NaN"));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d = 0.0f64;
    for (k, &v) in x.iter().enumerate() {
        let f = if v <= 0.0 { 0.0 } else { -(-v).exp_m1() };
        d = d.max((k + 1) as f64 / n - f).max(f - k as f64 / n);
    }
    let sn = n.sqrt();
    let p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
    Ok(KsResult { statistic: d, p_value })
}

/// `P(K > λ)` for the Kolmogorov distribution, from the alternating series
/// `2 Σ (-1)^{j-1} exp(-2 j² λ²)` truncated at 100 terms.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let a = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut prev_term = 0.0f64;
    for j in 1..=100 {
        let term = (a * (j * j) as f64).exp();
        sum += sign * term;
        if term <= 1e-10 * prev_term.max(f64::MIN_POSITIVE) || term < 1e-300 {
            return (2.0 * sum).clamp(0.0, 1.0);
        }
        sign = -sign;
        prev_term = term;
    }
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofOptions {
    /// Benjamini–Hochberg level over the `d + 1` hypotheses.
    pub q: f64,
    pub include_first: bool,
}

impl Default for GofOptions {
    fn default() -> Self {
        GofOptions {
            q: 0.05,
            include_first: false,
        }
    }
}

/// Averages over test sequences. Index `d` of the `d + 1` vectors is the
/// total-process hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    /// Mean p-value of `H_i`; `None` when no sequence had enough events.
    pub p: Vec<Option<f64>>,
    pub p_tot: Option<f64>,
    pub ks_stats: Vec<Option<f64>>,
    pub bh_rejected: Vec<bool>,
    pub n_intervals: Vec<usize>,
    pub n_sequences: Vec<usize>,
    pub q: f64,
    pub warnings: Vec<String>,
}

impl GofReport {
    /// `p_1, …, p_d, p_tot` as one vector.
    pub fn all_p(&self) -> Vec<Option<f64>> {
        let mut v = self.p.clone();
        v.push(self.p_tot);
        v
    }

    /// Mean of all available p-values.
    pub fn mean_p(&self) -> Option<f64> {
        let present: Vec<f64> = self.all_p().into_iter().flatten().collect();
        if present.is_empty() {
            None
        } else {
            Some(present.iter().sum::<f64>() / present.len() as f64)
        }
    }

    /// Hypotheses sorted by p-value with their step-up thresholds `q·k/(d+1)`.
    pub fn ordered(&self) -> Vec<OrderedHypothesis> {
        let d = self.p.len();
        let mut rows: Vec<(usize, f64)> = self
            .all_p()
            .into_iter()
            .enumerate()
            .filter_map(|(h, p)| p.map(|p| (h, p)))
            .collect();
        rows.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        rows.into_iter()
            .enumerate()
            .map(|(k, (h, p))| OrderedHypothesis {
                hypothesis: if h == d {
                    "H_tot".to_string()
                } else {
                    format!("H_{}", h + 1)
                },
                p,
                threshold: bh_threshold(self.q, k + 1, d + 1),
                rejected: self.bh_rejected[h],
            })
            .collect()
    }

    pub fn ordered_csv(&self) -> String {
        let mut out = String::from("hypothesis,p,threshold,rejected\n");
        for r in self.ordered() {
            out.push_str(&format!(
                "{},{:e},{:e},{}\n",
                r.hypothesis, r.p, r.threshold, r.rejected
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedHypothesis {
    pub hypothesis: String,
    pub p: f64,
    pub threshold: f64,
    pub rejected: bool,
}

type SingleTest = Result<(KsResult, usize)>;

/// Per-sequence `(KS statistic, p-value)` for `H_1, …, H_d, H_tot`.
pub fn sequence_tests(
    model: &HawkesModel,
    seq: &EventSequence,
    include_first: bool,
) -> Result<Vec<Result<(KsResult, usize)>>> {
    if model.dim() != seq.dim() {
        return Err(HawkesError::domain(format!(
            "model has dimension {} but the sequence has {}",
            model.dim(),
            seq.dim()
        )));
    }
    let d = model.dim();
    let path = compensator_path(model, seq);
    Ok((0..=d)
        .map(|h| {
            let target = if h == d { Target::Total } else { Target::Dimension(h) };
            let sample = increments(&path, seq, target, include_first)?;
            Ok((ks_exp_test(&sample)?, sample.len()))
        })
        .collect())
}

/// Averages per-sequence p-values and KS statistics over `test_seqs`, then
/// applies Benjamini–Hochberg with family size `d + 1`.
///
/// The test sequences must not have been used to fit `model`.
pub fn gof_report(model: &HawkesModel, test_seqs: &[EventSequence], opts: &GofOptions) -> Result<GofReport> {
    if test_seqs.is_empty() {
        return Err(HawkesError::data("no test sequences"));
    }
    if !(0.0..=1.0).contains(&opts.q) {
        return Err(HawkesError::domain(format!("level q = {} must lie in [0, 1]", opts.q)));
    }
    let d = model.dim();
    let per_seq: Vec<Result<Vec<SingleTest>>> = test_seqs
        .par_iter()
        .map(|s| sequence_tests(model, s, opts.include_first))
        .collect();

    let mut p_sum = vec![0.0; d + 1];
    let mut ks_sum = vec![0.0; d + 1];
    let mut n_seq = vec![0usize; d + 1];
    let mut n_int = vec![0usize; d + 1];
    let mut warnings = Vec::new();
    for (s, res) in per_seq.into_iter().enumerate() {
        match res {
            Err(e) => warnings.push(format!("test sequence {}: skipped ({e})", s + 1)),
            Ok(tests) => {
                for (h, t) in tests.into_iter().enumerate() {
                    match t {
                        Ok((ks, n)) => {
                            p_sum[h] += ks.p_value;
                            ks_sum[h] += ks.statistic;
                            n_seq[h] += 1;
                            n_int[h] += n;
                        }
                        Err(e) => warnings.push(format!("test sequence {}: {e}", s + 1)),
                    }
                }
            }
        }
    }
    if n_seq.iter().all(|&n| n == 0) {
        return Err(HawkesError::data(format!(
            "no test sequence could be evaluated: {}",
            warnings.join("; ")
        )));
    }
    let mean = |sum: &[f64]| -> Vec<Option<f64>> {
        sum.iter()
            .zip(&n_seq)
            .map(|(&s, &n)| (n > 0).then(|| s / n as f64))
            .collect()
    };
    let mut p = mean(&p_sum);
    let ks_stats = mean(&ks_sum);

    let present: Vec<(usize, f64)> = p.iter().enumerate().filter_map(|(h, v)| v.map(|v| (h, v))).collect();
    let pvals: Vec<f64> = present.iter().map(|&(_, v)| v).collect();
    let decisions = benjamini_hochberg(&pvals, opts.q, d + 1)?;
    let mut bh_rejected = vec![false; d + 1];
    for (&(h, _), r) in present.iter().zip(decisions) {
        bh_rejected[h] = r;
    }
    let p_tot = p.pop().expect("d + 1 entries");
    Ok(GofReport {
        p,
        p_tot,
        ks_stats,
        bh_rejected,
        n_intervals: n_int,
        n_sequences: n_seq,
        q: opts.q,
        warnings,
    })
}
