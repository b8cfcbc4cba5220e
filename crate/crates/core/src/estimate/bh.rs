use crate::error::{HawkesError, Result};

/// Benjamini–Hochberg step-up procedure.
///
/// Finds the largest `K` with `p_(K) < q·K/m` and rejects every hypothesis
/// with `p ≤ p_(K)`. `m` may exceed the number of supplied p-values.
pub fn benjamini_hochberg(pvalues: &[f64], q: f64, m: usize) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&q) {
        return Err(HawkesError::domain(format!("level q = {q} must lie in [0, 1]")));
    }
    if m < pvalues.len() {
        return Err(HawkesError::domain(format!(
            "family size {m} is smaller than the number of p-values {}",
            pvalues.len()
        )));
    }
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(HawkesError::domain(format!("p-value {p} outside [0, 1]")));
    }
    let mut sorted = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cutoff = sorted
        .iter()
        .enumerate()
        .rev()
        .find(|&(k, &p)| p < q * (k + 1) as f64 / m as f64)
        .map(|(_, &p)| p);
    Ok(match cutoff {
        Some(c) => pvalues.iter().map(|&p| p <= c).collect(),
        None => vec![false; pvalues.len()],
    })
}

/// Threshold `q·k/m` for the `k`-th smallest p-value (1-based).
pub fn bh_threshold(q: f64, k: usize, m: usize) -> f64 {
    q * k as f64 / m as f64
}
