//! Parameters of a multivariate exponential Hawkes process whose decay rate
//! depends only on the receiving dimension.
//!
//! The underlying (signed) intensity of dimension `i` is
//!
//! ```text
//! λ*_i(t) = μ_i + Σ_j Σ_{T^j_k ≤ t} α_ij · exp(-β_i (t - T^j_k))
//! ```
//!
//! and the conditional intensity is its positive part. `α_ij` is the effect
//! of an event of dimension `j` on dimension `i` and may be negative.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct HawkesModel {
    mu: Vec<f64>,
    /// Row-major `d × d`.
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    mu: Vec<f64>,
    alpha: Vec<Vec<f64>>,
    beta: Vec<f64>,
}

impl TryFrom<RawModel> for HawkesModel {
    type Error = HawkesError;

    fn try_from(raw: RawModel) -> Result<Self> {
        HawkesModel::new(raw.mu, raw.alpha, raw.beta)
    }
}

impl From<HawkesModel> for RawModel {
    fn from(m: HawkesModel) -> Self {
        RawModel {
            alpha: m.alpha_rows(),
            mu: m.mu,
            beta: m.beta,
        }
    }
}

impl HawkesModel {
    /// Builds a model, checking shapes and `μ_i > 0`, `β_i > 0`.
    pub fn new(mu: Vec<f64>, alpha: Vec<Vec<f64>>, beta: Vec<f64>) -> Result<Self> {
        let d = mu.len();
        if d == 0 {
            return Err(HawkesError::domain("model dimension must be at least 1"));
        }
        if beta.len() != d {
            return Err(HawkesError::domain(format!(
                "beta has {} entries, expected {d}",
                beta.len()
            )));
        }
        if alpha.len() != d || alpha.iter().any(|row| row.len() != d) {
            return Err(HawkesError::domain(format!("alpha must be a {d}x{d} matrix")));
        }
        let flat: Vec<f64> = alpha.into_iter().flatten().collect();
        Self::from_flat(mu, flat, beta)
    }

    /// Builds a model from a row-major interaction matrix.
    pub fn from_flat(mu: Vec<f64>, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let d = mu.len();
        if d == 0 || beta.len() != d || alpha.len() != d * d {
            return Err(HawkesError::domain("inconsistent model shapes"));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return Err(HawkesError::domain(format!("mu[{i}] = {m} must be finite and > 0")));
            }
        }
        for (i, &b) in beta.iter().enumerate() {
            if !(b.is_finite() && b > 0.0) {
                return Err(HawkesError::domain(format!("beta[{i}] = {b} must be finite and > 0")));
            }
        }
        if let Some(a) = alpha.iter().find(|a| !a.is_finite()) {
            return Err(HawkesError::domain(format!("alpha entry {a} is not finite")));
        }
        Ok(HawkesModel { mu, alpha, beta })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        self.alpha[i * self.dim() + j]
    }

    /// Interactions received by dimension `i`, i.e. `(α_i1, …, α_id)`.
    pub fn alpha_row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.alpha[i * d..(i + 1) * d]
    }

    pub fn alpha_flat(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_rows(&self) -> Vec<Vec<f64>> {
        self.alpha.chunks(self.dim()).map(<[f64]>::to_vec).collect()
    }

    /// Parameters `θ_i = (μ_i, α_i·, β_i)` of one dimension.
    pub fn dimension(&self, i: usize) -> DimensionParams<'_> {
        DimensionParams {
            mu: self.mu[i],
            alpha: self.alpha_row(i),
            beta: self.beta[i],
        }
    }

    /// Returns a copy with `α_ij` replaced.
    pub fn with_alpha(&self, i: usize, j: usize, value: f64) -> Self {
        let mut out = self.clone();
        let d = self.dim();
        out.alpha[i * d + j] = value;
        out
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(HawkesError::domain(format!(
                "dimension index {i} out of range for d = {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Borrowed view of the parameters governing one dimension.
#[derive(Debug, Clone, Copy)]
pub struct DimensionParams<'a> {
    pub mu: f64,
    pub alpha: &'a [f64],
    pub beta: f64,
}
