use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::HawkesModel;

const MAX_ITER: usize = 10_000;
const REL_TOL: f64 = 1e-10;

/// Spectral radius of the positive-part kernel mass matrix
/// `S+ = (max(0, α_ij) / β_i)_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub radius: f64,
    /// `radius < 1`, the usual sufficient condition for a stationary version.
    pub stable: bool,
}

pub fn positive_mass_matrix(model: &HawkesModel) -> Vec<f64> {
    let d = model.dim();
    let mut s = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            s[i * d + j] = model.alpha(i, j).max(0.0) / model.beta()[i];
        }
    }
    s
}

/// Power iteration on `S+ + I`.
///
/// The shift makes the Perron root strictly dominant in modulus even when
/// `S+` is periodic, and `S+` is nonnegative so the iterate stays positive.
pub fn spectral_radius(model: &HawkesModel) -> SpectralReport {
    let d = model.dim();
    let s = positive_mass_matrix(model);
    if s.iter().all(|&v| v == 0.0) {
        return SpectralReport {
            radius: 0.0,
            stable: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..1.5)).collect();
    let mut y = vec![0.0; d];
    let mut estimate = f64::NAN;
    for _ in 0..MAX_ITER {
        for i in 0..d {
            y[i] = x[i] + (0..d).map(|j| s[i * d + j] * x[j]).sum::<f64>();
        }
        let norm = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        // Collatz-Wielandt bounds on the shifted Perron root
        let (lo, hi) = x.iter().zip(&y).fold((f64::INFINITY, 0.0f64), |(lo, hi), (&xi, &yi)| {
            if xi > 0.0 {
                (lo.min(yi / xi), hi.max(yi / xi))
            } else {
                (lo, hi)
            }
        });
        let converged_bounds = hi - lo <= REL_TOL * hi;
        let converged_norm = (norm - estimate).abs() <= 1e-2 * REL_TOL * norm;
        estimate = norm;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if converged_bounds {
            estimate = 0.5 * (lo + hi);
            break;
        }
        if converged_norm {
            break;
        }
    }
    let radius = (estimate - 1.0).max(0.0);
    SpectralReport {
        radius,
        stable: radius < 1.0,
    }
}
