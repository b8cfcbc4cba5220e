//! Reference implementations that share no code with the library: direct
//! kernel sums, adaptive Gauss–Kronrod quadrature and naive likelihoods.
#![allow(dead_code)]

use hawkes_core::likelihood::{per_dimension_log_likelihood, Objective};
use hawkes_core::{simulate, EventSequence, HawkesModel, SimConfig, StopRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `λ*_i(u)` by summing every kernel. With `strict`, events at `u` itself are
/// excluded (left limit). Terms below `1e-30` of their jump are dropped.
pub fn direct_underlying(model: &HawkesModel, seq: &EventSequence, i: usize, u: f64, strict: bool) -> f64 {
    let beta = model.beta()[i];
    let mut v = model.mu()[i];
    for (t, m) in seq.iter() {
        if t > u || (strict && t == u) {
            break;
        }
        let x = beta * (u - t);
        if x < 69.0 {
            v += model.alpha(i, m) * (-x).exp();
        }
    }
    v
}

/// Derivative of `λ*_i(u)` with respect to `α_ij` (left limit).
pub fn direct_kernel_sum(model: &HawkesModel, seq: &EventSequence, i: usize, j: usize, u: f64) -> f64 {
    let beta = model.beta()[i];
    seq.iter()
        .take_while(|&(t, _)| t < u)
        .filter(|&(_, m)| m == j)
        .map(|(t, _)| (-beta * (u - t)).exp())
        .sum()
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WK[7] * fc;
    let mut gauss = GK_WG[3] * fc;
    for k in 0..7 {
        let dx = h * GK_X[k];
        let s = f(c - dx) + f(c + dx);
        kronrod += GK_WK[k] * s;
        if k % 2 == 1 {
            gauss += GK_WG[k / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature with absolute tolerance `tol`.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth >= 60 || (b - a) <= 1e-15 * a.abs().max(1.0) {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    if b <= a {
        return 0.0;
    }
    rec(f, a, b, tol, 0)
}

/// Breakpoints `0, T_1, …, T_k ≤ t, t` between which the integrand is continuous.
fn pieces(seq: &EventSequence, t: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    pts.extend(seq.times().iter().copied().filter(|&s| s > 0.0 && s < t));
    pts.push(t);
    pts
}

/// Splits `[a, b]` at the sign change of the monotone `λ*_i`, located by
/// bisection, so that every piece has a smooth integrand.
fn smooth_pieces(model: &HawkesModel, seq: &EventSequence, i: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    // right limit at `a`, left limit at `b`
    let f = |u: f64| direct_underlying(model, seq, i, u, u > a);
    let (ya, yb) = (f(a), direct_underlying(model, seq, i, b, true));
    if (ya < 0.0) != (yb < 0.0) {
        let root = bisect(f, a, b);
        vec![(a, root), (root, b)]
    } else {
        vec![(a, b)]
    }
}

/// `∫_0^t g(λ*_i(u)) du` by quadrature over each inter-event interval.
pub fn quad_of_intensity(
    model: &HawkesModel,
    seq: &EventSequence,
    i: usize,
    t: f64,
    g: fn(f64) -> f64,
    rel_tol: f64,
) -> f64 {
    let pts = pieces(seq, t);
    let scale = model.mu()[i] * t + 1.0;
    let tol = rel_tol * scale / pts.len() as f64;
    pts.windows(2)
        .flat_map(|w| smooth_pieces(model, seq, i, w[0], w[1]))
        .map(|(a, b)| integrate(&mut |u| g(direct_underlying(model, seq, i, u, true)), a, b, tol))
        .sum()
}

/// Oracle compensator `∫_0^t max(0, λ*_i)`.
pub fn quad_compensator(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> f64 {
    quad_of_intensity(model, seq, i, t, |v| v.max(0.0), 1e-12)
}

/// Oracle `∫_0^t λ*_i` (no positive part).
pub fn quad_signed(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> f64 {
    quad_of_intensity(model, seq, i, t, |v| v, 1e-12)
}

/// `O(N²)` log-likelihood: direct left-limit sums plus quadrature
/// compensators. `None` when some event intensity is not positive.
pub fn naive_log_likelihood(model: &HawkesModel, seq: &EventSequence) -> Option<f64> {
    let mut total = 0.0;
    for i in 0..model.dim() {
        for (t, m) in seq.iter() {
            if m == i {
                let v = direct_underlying(model, seq, i, t, true);
                if v <= 0.0 {
                    return None;
                }
                total += v.ln();
            }
        }
        total -= quad_compensator(model, seq, i, seq.horizon());
    }
    Some(total)
}

/// Analytic gradient of `ℓ_i` in `(μ_i, α_i1, …, α_id)`: event terms from
/// direct sums, compensator terms `∫ 1{λ* > 0} ∂λ*` by quadrature.
pub fn analytic_gradient(model: &HawkesModel, seq: &EventSequence, i: usize) -> Vec<f64> {
    let d = model.dim();
    let mut g = vec![0.0; d + 1];
    for (t, m) in seq.iter() {
        if m == i {
            let lam = direct_underlying(model, seq, i, t, true);
            g[0] += 1.0 / lam;
            for j in 0..d {
                g[1 + j] += direct_kernel_sum(model, seq, i, j, t) / lam;
            }
        }
    }
    let pts = pieces(seq, seq.horizon());
    let tol = 1e-13 * (seq.horizon() + 1.0) / pts.len() as f64;
    for (a, b) in pts.windows(2).flat_map(|w| smooth_pieces(model, seq, i, w[0], w[1])) {
        let active = |u: f64| direct_underlying(model, seq, i, u, true) > 0.0;
        g[0] -= integrate(&mut |u| if active(u) { 1.0 } else { 0.0 }, a, b, tol);
        for j in 0..d {
            g[1 + j] -= integrate(
                &mut |u| {
                    if active(u) {
                        direct_kernel_sum(model, seq, i, j, u)
                    } else {
                        0.0
                    }
                },
                a,
                b,
                tol,
            );
        }
    }
    g
}

/// Largest eigenvalue modulus of `(α⁺_ij / β_i)` from a dense Schur decomposition.
pub fn eigen_radius(model: &HawkesModel) -> f64 {
    let d = model.dim();
    let m = nalgebra::DMatrix::from_fn(d, d, |i, j| model.alpha(i, j).max(0.0) / model.beta()[i]);
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ordering condition by scanning every pair of events.
pub fn diagnostic_scan(seq: &EventSequence) -> Vec<Vec<bool>> {
    let d = seq.dim();
    let marks = seq.marks();
    let mut out = vec![vec![false; d]; d];
    for a in 0..marks.len() {
        for b in a + 1..marks.len() {
            let j = marks[a];
            let i = marks[b];
            if i != j && marks[a..b].iter().all(|&m| m == j) {
                out[i][j] = true;
            }
        }
    }
    out
}

pub fn random_model<R: Rng>(rng: &mut R, d: usize) -> HawkesModel {
    let mu = (0..d).map(|_| rng.random_range(0.1..2.0)).collect();
    let alpha = (0..d * d).map(|_| rng.random_range(-3.0..3.0)).collect();
    let beta = (0..d).map(|_| rng.random_range(0.2..5.0)).collect();
    HawkesModel::from_flat(mu, alpha, beta).unwrap()
}

/// Random model whose excitation matrix has spectral radius below `0.8`.
pub fn random_stable_model<R: Rng>(rng: &mut R, d: usize) -> HawkesModel {
    loop {
        let m = random_model(rng, d);
        if eigen_radius(&m) < 0.8 {
            return m;
        }
    }
}

/// Uniform event times on `(0, horizon)` with uniform marks.
pub fn random_sequence<R: Rng>(rng: &mut R, d: usize, n: usize, horizon: f64) -> EventSequence {
    let mut times: Vec<f64> = (0..n).map(|_| rng.random_range(1e-6..horizon)).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let marks = (0..times.len()).map(|_| rng.random_range(0..d)).collect();
    EventSequence::new(times, marks, d, horizon).unwrap()
}

/// Zero of a monotone function on `[lo, hi]` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Random model with uniform random events; sizes vary with the seed.
pub fn instance(seed: u64, max_d: usize, max_n: usize) -> (HawkesModel, EventSequence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 1 + (seed as usize % max_d);
    let n = 1 + (seed as usize / max_d) % max_n;
    let m = random_model(&mut rng, d);
    let s = random_sequence(&mut rng, d, n, 1.0 + 0.2 * n as f64);
    (m, s)
}

pub fn simulated_instance(seed: u64, max_d: usize, max_n: usize) -> (HawkesModel, EventSequence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 1 + (seed as usize % max_d);
    let n = 2 + (seed as usize / max_d) % max_n;
    let m = random_stable_model(&mut rng, d);
    let s = simulate(&SimConfig::new(m.clone(), StopRule::Events(n), seed)).unwrap();
    (m, s)
}

/// Central differences of the library likelihood against the analytic
/// gradient at points with positive event intensities.
pub fn gradient_agreement(seed: u64) -> Option<f64> {
    let (m, s) = simulated_instance(seed, 3, 60);
    let d = m.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        let exact = analytic_gradient(&m, &s, i);
        let ll = |mm: &HawkesModel| per_dimension_log_likelihood(mm, &s, Objective::Exact)[i];
        for (k, &g) in exact.iter().enumerate() {
            let (base, set): (f64, Box<dyn Fn(f64) -> HawkesModel>) = if k == 0 {
                let m2 = m.clone();
                (
                    m.mu()[i],
                    Box::new(move |v| {
                        let mut mu = m2.mu().to_vec();
                        mu[i] = v;
                        HawkesModel::from_flat(mu, m2.alpha_flat().to_vec(), m2.beta().to_vec()).unwrap()
                    }),
                )
            } else {
                let m2 = m.clone();
                (m.alpha(i, k - 1), Box::new(move |v| m2.with_alpha(i, k - 1, v)))
            };
            let h = 1e-6 * base.abs().max(1.0);
            let fd = (ll(&set(base + h)) - ll(&set(base - h))) / (2.0 * h);
            if !fd.is_finite() || fd.abs() > 1e12 {
                return None;
            }
            worst = worst.max((fd - g).abs() / g.abs().max(1.0));
        }
    }
    Some(worst)
}
