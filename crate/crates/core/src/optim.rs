//! Box-constrained limited-memory quasi-Newton minimisation with
//! finite-difference gradients.
//!
//! Search directions come from the L-BFGS two-loop recursion restricted to
//! the variables that are not held at a bound, and steps follow the
//! projected path `P(x + t·d)` with an Armijo backtracking rule. The
//! objective may return very large values ("barrier" values) on infeasible
//! points; the gradient then falls back to one-sided differences and the line
//! search simply backs off.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn project(&self, x: &mut [f64]) {
        for ((v, &lo), &hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(lo, hi);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when the projected gradient's max-norm falls below this.
    pub pgtol: f64,
    /// Stop when the relative decrease of one iteration falls below this.
    pub ftol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Objective values at or above this are treated as infeasible.
    pub barrier: f64,
    pub max_line_search: usize,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        MinimizerOptions {
            memory: 10,
            max_iter: 500,
            pgtol: 1e-5,
            ftol: 1e-11,
            fd_step: 1e-6,
            barrier: 1e17,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub converged: bool,
    pub n_evals: usize,
    pub iterations: usize,
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Central differences, falling back to one-sided ones next to a bound or an
/// infeasible neighbour.
fn gradient<F: FnMut(&[f64]) -> f64>(
    obj: &mut Counted<F>,
    x: &[f64],
    fx: f64,
    bounds: &Bounds,
    opts: &MinimizerOptions,
) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        let h = opts.fd_step * x[j].abs().max(1.0);
        let hi = (x[j] + h).min(bounds.upper[j]);
        let lo = (x[j] - h).max(bounds.lower[j]);
        probe[j] = hi;
        let f_hi = if hi > x[j] { obj.eval(&probe) } else { fx };
        probe[j] = lo;
        let f_lo = if lo < x[j] { obj.eval(&probe) } else { fx };
        probe[j] = x[j];
        let ok_hi = f_hi < opts.barrier;
        let ok_lo = f_lo < opts.barrier;
        g[j] = match (ok_hi, ok_lo) {
            (true, true) if hi > lo => (f_hi - f_lo) / (hi - lo),
            (true, false) if hi > x[j] => (f_hi - fx) / (hi - x[j]),
            (false, true) if lo < x[j] => (fx - f_lo) / (x[j] - lo),
            _ => 0.0,
        };
    }
    g
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Variables held at a bound by a gradient pointing outwards.
fn pinned(x: &[f64], g: &[f64], bounds: &Bounds) -> Vec<bool> {
    (0..x.len())
        .map(|j| (x[j] <= bounds.lower[j] && g[j] > 0.0) || (x[j] >= bounds.upper[j] && g[j] < 0.0))
        .collect()
}

pub fn minimize<F>(f: F, x0: &[f64], bounds: &Bounds, opts: &MinimizerOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut obj = Counted { f, evals: 0 };
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let mut fx = obj.eval(&x);
    if fx >= opts.barrier {
        return Minimum {
            x,
            f: fx,
            converged: false,
            n_evals: obj.evals,
            iterations: 0,
        };
    }
    let mut g = gradient(&mut obj, &x, fx, bounds, opts);
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let fixed = pinned(&x, &g, bounds);
        let pg_norm = g
            .iter()
            .zip(&fixed)
            .filter(|(_, &p)| !p)
            .fold(0.0f64, |a, (v, _)| a.max(v.abs()));
        if pg_norm < opts.pgtol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut q: Vec<f64> = g.iter().zip(&fixed).map(|(&v, &p)| if p { 0.0 } else { v }).collect();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = memory.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().zip(&fixed).map(|(&v, &p)| if p { 0.0 } else { -v }).collect();
        if dot(&dir, &g) >= 0.0 {
            memory.clear();
            dir = g.iter().zip(&fixed).map(|(&v, &p)| if p { 0.0 } else { -v }).collect();
        }

        let mut step = if memory.is_empty() {
            let m = dir.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            (1.0 / m).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..opts.max_line_search {
            let mut xt: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            bounds.project(&mut xt);
            if xt == x {
                break;
            }
            let ft = obj.eval(&xt);
            let predicted: f64 = g.iter().zip(xt.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if ft < opts.barrier && ft <= fx + 1e-4 * predicted {
                accepted = Some((xt, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((xt, ft)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };

        let gt = gradient(&mut obj, &xt, ft, bounds, opts);
        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            memory.push_back((s, y, 1.0 / sy));
            if memory.len() > opts.memory {
                memory.pop_front();
            }
        }
        let decrease = fx - ft;
        x = xt;
        g = gt;
        let scale = fx.abs().max(ft.abs()).max(1.0);
        fx = ft;
        if decrease <= opts.ftol * scale {
            converged = true;
            break;
        }
    }

    Minimum {
        x,
        f: fx,
        converged,
        n_evals: obj.evals,
        iterations,
    }
}
