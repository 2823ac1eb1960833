//! Limited-memory BFGS with a backtracking (Armijo) line search.
//!
//! Every accepted step strictly decreases the objective, so the recorded
//! objective history is non-increasing.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsConfig {
    pub max_iters: usize,
    /// Stop when `|f_prev - f| / max(|f_prev|, 1) < tol`.
    pub tol: f64,
    /// Stop when the gradient's max-norm falls below this.
    pub grad_tol: f64,
    pub memory: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig {
            max_iters: 200,
            tol: 1e-6,
            grad_tol: 1e-10,
            memory: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsReport {
    /// Objective at the start and after every accepted step.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_grad_norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Minimizes `f`, which returns the objective and its gradient.
pub fn minimize<F>(mut f: F, x: &mut [f64], cfg: &LbfgsConfig) -> LbfgsReport
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let (mut fx, mut g) = f(x);
    let mut history = vec![fx];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        if max_norm(&g) < cfg.grad_tol {
            converged = true;
            break;
        }
        let mut dir = two_loop(&g, &pairs);
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 || !slope.is_finite() {
            // Not a descent direction; restart from steepest descent.
            pairs.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }
        let mut step = if pairs.is_empty() {
            1.0 / max_norm(&g).max(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, d)| xi + step * d).collect();
            let (ft, gt) = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope && ft < fx {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, ft, gt)) = accepted else {
            // No decrease available at machine precision.
            converged = true;
            break;
        };

        let s: Vec<f64> = trial.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if pairs.len() == cfg.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        x.copy_from_slice(&trial);
        let prev = fx;
        fx = ft;
        g = gt;
        history.push(fx);
        iterations += 1;
        if (prev - fx).abs() / prev.abs().max(1.0) < cfg.tol {
            converged = true;
            break;
        }
    }
    LbfgsReport {
        history,
        iterations,
        converged,
        final_grad_norm: max_norm(&g),
    }
}

fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            (f, g)
        };
        let mut x = vec![-1.2, 1.0];
        let cfg = LbfgsConfig {
            max_iters: 500,
            tol: 0.0,
            grad_tol: 1e-9,
            ..Default::default()
        };
        let rep = minimize(rosen, &mut x, &cfg);
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6, "{x:?}");
        assert!(rep.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn quadratic_converges() {
        let f = |x: &[f64]| {
            let v: f64 = x.iter().enumerate().map(|(i, xi)| (i + 1) as f64 * xi * xi).sum();
            let g = x.iter().enumerate().map(|(i, xi)| 2.0 * (i + 1) as f64 * xi).collect();
            (v, g)
        };
        let mut x = vec![3.0; 10];
        let rep = minimize(f, &mut x, &LbfgsConfig::default());
        assert!(rep.converged);
        assert!(x.iter().all(|v| v.abs() < 1e-3));
    }
}
