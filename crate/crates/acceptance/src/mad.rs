//! Modified-adsorption fixed point by direct linear solve.

use glossa::semisup::{LabelGraph, PropagationConfig};

/// Solves the fixed-point equations directly by Gaussian elimination, one
/// linear system per label.
pub fn solve_fixed_point(g: &LabelGraph, cfg: &PropagationConfig) -> Vec<Vec<f64>> {
    let n = g.len();
    let k = g.labels.len();
    let r = 1.0 / k as f64;
    let mut out = vec![vec![0.0; k]; n];
    for l in 0..k {
        let mut a = vec![vec![0.0; n + 1]; n];
        for v in 0..n {
            let (p_inj, y) = match g.seeds.get(&v) {
                Some(s) => (1.0, s.dist[l]),
                None => (0.0, 0.0),
            };
            let deg: f64 = g.edges[v].iter().map(|e| e.1).sum();
            a[v][v] = cfg.mu1 * p_inj + cfg.mu2 * deg + cfg.mu3;
            for &(u, w) in &g.edges[v] {
                a[v][u] -= cfg.mu2 * w;
            }
            a[v][n] = cfg.mu1 * p_inj * y + cfg.mu3 * (1.0 - 0.9 * p_inj) * r;
        }
        for c in 0..n {
            let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, piv);
            for i in 0..n {
                if i != c {
                    let f = a[i][c] / a[c][c];
                    for j in c..=n {
                        a[i][j] -= f * a[c][j];
                    }
                }
            }
        }
        for v in 0..n {
            out[v][l] = a[v][n] / a[v][v];
        }
    }
    for d in &mut out {
        let s: f64 = d.iter().sum();
        d.iter_mut().for_each(|x| *x /= s);
    }
    out
}
