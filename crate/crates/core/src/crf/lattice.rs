//! Log-space dynamic programs over a first-order chain.

/// Scores for one sentence: `unary[t * k + y]`, `trans[a * k + b]`.
pub struct ChainScores<'a> {
    pub k: usize,
    pub unary: &'a [f64],
    pub trans: &'a [f64],
    pub start: &'a [f64],
    pub end: &'a [f64],
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl ChainScores<'_> {
    pub fn len(&self) -> usize {
        self.unary.len() / self.k
    }

    /// Forward table `alpha[t * k + y]`.
    pub fn forward(&self) -> Vec<f64> {
        let (k, n) = (self.k, self.len());
        let mut alpha = vec![0.0; n * k];
        if n == 0 {
            return alpha;
        }
        for y in 0..k {
            alpha[y] = self.start[y] + self.unary[y];
        }
        let mut buf = vec![0.0; k];
        for t in 1..n {
            for y in 0..k {
                for (a, b) in buf.iter_mut().enumerate() {
                    *b = alpha[(t - 1) * k + a] + self.trans[a * k + y];
                }
                alpha[t * k + y] = log_sum_exp(&buf) + self.unary[t * k + y];
            }
        }
        alpha
    }

    /// Backward table `beta[t * k + y]`, including the end scores.
    pub fn backward(&self) -> Vec<f64> {
        let (k, n) = (self.k, self.len());
        let mut beta = vec![0.0; n * k];
        if n == 0 {
            return beta;
        }
        beta[(n - 1) * k..].copy_from_slice(self.end);
        let mut buf = vec![0.0; k];
        for t in (0..n - 1).rev() {
            for y in 0..k {
                for (b, v) in buf.iter_mut().enumerate() {
                    *v = self.trans[y * k + b] + self.unary[(t + 1) * k + b] + beta[(t + 1) * k + b];
                }
                beta[t * k + y] = log_sum_exp(&buf);
            }
        }
        beta
    }

    pub fn log_partition_from(&self, alpha: &[f64]) -> f64 {
        let (k, n) = (self.k, self.len());
        if n == 0 {
            return 0.0;
        }
        let last: Vec<f64> = (0..k).map(|y| alpha[(n - 1) * k + y] + self.end[y]).collect();
        log_sum_exp(&last)
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition_from(&self.forward())
    }

    pub fn score(&self, tags: &[usize]) -> f64 {
        let k = self.k;
        let Some((&first, _)) = tags.split_first() else {
            return 0.0;
        };
        let mut s = self.start[first] + self.end[*tags.last().unwrap()];
        for (t, &y) in tags.iter().enumerate() {
            s += self.unary[t * k + y];
            if t > 0 {
                s += self.trans[tags[t - 1] * k + y];
            }
        }
        s
    }

    /// Exact argmax. Ties go to the lowest tag index at every step.
    pub fn viterbi(&self) -> (Vec<usize>, f64) {
        let (k, n) = (self.k, self.len());
        if n == 0 {
            return (Vec::new(), 0.0);
        }
        let mut delta = vec![0.0; n * k];
        let mut back = vec![0usize; n * k];
        for y in 0..k {
            delta[y] = self.start[y] + self.unary[y];
        }
        for t in 1..n {
            for y in 0..k {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for a in 0..k {
                    let v = delta[(t - 1) * k + a] + self.trans[a * k + y];
                    if v > best {
                        best = v;
                        arg = a;
                    }
                }
                delta[t * k + y] = best + self.unary[t * k + y];
                back[t * k + y] = arg;
            }
        }
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for y in 0..k {
            let v = delta[(n - 1) * k + y] + self.end[y];
            if v > best {
                best = v;
                arg = y;
            }
        }
        let mut path = vec![0; n];
        path[n - 1] = arg;
        for t in (1..n).rev() {
            path[t - 1] = back[t * k + path[t]];
        }
        (path, best)
    }

    /// Posterior marginals `p[t * k + y]` and the log partition.
    pub fn marginals(&self) -> (Vec<f64>, f64) {
        let alpha = self.forward();
        let beta = self.backward();
        let log_z = self.log_partition_from(&alpha);
        let m = alpha
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a + b - log_z).exp())
            .collect();
        (m, log_z)
    }
}
