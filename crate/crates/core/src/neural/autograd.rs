//! A small reverse-mode differentiation tape over dense vectors.
//!
//! Parameters live outside the tape in a [`ParamStore`]; the tape records
//! the operations of one forward pass and [`Tape::backward`] accumulates
//! parameter gradients into a [`Gradients`] buffer.

use serde::{Deserialize, Serialize};

/// Row-major matrix; vectors are `n × 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    pub tensors: Vec<Tensor>,
}

impl ParamStore {
    pub fn len(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn zero_grads(&self) -> Gradients {
        Gradients {
            tensors: self
                .tensors
                .iter()
                .map(|t| vec![0.0; t.data.len()])
                .collect(),
            touched_rows: vec![Vec::new(); self.tensors.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
    /// Rows written through [`Tape::lookup`], per tensor, possibly repeated.
    pub touched_rows: Vec<Vec<usize>>,
}

/// Deliberately wrong backward rules, for checking that gradient checks
/// catch them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    SigmoidBackward,
    TanhBackward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Lookup { param: usize, row: usize },
    Zeros,
    MatVec { param: usize, x: Var },
    AddParam { a: Var, param: usize },
    Add(Var, Var),
    Mul(Var, Var),
    Sigmoid(Var),
    Tanh(Var),
    Slice { a: Var, start: usize },
    Concat(Var, Var),
    LogSoftmax(Var),
    Pick { a: Var, index: usize },
}

struct Node {
    value: Vec<f64>,
    op: Op,
}

pub struct Tape<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
    fault: Option<Fault>,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
            fault: None,
        }
    }

    #[doc(hidden)]
    pub fn with_fault(params: &'p ParamStore, fault: Option<Fault>) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
            fault,
        }
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    /// One row of a parameter matrix, e.g. an embedding.
    pub fn lookup(&mut self, param: usize, row: usize) -> Var {
        let value = self.params.tensors[param].row(row).to_vec();
        self.push(value, Op::Lookup { param, row })
    }

    pub fn zeros(&mut self, n: usize) -> Var {
        self.push(vec![0.0; n], Op::Zeros)
    }

    /// `W x` for parameter matrix `W`.
    pub fn matvec(&mut self, param: usize, x: Var) -> Var {
        let w = &self.params.tensors[param];
        let xv = &self.nodes[x.0].value;
        debug_assert_eq!(w.cols, xv.len());
        let value = (0..w.rows)
            .map(|r| w.row(r).iter().zip(xv).map(|(a, b)| a * b).sum())
            .collect();
        self.push(value, Op::MatVec { param, x })
    }

    pub fn add_param(&mut self, a: Var, param: usize) -> Var {
        let b = &self.params.tensors[param].data;
        let value = self.nodes[a.0].value.iter().zip(b).map(|(x, y)| x + y).collect();
        self.push(value, Op::AddParam { a, param })
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let value = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x + y)
            .collect();
        self.push(value, Op::Add(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let value = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x * y)
            .collect();
        self.push(value, Op::Mul(a, b))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.iter().map(|&x| sigmoid(x)).collect();
        self.push(value, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.iter().map(|x| x.tanh()).collect();
        self.push(value, Op::Tanh(a))
    }

    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Var {
        let value = self.nodes[a.0].value[start..start + len].to_vec();
        self.push(value, Op::Slice { a, start })
    }

    pub fn concat(&mut self, a: Var, b: Var) -> Var {
        let mut value = self.nodes[a.0].value.clone();
        value.extend_from_slice(&self.nodes[b.0].value);
        self.push(value, Op::Concat(a, b))
    }

    /// Numerically stable log-softmax (max subtraction).
    pub fn log_softmax(&mut self, a: Var) -> Var {
        let x = &self.nodes[a.0].value;
        let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + x.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        let value = x.iter().map(|v| v - lse).collect();
        self.push(value, Op::LogSoftmax(a))
    }

    /// Scalar `-a[index]`: the negative log-likelihood when `a` holds
    /// log-probabilities.
    pub fn neg_pick(&mut self, a: Var, index: usize) -> Var {
        let value = vec![-self.nodes[a.0].value[index]];
        self.push(value, Op::Pick { a, index })
    }

    /// Sum of scalars.
    pub fn sum(&mut self, xs: &[Var]) -> Var {
        let mut it = xs.iter().copied();
        let first = it.next().expect("sum of no terms");
        it.fold(first, |acc, x| self.add(acc, x))
    }

    /// Back-propagates from scalar `loss`, adding into `grads`.
    pub fn backward(&self, loss: Var, grads: &mut Gradients) {
        let mut adj: Vec<Vec<f64>> = self.nodes.iter().map(|n| vec![0.0; n.value.len()]).collect();
        adj[loss.0][0] = 1.0;
        for i in (0..=loss.0).rev() {
            let g = std::mem::take(&mut adj[i]);
            if g.iter().all(|v| *v == 0.0) {
                continue;
            }
            let node = &self.nodes[i];
            match node.op {
                Op::Zeros => {}
                Op::Lookup { param, row } => {
                    let cols = self.params.tensors[param].cols;
                    let dst = &mut grads.tensors[param][row * cols..(row + 1) * cols];
                    for (d, v) in dst.iter_mut().zip(&g) {
                        *d += v;
                    }
                    grads.touched_rows[param].push(row);
                }
                Op::MatVec { param, x } => {
                    let w = &self.params.tensors[param];
                    let xv = &self.nodes[x.0].value;
                    let gw = &mut grads.tensors[param];
                    for (r, gr) in g.iter().enumerate() {
                        if *gr == 0.0 {
                            continue;
                        }
                        let base = r * w.cols;
                        for (c, xc) in xv.iter().enumerate() {
                            gw[base + c] += gr * xc;
                        }
                    }
                    let gx = &mut adj[x.0];
                    for (r, gr) in g.iter().enumerate() {
                        if *gr == 0.0 {
                            continue;
                        }
                        for (c, wv) in w.row(r).iter().enumerate() {
                            gx[c] += gr * wv;
                        }
                    }
                }
                Op::AddParam { a, param } => {
                    for (d, v) in grads.tensors[param].iter_mut().zip(&g) {
                        *d += v;
                    }
                    accumulate(&mut adj[a.0], &g);
                }
                Op::Add(a, b) => {
                    accumulate(&mut adj[a.0], &g);
                    accumulate(&mut adj[b.0], &g);
                }
                Op::Mul(a, b) => {
                    let av = &self.nodes[a.0].value;
                    let bv = &self.nodes[b.0].value;
                    let ga: Vec<f64> = g.iter().zip(bv).map(|(x, y)| x * y).collect();
                    let gb: Vec<f64> = g.iter().zip(av).map(|(x, y)| x * y).collect();
                    accumulate(&mut adj[a.0], &ga);
                    accumulate(&mut adj[b.0], &gb);
                }
                Op::Sigmoid(a) => {
                    let faulty = self.fault == Some(Fault::SigmoidBackward);
                    let d: Vec<f64> = node
                        .value
                        .iter()
                        .zip(&g)
                        .map(|(s, gv)| if faulty { gv * s } else { gv * s * (1.0 - s) })
                        .collect();
                    accumulate(&mut adj[a.0], &d);
                }
                Op::Tanh(a) => {
                    let faulty = self.fault == Some(Fault::TanhBackward);
                    let d: Vec<f64> = node
                        .value
                        .iter()
                        .zip(&g)
                        .map(|(t, gv)| if faulty { gv * (1.0 - t) } else { gv * (1.0 - t * t) })
                        .collect();
                    accumulate(&mut adj[a.0], &d);
                }
                Op::Slice { a, start } => {
                    for (d, v) in adj[a.0][start..].iter_mut().zip(&g) {
                        *d += v;
                    }
                }
                Op::Concat(a, b) => {
                    let n = self.nodes[a.0].value.len();
                    accumulate(&mut adj[a.0], &g[..n]);
                    accumulate(&mut adj[b.0], &g[n..]);
                }
                Op::LogSoftmax(a) => {
                    let total: f64 = g.iter().sum();
                    let d: Vec<f64> = node
                        .value
                        .iter()
                        .zip(&g)
                        .map(|(lp, gv)| gv - lp.exp() * total)
                        .collect();
                    accumulate(&mut adj[a.0], &d);
                }
                Op::Pick { a, index } => {
                    adj[a.0][index] -= g[0];
                }
            }
        }
    }
}

fn accumulate(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
