use super::{kernels, pool};
use super::value::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Per-sample norm used by the reconstruction and constraint losses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    L2,
    L1,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul { a: Var, b: Var, m: usize, k: usize, n: usize },
    Add(Var, Var),
    AddRow { a: Var, bias: Var, n: usize },
    Sub(Var, Var),
    Mul(Var, Var),
    Relu(Var),
    Scale(Var, f64),
    Sum(Var),
    RowNormMean { a: Var, norm: Norm, rows: usize },
}

#[derive(Debug)]
struct Node {
    op: Op,
    shape: Vec<usize>,
    value: Vec<f64>,
    requires_grad: bool,
}

/// Wengert list for reverse-mode differentiation.
///
/// Nodes are appended in execution order, so inputs always precede their
/// consumers and a reverse sweep is a valid topological order. A tape is
/// meant to live for one training step.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    leaf_grads: Vec<Option<Vec<f64>>>,
}

impl Drop for Tape {
    fn drop(&mut self) {
        for n in self.nodes.drain(..) {
            pool::give(n.value);
        }
        for g in self.leaf_grads.drain(..).flatten() {
            pool::give(g);
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, shape: Vec<usize>, value: Vec<f64>, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            op,
            shape,
            value,
            requires_grad,
        });
        self.leaf_grads.push(None);
        Var(self.nodes.len() - 1)
    }

    /// Records a leaf that tracks gradients iff `t.requires_grad()`.
    pub fn leaf(&mut self, t: &Tensor) -> Var {
        self.push(Op::Leaf, t.shape().to_vec(), copied(t.data()), t.requires_grad())
    }

    /// Records a leaf that never receives gradient.
    pub fn constant(&mut self, t: &Tensor) -> Var {
        self.push(Op::Leaf, t.shape().to_vec(), copied(t.data()), false)
    }

    /// Records a leaf that always receives gradient.
    pub fn variable(&mut self, t: &Tensor) -> Var {
        self.push(Op::Leaf, t.shape().to_vec(), copied(t.data()), true)
    }

    /// Copies `v` into a new constant leaf: gradient stops here.
    pub fn detach(&mut self, v: Var) -> Var {
        let n = &self.nodes[v.0];
        let (shape, value) = (n.shape.clone(), copied(&n.value));
        self.push(Op::Leaf, shape, value, false)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    pub fn tensor(&self, v: Var) -> Tensor {
        let n = &self.nodes[v.0];
        Tensor::new(n.shape.clone(), n.value.clone()).expect("tape nodes hold valid shapes")
    }

    /// Accumulated gradient of a leaf after one or more [`Tape::backward`] calls.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.leaf_grads[v.0].as_deref()
    }

    /// Discards accumulated leaf gradients.
    pub fn zero_grad(&mut self) {
        self.leaf_grads.iter_mut().for_each(|g| *g = None);
    }

    fn rg(&self, a: Var) -> bool {
        self.nodes[a.0].requires_grad
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::Dimension {
                op,
                left: self.shape(a).to_vec(),
                right: self.shape(b).to_vec(),
            });
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::Dimension {
                op: "matmul",
                left: sa.to_vec(),
                right: sb.to_vec(),
            });
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let value = kernels::gemm(self.value(a), self.value(b), m, k, n);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(Op::MatMul { a, b, m, k, n }, vec![m, n], value, rg))
    }

    /// Elementwise sum of equal shapes, or a `[n]` bias broadcast over the rows of `[m×n]`.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa == sb {
            let value = zip_map(self.value(a), self.value(b), |x, y| x + y);
            let rg = self.rg(a) || self.rg(b);
            return Ok(self.push(Op::Add(a, b), sa.to_vec(), value, rg));
        }
        if sa.len() == 2 && sb.len() == 1 && sa[1] == sb[0] {
            let n = sb[0];
            let bias = self.value(b);
            let mut value = pool::take(self.value(a).len());
            for row in self.value(a).chunks_exact(n) {
                value.extend(row.iter().zip(bias).map(|(x, y)| x + y));
            }
            let rg = self.rg(a) || self.rg(b);
            let shape = sa.to_vec();
            return Ok(self.push(Op::AddRow { a, bias: b, n }, shape, value, rg));
        }
        Err(Error::Dimension {
            op: "add",
            left: sa.to_vec(),
            right: sb.to_vec(),
        })
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("sub", a, b)?;
        let value = zip_map(self.value(a), self.value(b), |x, y| x - y);
        let rg = self.rg(a) || self.rg(b);
        let shape = self.shape(a).to_vec();
        Ok(self.push(Op::Sub(a, b), shape, value, rg))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let value = zip_map(self.value(a), self.value(b), |x, y| x * y);
        let rg = self.rg(a) || self.rg(b);
        let shape = self.shape(a).to_vec();
        Ok(self.push(Op::Mul(a, b), shape, value, rg))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = map(self.value(a), |x| x.max(0.0));
        let rg = self.rg(a);
        let shape = self.shape(a).to_vec();
        self.push(Op::Relu(a), shape, value, rg)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = map(self.value(a), |x| x * c);
        let rg = self.rg(a);
        let shape = self.shape(a).to_vec();
        self.push(Op::Scale(a, c), shape, value, rg)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).iter().sum();
        let rg = self.rg(a);
        self.push(Op::Sum(a), vec![1], vec![s], rg)
    }

    /// Per-sample norm averaged over the batch.
    ///
    /// Rank-1 input is a single sample; otherwise the leading axis indexes samples.
    pub fn norm(&mut self, a: Var, norm: Norm) -> Var {
        let shape = self.shape(a);
        let rows = if shape.len() >= 2 { shape[0] } else { 1 };
        let width = self.value(a).len() / rows;
        let total: f64 = self
            .value(a)
            .chunks_exact(width)
            .map(|r| row_norm(r, norm))
            .sum();
        let rg = self.rg(a);
        self.push(
            Op::RowNormMean { a, norm, rows },
            vec![1],
            vec![total / rows as f64],
            rg,
        )
    }

    pub fn l2_norm(&mut self, a: Var) -> Var {
        self.norm(a, Norm::L2)
    }

    /// Propagates d`loss` back through the tape, adding into the leaf gradients.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.nodes[loss.0].value.len() != 1 {
            return Err(Error::NonScalarLoss(self.nodes[loss.0].shape.clone()));
        }
        if !self.rg(loss) {
            return Ok(());
        }
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        adj[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = adj[idx].take() else { continue };
            let node = &self.nodes[idx];
            match node.op {
                Op::Leaf => {
                    match &mut self.leaf_grads[idx] {
                        Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b),
                        slot => *slot = Some(g),
                    }
                }
                Op::MatMul { a, b, m, k, n } => {
                    if self.rg(a) {
                        let da = kernels::gemm_nt(&g, self.value(b), m, n, k);
                        send(&mut adj, a, da);
                    }
                    if self.rg(b) {
                        let db = kernels::gemm_tn(self.value(a), &g, m, k, n);
                        send(&mut adj, b, db);
                    }
                    pool::give(g);
                }
                Op::Add(a, b) => {
                    if self.rg(a) {
                        send(&mut adj, a, copied(&g));
                    }
                    if self.rg(b) {
                        send(&mut adj, b, g);
                    }
                }
                Op::AddRow { a, bias, n } => {
                    if self.rg(bias) {
                        let mut db = vec![0.0; n];
                        for row in g.chunks_exact(n) {
                            db.iter_mut().zip(row).for_each(|(d, v)| *d += v);
                        }
                        send(&mut adj, bias, db);
                    }
                    if self.rg(a) {
                        send(&mut adj, a, g);
                    }
                }
                Op::Sub(a, b) => {
                    if self.rg(b) {
                        send(&mut adj, b, map(&g, |v| -v));
                    }
                    if self.rg(a) {
                        send(&mut adj, a, g);
                    }
                }
                Op::Mul(a, b) => {
                    if self.rg(a) {
                        let da = zip_map(&g, self.value(b), |x, y| x * y);
                        send(&mut adj, a, da);
                    }
                    if self.rg(b) {
                        let db = zip_map(&g, self.value(a), |x, y| x * y);
                        send(&mut adj, b, db);
                    }
                    pool::give(g);
                }
                Op::Relu(a) => {
                    if self.rg(a) {
                        let da = zip_map(&g, self.value(a), |d, x| if x > 0.0 { d } else { 0.0 });
                        send(&mut adj, a, da);
                    }
                    pool::give(g);
                }
                Op::Scale(a, c) => {
                    if self.rg(a) {
                        send(&mut adj, a, map(&g, |v| v * c));
                    }
                    pool::give(g);
                }
                Op::Sum(a) => {
                    if self.rg(a) {
                        let len = self.value(a).len();
                        send(&mut adj, a, vec![g[0]; len]);
                    }
                }
                Op::RowNormMean { a, norm, rows } => {
                    if self.rg(a) {
                        let x = self.value(a);
                        let width = x.len() / rows;
                        let scale = g[0] / rows as f64;
                        let mut da = pool::zeroed(x.len());
                        for (dr, xr) in da.chunks_exact_mut(width).zip(x.chunks_exact(width)) {
                            match norm {
                                Norm::L2 => {
                                    let len = row_norm(xr, Norm::L2);
                                    // zero-norm rows get the zero subgradient
                                    if len > 0.0 {
                                        dr.iter_mut()
                                            .zip(xr)
                                            .for_each(|(d, v)| *d = v / len * scale);
                                    }
                                }
                                Norm::L1 => {
                                    dr.iter_mut().zip(xr).for_each(|(d, &v)| {
                                        *d = if v > 0.0 {
                                            scale
                                        } else if v < 0.0 {
                                            -scale
                                        } else {
                                            0.0
                                        }
                                    });
                                }
                            }
                        }
                        send(&mut adj, a, da);
                    }
                }
            }
        }
        Ok(())
    }
}

fn send(adj: &mut [Option<Vec<f64>>], to: Var, g: Vec<f64>) {
    match &mut adj[to.0] {
        Some(acc) => {
            acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            pool::give(g);
        }
        slot => *slot = Some(g),
    }
}

fn copied(a: &[f64]) -> Vec<f64> {
    let mut v = pool::take(a.len());
    v.extend_from_slice(a);
    v
}

fn map(a: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut v = pool::take(a.len());
    v.extend(a.iter().map(|&x| f(x)));
    v
}

fn zip_map(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut v = pool::take(a.len());
    v.extend(a.iter().zip(b).map(|(&x, &y)| f(x, y)));
    v
}

pub(crate) fn row_norm(row: &[f64], norm: Norm) -> f64 {
    match norm {
        Norm::L2 => row.iter().map(|v| v * v).sum::<f64>().sqrt(),
        Norm::L1 => row.iter().map(|v| v.abs()).sum(),
    }
}
