use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Basis;
use crate::sparse::CsrMatrix;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
    LeakyRelu,
}

pub const LEAKY_SLOPE: f64 = 0.01;

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_SLOPE * x
                }
            }
        }
    }

    /// Derivative given input `x` and output `y`. The kink at 0 takes the
    /// left slope.
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Self::Relu),
            "tanh" => Ok(Self::Tanh),
            "leaky_relu" | "leakyrelu" => Ok(Self::LeakyRelu),
            other => Err(Error::InvalidArgument(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Mul(Var, Var),
    Scale(Var, Var),
    AddBias(Var, Var),
    Act(Var, Activation),
    Sum(Var),
    VStack(Vec<Var>),
    Rows(Var, usize),
    SparsePoly {
        coeffs: Vec<Var>,
        basis: Basis,
        op: Arc<CsrMatrix>,
        x: Var,
        weight: Var,
    },
    WeightedCe {
        logits: Var,
        labels: Vec<f64>,
        weights: Vec<f64>,
        mask: Vec<bool>,
    },
}

#[derive(Debug, Clone)]
struct Node {
    value: DMatrix<f64>,
    op: Op,
    requires_grad: bool,
}

/// Append-only record of dense matrix operations. `backward` replays it in
/// exact reverse creation order.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<DMatrix<f64>>>,
    backward_done: bool,
}

fn shape_err(what: &str, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Error {
    Error::DimensionMismatch(format!(
        "{what}: {}x{} vs {}x{}",
        a.nrows(),
        a.ncols(),
        b.nrows(),
        b.ncols()
    ))
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

    fn push(&mut self, value: DMatrix<f64>, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    /// A trainable leaf.
    pub fn param(&mut self, value: DMatrix<f64>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// A leaf that never receives a gradient.
    pub fn constant(&mut self, value: DMatrix<f64>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn scalar_param(&mut self, v: f64) -> Var {
        self.param(DMatrix::from_element(1, 1, v))
    }

    pub fn scalar_constant(&mut self, v: f64) -> Var {
        self.constant(DMatrix::from_element(1, 1, v))
    }

    pub fn value(&self, v: Var) -> &DMatrix<f64> {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[(0, 0)]
    }

    /// Gradient of the last backward root with respect to `v`; zeros when
    /// `v` did not influence it.
    pub fn grad(&self, v: Var) -> DMatrix<f64> {
        match self.grads.get(v.0).and_then(Option::as_ref) {
            Some(g) => g.clone(),
            None => {
                let val = &self.nodes[v.0].value;
                DMatrix::zeros(val.nrows(), val.ncols())
            }
        }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.ncols() != vb.nrows() {
            return Err(shape_err("matmul", va, vb));
        }
        let value = va * vb;
        let rg = self.needs(&[a, b]);
        Ok(self.push(value, Op::MatMul(a, b), rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(shape_err("add", va, vb));
        }
        let value = va + vb;
        let rg = self.needs(&[a, b]);
        Ok(self.push(value, Op::Add(a, b), rg))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(shape_err("elementwise_mul", va, vb));
        }
        let value = va.component_mul(vb);
        let rg = self.needs(&[a, b]);
        Ok(self.push(value, Op::Mul(a, b), rg))
    }

    /// `s · a` for a 1×1 node `s`.
    pub fn scale(&mut self, a: Var, s: Var) -> Result<Var> {
        let vs = self.value(s);
        if vs.shape() != (1, 1) {
            return Err(shape_err("scale expects a scalar", self.value(a), vs));
        }
        let value = self.value(a) * vs[(0, 0)];
        let rg = self.needs(&[a, s]);
        Ok(self.push(value, Op::Scale(a, s), rg))
    }

    /// Adds the `1 × d` row `bias` to every row of `a`.
    pub fn add_bias(&mut self, a: Var, bias: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(bias));
        if vb.nrows() != 1 || vb.ncols() != va.ncols() {
            return Err(shape_err("add_bias", va, vb));
        }
        let mut value = va.clone();
        for mut row in value.row_iter_mut() {
            row += vb.row(0);
        }
        let rg = self.needs(&[a, bias]);
        Ok(self.push(value, Op::AddBias(a, bias), rg))
    }

    pub fn activation(&mut self, a: Var, kind: Activation) -> Var {
        let value = self.value(a).map(|x| kind.apply(x));
        let rg = self.needs(&[a]);
        self.push(value, Op::Act(a, kind), rg)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = DMatrix::from_element(1, 1, self.value(a).sum());
        let rg = self.needs(&[a]);
        self.push(value, Op::Sum(a), rg)
    }

    /// Stacks blocks with equal column counts on top of each other.
    pub fn vstack(&mut self, parts: &[Var]) -> Result<Var> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("vstack of nothing".into()))?;
        let cols = self.value(*first).ncols();
        let rows: usize = parts.iter().map(|p| self.value(*p).nrows()).sum();
        let mut value = DMatrix::zeros(rows, cols);
        let mut at = 0;
        for p in parts {
            let v = self.value(*p);
            if v.ncols() != cols {
                return Err(shape_err("vstack", self.value(*first), v));
            }
            value.rows_mut(at, v.nrows()).copy_from(v);
            at += v.nrows();
        }
        let rg = self.needs(parts);
        Ok(self.push(value, Op::VStack(parts.to_vec()), rg))
    }

    /// Contiguous row block `[start, start + len)`.
    pub fn rows(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let va = self.value(a);
        if start + len > va.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "rows {start}..{} of a {}-row matrix",
                start + len,
                va.nrows()
            )));
        }
        let value = va.rows(start, len).into_owned();
        let rg = self.needs(&[a]);
        Ok(self.push(value, Op::Rows(a, start), rg))
    }

    /// `Σ_k c_k B_k(w·S) x` with `B_k` the monomial `λ^k` or the shifted
    /// Chebyshev polynomial `T_k(λ − 1)`. `S` is a fixed operator; the
    /// coefficients, `w` and `x` are differentiable.
    pub fn sparse_poly_apply(
        &mut self,
        coeffs: &[Var],
        basis: Basis,
        op: Arc<CsrMatrix>,
        x: Var,
        weight: Var,
    ) -> Result<Var> {
        let vx = self.value(x);
        if !op.is_square() || op.nrows() != vx.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "operator {}x{} applied to {} rows",
                op.nrows(),
                op.ncols(),
                vx.nrows()
            )));
        }
        if self.value(weight).shape() != (1, 1) || coeffs.iter().any(|c| self.value(*c).shape() != (1, 1)) {
            return Err(Error::DimensionMismatch("coefficients and weight must be scalars".into()));
        }
        let c: Vec<f64> = coeffs.iter().map(|v| self.scalar(*v)).collect();
        let poly = crate::spectral::Polynomial { basis, coeffs: c };
        let value = poly.apply_scaled(&op, self.scalar(weight), vx, false);
        let mut parents = coeffs.to_vec();
        parents.extend([x, weight]);
        let rg = self.needs(&parents);
        Ok(self.push(
            value,
            Op::SparsePoly {
                coeffs: coeffs.to_vec(),
                basis,
                op,
                x,
                weight,
            },
            rg,
        ))
    }

    /// Mean weighted binary cross-entropy of the class-1 softmax
    /// probability over masked rows of `n × 2` logits.
    pub fn weighted_softmax_ce(&mut self, logits: Var, labels: &[f64], weights: &[f64], mask: &[bool]) -> Result<Var> {
        let z = self.value(logits);
        let n = z.nrows();
        if z.ncols() != 2 || labels.len() != n || weights.len() != n || mask.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "logits {}x{}, {} labels, {} weights, {} mask entries",
                n,
                z.ncols(),
                labels.len(),
                weights.len(),
                mask.len()
            )));
        }
        let count = mask.iter().filter(|&&m| m).count();
        if count == 0 {
            return Err(Error::EmptyMask);
        }
        let mut total = 0.0;
        for i in (0..n).filter(|&i| mask[i]) {
            let (z0, z1) = (z[(i, 0)], z[(i, 1)]);
            let m = z0.max(z1);
            let lse = m + ((z0 - m).exp() + (z1 - m).exp()).ln();
            let (log_p0, log_p1) = (z0 - lse, z1 - lse);
            total -= weights[i] * (labels[i] * log_p1 + (1.0 - labels[i]) * log_p0);
        }
        let value = DMatrix::from_element(1, 1, total / count as f64);
        let rg = self.needs(&[logits]);
        Ok(self.push(
            value,
            Op::WeightedCe {
                logits,
                labels: labels.to_vec(),
                weights: weights.to_vec(),
                mask: mask.to_vec(),
            },
            rg,
        ))
    }

    fn accumulate(grads: &mut [Option<DMatrix<f64>>], v: Var, g: DMatrix<f64>) {
        match &mut grads[v.0] {
            Some(acc) => *acc += g,
            slot => *slot = Some(g),
        }
    }

    /// Populates gradients of the scalar `root` with respect to every node.
    pub fn backward(&mut self, root: Var) -> Result<()> {
        if self.backward_done {
            return Err(Error::DoubleBackward);
        }
        let shape = self.value(root).shape();
        if shape != (1, 1) {
            return Err(Error::NonScalarRoot(shape.0, shape.1));
        }
        self.backward_done = true;
        let mut grads: Vec<Option<DMatrix<f64>>> = vec![None; self.nodes.len()];
        grads[root.0] = Some(DMatrix::from_element(1, 1, 1.0));
        for idx in (0..=root.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if node.requires_grad {
                self.propagate(&node.op, &node.value, &g, &mut grads);
            }
            grads[idx] = Some(g);
        }
        self.grads = grads;
        Ok(())
    }

    fn propagate(&self, op: &Op, out: &DMatrix<f64>, g: &DMatrix<f64>, grads: &mut [Option<DMatrix<f64>>]) {
        let rg = |v: &Var| self.nodes[v.0].requires_grad;
        match op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if rg(a) {
                    Self::accumulate(grads, *a, g * self.value(*b).transpose());
                }
                if rg(b) {
                    Self::accumulate(grads, *b, self.value(*a).transpose() * g);
                }
            }
            Op::Add(a, b) => {
                if rg(a) {
                    Self::accumulate(grads, *a, g.clone());
                }
                if rg(b) {
                    Self::accumulate(grads, *b, g.clone());
                }
            }
            Op::Mul(a, b) => {
                if rg(a) {
                    Self::accumulate(grads, *a, g.component_mul(self.value(*b)));
                }
                if rg(b) {
                    Self::accumulate(grads, *b, g.component_mul(self.value(*a)));
                }
            }
            Op::Scale(a, s) => {
                if rg(a) {
                    Self::accumulate(grads, *a, g * self.scalar(*s));
                }
                if rg(s) {
                    let d = g.dot(self.value(*a));
                    Self::accumulate(grads, *s, DMatrix::from_element(1, 1, d));
                }
            }
            Op::AddBias(a, b) => {
                if rg(a) {
                    Self::accumulate(grads, *a, g.clone());
                }
                if rg(b) {
                    let rs = g.row_sum();
                    Self::accumulate(grads, *b, DMatrix::from_row_slice(1, rs.len(), rs.as_slice()));
                }
            }
            Op::Act(a, kind) => {
                let x = self.value(*a);
                let mut d = g.clone();
                for ((dv, &xv), &yv) in d.iter_mut().zip(x.iter()).zip(out.iter()) {
                    *dv *= kind.derivative(xv, yv);
                }
                Self::accumulate(grads, *a, d);
            }
            Op::Sum(a) => {
                let va = self.value(*a);
                Self::accumulate(grads, *a, DMatrix::from_element(va.nrows(), va.ncols(), g[(0, 0)]));
            }
            Op::VStack(parts) => {
                let mut at = 0;
                for p in parts {
                    let rows = self.value(*p).nrows();
                    if rg(p) {
                        Self::accumulate(grads, *p, g.rows(at, rows).into_owned());
                    }
                    at += rows;
                }
            }
            Op::Rows(a, start) => {
                let va = self.value(*a);
                let mut d = DMatrix::zeros(va.nrows(), va.ncols());
                d.rows_mut(*start, g.nrows()).copy_from(g);
                Self::accumulate(grads, *a, d);
            }
            Op::SparsePoly {
                coeffs,
                basis,
                op,
                x,
                weight,
            } => self.propagate_poly(coeffs, *basis, op, *x, *weight, g, grads),
            Op::WeightedCe {
                logits,
                labels,
                weights,
                mask,
            } => {
                let z = self.value(*logits);
                let count = mask.iter().filter(|&&m| m).count() as f64;
                let scale = g[(0, 0)] / count;
                let mut d = DMatrix::zeros(z.nrows(), 2);
                for i in (0..z.nrows()).filter(|&i| mask[i]) {
                    let (z0, z1) = (z[(i, 0)], z[(i, 1)]);
                    let m = z0.max(z1);
                    let (e0, e1) = ((z0 - m).exp(), (z1 - m).exp());
                    let (p0, p1) = (e0 / (e0 + e1), e1 / (e0 + e1));
                    d[(i, 0)] = scale * weights[i] * (p0 - (1.0 - labels[i]));
                    d[(i, 1)] = scale * weights[i] * (p1 - labels[i]);
                }
                Self::accumulate(grads, *logits, d);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn propagate_poly(
        &self,
        coeffs: &[Var],
        basis: Basis,
        op: &CsrMatrix,
        x: Var,
        weight: Var,
        g: &DMatrix<f64>,
        grads: &mut [Option<DMatrix<f64>>],
    ) {
        let rg = |v: &Var| self.nodes[v.0].requires_grad;
        let c: Vec<f64> = coeffs.iter().map(|v| self.scalar(*v)).collect();
        let w = self.scalar(weight);
        let vx = self.value(x);
        if rg(&x) {
            let poly = crate::spectral::Polynomial { basis, coeffs: c.clone() };
            Self::accumulate(grads, x, poly.apply_scaled(op, w, g, true));
        }
        let want_coeffs = coeffs.iter().any(rg);
        if !want_coeffs && !rg(&weight) {
            return;
        }
        // Walk the basis terms B_k x and their w-derivatives D_k.
        let mut coeff_grads = vec![0.0; c.len()];
        let mut weight_grad = 0.0;
        match basis {
            Basis::Monomial => {
                // B_k = w^k S^k x, D_k = k w^{k−1} S^k x
                let mut power = vx.clone();
                for (k, &ck) in c.iter().enumerate() {
                    if k > 0 {
                        power = op.mul_dense(&power);
                    }
                    let gp = g.dot(&power);
                    coeff_grads[k] = w.powi(k as i32) * gp;
                    if k > 0 {
                        weight_grad += ck * k as f64 * w.powi(k as i32 - 1) * gp;
                    }
                }
            }
            Basis::Chebyshev => {
                // M = wS − I; T_{k+1} = 2 M T_k − T_{k−1};
                // D_{k+1} = 2 S T_k + 2 M D_k − D_{k−1}
                let shifted = |v: &DMatrix<f64>| op.mul_dense(v) * w - v;
                let mut t_prev = vx.clone();
                let mut d_prev = DMatrix::zeros(vx.nrows(), vx.ncols());
                coeff_grads[0] = g.dot(&t_prev);
                if c.len() > 1 {
                    let mut t_cur = shifted(vx);
                    let mut d_cur = op.mul_dense(vx);
                    coeff_grads[1] = g.dot(&t_cur);
                    weight_grad += c[1] * g.dot(&d_cur);
                    for k in 2..c.len() {
                        let t_next = shifted(&t_cur) * 2.0 - &t_prev;
                        let d_next = op.mul_dense(&t_cur) * 2.0 + shifted(&d_cur) * 2.0 - &d_prev;
                        coeff_grads[k] = g.dot(&t_next);
                        weight_grad += c[k] * g.dot(&d_next);
                        t_prev = std::mem::replace(&mut t_cur, t_next);
                        d_prev = std::mem::replace(&mut d_cur, d_next);
                    }
                }
            }
        }
        for (v, gk) in coeffs.iter().zip(coeff_grads) {
            if rg(v) {
                Self::accumulate(grads, *v, DMatrix::from_element(1, 1, gk));
            }
        }
        if rg(&weight) {
            Self::accumulate(grads, weight, DMatrix::from_element(1, 1, weight_grad));
        }
    }
}

/// Row-wise softmax probability of class 1 for `n × 2` logits.
pub fn class1_probabilities(logits: &DMatrix<f64>) -> Vec<f64> {
    logits
        .row_iter()
        .map(|r| {
            let (z0, z1) = (r[0], r[1]);
            1.0 / (1.0 + (z0 - z1).exp())
        })
        .collect()
}
