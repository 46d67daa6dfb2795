use std::rc::Rc;

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddScalar(Var),
    MulScalar(Var, f64),
    Neg(Var),
    Sigmoid(Var),
    Softplus(Var),
    Relu(Var),
    Tanh(Var),
    Ln(Var),
    Exp(Var),
    Clamp { x: Var, lo: f64, hi: f64 },
    Concat(Vec<Var>),
    Sum(Var),
    Mean(Var),
    SegmentSum { x: Var, segments: Rc<[usize]> },
    Gather { x: Var, rows: Rc<[usize]> },
    Transpose(Var),
    Reshape(Var),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Define-by-run expression graph.
///
/// Every operation appends a node, so node order is already a topological
/// order and [`Tape::backward`] is a single reverse sweep.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every recorded node that required one.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    pub fn get(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(Option::as_ref)
    }

    /// Gradient for `var`, zero-filled when the loss does not depend on it.
    pub fn wrt(&self, var: Var) -> Tensor {
        match self.get(var) {
            Some(g) => g.clone(),
            None => Tensor::zeros(&self.shapes[var.0]),
        }
    }
}

/// How the two operands of a binary elementwise op line up.
#[derive(Clone, Copy)]
enum Broadcast {
    Same,
    LeftScalar,
    RightScalar,
}

fn broadcast(op: &'static str, a: &Tensor, b: &Tensor) -> Result<Broadcast> {
    if a.shape() == b.shape() {
        Ok(Broadcast::Same)
    } else if a.numel() == 1 {
        Ok(Broadcast::LeftScalar)
    } else if b.numel() == 1 {
        Ok(Broadcast::RightScalar)
    } else {
        Err(Error::shape(
            op,
            format!("{:?} vs {:?}", a.shape(), b.shape()),
        ))
    }
}

fn binary(a: &Tensor, b: &Tensor, mode: Broadcast, f: impl Fn(f64, f64) -> f64) -> Tensor {
    match mode {
        Broadcast::Same => {
            let data = a
                .data()
                .iter()
                .zip(b.data())
                .map(|(&x, &y)| f(x, y))
                .collect();
            Tensor::new(a.shape().to_vec(), data).expect("same shape")
        }
        Broadcast::LeftScalar => {
            let x = a.data()[0];
            b.map(|y| f(x, y))
        }
        Broadcast::RightScalar => {
            let y = b.data()[0];
            a.map(|x| f(x, y))
        }
    }
}

/// Reduces a gradient computed at the broadcast shape back onto an operand.
fn unbroadcast(grad: Tensor, target: &Tensor) -> Tensor {
    if grad.shape() == target.shape() {
        grad
    } else {
        Tensor::new(target.shape().to_vec(), vec![grad.sum()]).expect("scalar operand")
    }
}

/// `log(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn rows_and_width(t: &Tensor) -> (usize, usize) {
    match t.shape() {
        [] => (1, 1),
        [n] => (*n, 1),
        [n, rest @ ..] => (*n, rest.iter().product()),
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

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    /// Records an input or parameter.
    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            needs_grad: requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Records a leaf that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    fn push(
        &mut self,
        op_name: &'static str,
        value: Tensor,
        op: Op,
        parents: &[Var],
    ) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NonFinite { op: op_name });
        }
        let needs_grad = parents.iter().any(|p| self.nodes[p.0].needs_grad);
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        self.push("matmul", value, Op::MatMul(a, b), &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        let value = binary(x, y, broadcast("add", x, y)?, |p, q| p + q);
        self.push("add", value, Op::Add(a, b), &[a, b])
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        let value = binary(x, y, broadcast("sub", x, y)?, |p, q| p - q);
        self.push("sub", value, Op::Sub(a, b), &[a, b])
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        let value = binary(x, y, broadcast("mul", x, y)?, |p, q| p * q);
        self.push("mul", value, Op::Mul(a, b), &[a, b])
    }

    pub fn add_scalar(&mut self, x: Var, c: f64) -> Result<Var> {
        let value = self.value(x).map(|v| v + c);
        self.push("add_scalar", value, Op::AddScalar(x), &[x])
    }

    pub fn mul_scalar(&mut self, x: Var, c: f64) -> Result<Var> {
        let value = self.value(x).map(|v| v * c);
        self.push("mul_scalar", value, Op::MulScalar(x, c), &[x])
    }

    pub fn neg(&mut self, x: Var) -> Result<Var> {
        let value = self.value(x).map(|v| -v);
        self.push("neg", value, Op::Neg(x), &[x])
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        let value = self.value(x).map(sigmoid);
        self.push("sigmoid", value, Op::Sigmoid(x), &[x])
    }

    pub fn softplus(&mut self, x: Var) -> Result<Var> {
        let value = self.value(x).map(softplus);
        self.push("softplus", value, Op::Softplus(x), &[x])
    }

    pub fn relu(&mut self, x: Var) -> Result<Var> {
        let value = self.value(x).map(|v| v.max(0.0));
        self.push("relu", value, Op::Relu(x), &[x])
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var> {
        let value = self.value(x).map(f64::tanh);
        self.push("tanh", value, Op::Tanh(x), &[x])
    }

    pub fn ln(&mut self, x: Var) -> Result<Var> {
        let input = self.value(x);
        if let Some(bad) = input.data().iter().find(|&&v| v <= 0.0) {
            return Err(Error::domain(
                "ln",
                format!("logarithm of non-positive value {bad}"),
            ));
        }
        let value = input.map(f64::ln);
        self.push("ln", value, Op::Ln(x), &[x])
    }

    pub fn exp(&mut self, x: Var) -> Result<Var> {
        let value = self.value(x).map(f64::exp);
        self.push("exp", value, Op::Exp(x), &[x])
    }

    /// Clamps into `[lo, hi]`; the gradient is zero where clamping is active.
    pub fn clamp(&mut self, x: Var, lo: f64, hi: f64) -> Result<Var> {
        if lo > hi {
            return Err(Error::invalid(format!("clamp bounds {lo} > {hi}")));
        }
        let value = self.value(x).map(|v| v.clamp(lo, hi));
        self.push("clamp", value, Op::Clamp { x, lo, hi }, &[x])
    }

    /// Concatenates matrices with equal row counts along the column axis.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::invalid("concat of zero tensors"));
        }
        let rows = self.value(parts[0]).dims2("concat")?.0;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (r, c) = self.value(p).dims2("concat")?;
            if r != rows {
                return Err(Error::shape(
                    "concat",
                    format!("row counts {rows} and {r} differ"),
                ));
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(rows * total);
        for i in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row(i));
            }
        }
        let value = Tensor::matrix(rows, total, data)?;
        self.push("concat", value, Op::Concat(parts.to_vec()), parts)
    }

    /// Sum of all entries as a scalar.
    pub fn sum(&mut self, x: Var) -> Result<Var> {
        let value = Tensor::scalar(self.value(x).sum());
        self.push("sum", value, Op::Sum(x), &[x])
    }

    /// Mean of all entries as a scalar.
    pub fn mean(&mut self, x: Var) -> Result<Var> {
        let t = self.value(x);
        if t.numel() == 0 {
            return Err(Error::invalid("mean of an empty tensor"));
        }
        let value = Tensor::scalar(t.sum() / t.numel() as f64);
        self.push("mean", value, Op::Mean(x), &[x])
    }

    /// Scatter-add of rows: `out[segments[i]] += x[i]`, with `num_segments` output rows.
    pub fn segment_sum(
        &mut self,
        x: Var,
        segments: Rc<[usize]>,
        num_segments: usize,
    ) -> Result<Var> {
        let input = self.value(x);
        let (rows, width) = rows_and_width(input);
        if segments.len() != rows {
            return Err(Error::shape(
                "segment_sum",
                format!("{} segment ids for {rows} rows", segments.len()),
            ));
        }
        if let Some(&s) = segments.iter().find(|&&s| s >= num_segments) {
            return Err(Error::shape(
                "segment_sum",
                format!("segment id {s} out of range for {num_segments} segments"),
            ));
        }
        let mut out = vec![0.0; num_segments * width];
        for (i, &s) in segments.iter().enumerate() {
            let src = &input.data()[i * width..(i + 1) * width];
            for (o, v) in out[s * width..(s + 1) * width].iter_mut().zip(src) {
                *o += v;
            }
        }
        let mut shape = input.shape().to_vec();
        if shape.is_empty() {
            shape.push(num_segments);
        } else {
            shape[0] = num_segments;
        }
        let value = Tensor::new(shape, out)?;
        self.push("segment_sum", value, Op::SegmentSum { x, segments }, &[x])
    }

    /// Selects rows `x[rows[i]]`, repeating as needed.
    pub fn gather(&mut self, x: Var, rows: Rc<[usize]>) -> Result<Var> {
        let input = self.value(x);
        let (n, width) = rows_and_width(input);
        if let Some(&r) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::shape(
                "gather",
                format!("row {r} out of range for {n} rows"),
            ));
        }
        let mut data = Vec::with_capacity(rows.len() * width);
        for &r in rows.iter() {
            data.extend_from_slice(&input.data()[r * width..(r + 1) * width]);
        }
        let mut shape = input.shape().to_vec();
        if shape.is_empty() {
            shape.push(rows.len());
        } else {
            shape[0] = rows.len();
        }
        let value = Tensor::new(shape, data)?;
        self.push("gather", value, Op::Gather { x, rows }, &[x])
    }

    pub fn transpose(&mut self, x: Var) -> Result<Var> {
        let value = self.value(x).transpose()?;
        self.push("transpose", value, Op::Transpose(x), &[x])
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let value = self.value(x).reshape(shape)?;
        self.push("reshape", value, Op::Reshape(x), &[x])
    }

    /// Reverse sweep from a scalar `loss`, consuming the tape.
    pub fn backward(self, loss: Var) -> Result<Gradients> {
        let loss_value = &self.nodes[loss.0].value;
        if loss_value.numel() != 1 {
            return Err(Error::shape(
                "backward",
                format!("loss must be scalar, got shape {:?}", loss_value.shape()),
            ));
        }
        let n = self.nodes.len();
        let mut grads: Vec<Option<Tensor>> = vec![None; n];
        grads[loss.0] = Some(Tensor::new(loss_value.shape().to_vec(), vec![1.0])?);

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = grads[i].take() else {
                continue;
            };
            self.propagate(node, &g, &mut grads)?;
            grads[i] = Some(g);
        }

        let shapes = self
            .nodes
            .iter()
            .map(|n| n.value.shape().to_vec())
            .collect();
        // keep only leaves that asked for gradients plus intermediate values
        for (slot, node) in grads.iter_mut().zip(&self.nodes) {
            if !node.needs_grad {
                *slot = None;
            }
        }
        Ok(Gradients { grads, shapes })
    }

    fn propagate(&self, node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) -> Result<()> {
        let val = |v: Var| &self.nodes[v.0].value;
        let mut acc = |v: Var, contribution: Tensor| {
            if !self.nodes[v.0].needs_grad {
                return;
            }
            match &mut grads[v.0] {
                Some(existing) => existing.add_assign(&contribution),
                slot @ None => *slot = Some(contribution),
            }
        };
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (av, bv) = (val(*a), val(*b));
                if self.nodes[a.0].needs_grad {
                    acc(*a, g.matmul(&bv.transpose()?)?);
                }
                if self.nodes[b.0].needs_grad {
                    acc(*b, av.transpose()?.matmul(g)?);
                }
            }
            Op::Add(a, b) => {
                acc(*a, unbroadcast(g.clone(), val(*a)));
                acc(*b, unbroadcast(g.clone(), val(*b)));
            }
            Op::Sub(a, b) => {
                acc(*a, unbroadcast(g.clone(), val(*a)));
                acc(*b, unbroadcast(g.map(|v| -v), val(*b)));
            }
            Op::Mul(a, b) => {
                let (av, bv) = (val(*a), val(*b));
                let mode = broadcast("mul", av, bv)?;
                let ga = match mode {
                    Broadcast::Same => g.zip_map(bv, "mul", |x, y| x * y)?,
                    Broadcast::LeftScalar => Tensor::new(
                        av.shape().to_vec(),
                        vec![g.data().iter().zip(bv.data()).map(|(x, y)| x * y).sum()],
                    )?,
                    Broadcast::RightScalar => g.map(|x| x * bv.data()[0]),
                };
                let gb = match mode {
                    Broadcast::Same => g.zip_map(av, "mul", |x, y| x * y)?,
                    Broadcast::LeftScalar => g.map(|x| x * av.data()[0]),
                    Broadcast::RightScalar => Tensor::new(
                        bv.shape().to_vec(),
                        vec![g.data().iter().zip(av.data()).map(|(x, y)| x * y).sum()],
                    )?,
                };
                acc(*a, ga);
                acc(*b, gb);
            }
            Op::AddScalar(x) | Op::Reshape(x) => {
                let shape = val(*x).shape().to_vec();
                acc(*x, Tensor::new(shape, g.data().to_vec())?);
            }
            Op::MulScalar(x, c) => acc(*x, g.map(|v| v * c)),
            Op::Neg(x) => acc(*x, g.map(|v| -v)),
            Op::Sigmoid(x) => {
                let d = node
                    .value
                    .zip_map(g, "sigmoid", |s, gv| gv * s * (1.0 - s))?;
                acc(*x, d);
            }
            Op::Softplus(x) => acc(*x, val(*x).zip_map(g, "softplus", |v, gv| gv * sigmoid(v))?),
            Op::Relu(x) => acc(
                *x,
                val(*x).zip_map(g, "relu", |v, gv| if v > 0.0 { gv } else { 0.0 })?,
            ),
            Op::Tanh(x) => acc(
                *x,
                node.value.zip_map(g, "tanh", |t, gv| gv * (1.0 - t * t))?,
            ),
            Op::Ln(x) => acc(*x, val(*x).zip_map(g, "ln", |v, gv| gv / v)?),
            Op::Exp(x) => acc(*x, node.value.zip_map(g, "exp", |e, gv| gv * e)?),
            Op::Clamp { x, lo, hi } => acc(
                *x,
                val(*x).zip_map(
                    g,
                    "clamp",
                    |v, gv| if v < *lo || v > *hi { 0.0 } else { gv },
                )?,
            ),
            Op::Concat(parts) => {
                let (rows, total) = g.dims2("concat")?;
                let mut offset = 0;
                for &p in parts {
                    let (_, w) = val(p).dims2("concat")?;
                    if self.nodes[p.0].needs_grad {
                        let mut data = Vec::with_capacity(rows * w);
                        for i in 0..rows {
                            data.extend_from_slice(
                                &g.data()[i * total + offset..i * total + offset + w],
                            );
                        }
                        acc(p, Tensor::matrix(rows, w, data)?);
                    }
                    offset += w;
                }
            }
            Op::Sum(x) => {
                let gv = g.data()[0];
                acc(*x, Tensor::full(val(*x).shape(), gv));
            }
            Op::Mean(x) => {
                let input = val(*x);
                let gv = g.data()[0] / input.numel() as f64;
                acc(*x, Tensor::full(input.shape(), gv));
            }
            Op::SegmentSum { x, segments } => {
                let input = val(*x);
                let (_, width) = rows_and_width(input);
                let mut data = Vec::with_capacity(input.numel());
                for &s in segments.iter() {
                    data.extend_from_slice(&g.data()[s * width..(s + 1) * width]);
                }
                acc(*x, Tensor::new(input.shape().to_vec(), data)?);
            }
            Op::Gather { x, rows } => {
                let input = val(*x);
                let (_, width) = rows_and_width(input);
                let mut data = vec![0.0; input.numel()];
                for (i, &r) in rows.iter().enumerate() {
                    let src = &g.data()[i * width..(i + 1) * width];
                    for (d, s) in data[r * width..(r + 1) * width].iter_mut().zip(src) {
                        *d += s;
                    }
                }
                acc(*x, Tensor::new(input.shape().to_vec(), data)?);
            }
            Op::Transpose(x) => acc(*x, g.transpose()?),
        }
        Ok(())
    }
}
