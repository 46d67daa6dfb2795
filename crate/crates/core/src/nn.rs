//! Parameter storage, dense layers and weighted sum-aggregation message passing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Gradients, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::graph::GraphBatch;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamId(usize);

/// Named parameters in declaration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

/// Tape handles for every parameter of a [`ParamStore`].
#[derive(Clone, Debug)]
pub struct Bound(Vec<Var>);

impl Bound {
    pub fn var(&self, id: ParamId) -> Var {
        self.0[id.0]
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        self.names.push(name.into());
        self.tensors.push(value);
        ParamId(self.tensors.len() - 1)
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(Tensor::numel).sum()
    }

    pub fn bind(&self, tape: &mut Tape, requires_grad: bool) -> Bound {
        Bound(
            self.tensors
                .iter()
                .map(|t| tape.leaf(t.clone(), requires_grad))
                .collect(),
        )
    }

    /// Gradients in declaration order, zero-filled for unused parameters.
    pub fn collect_grads(&self, bound: &Bound, grads: &Gradients) -> Vec<Tensor> {
        bound.0.iter().map(|&v| grads.wrt(v)).collect()
    }

    /// All values concatenated in declaration order.
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors
            .iter()
            .flat_map(|t| t.data().iter().copied())
            .collect()
    }

    /// Overwrites every value from a flat array produced by [`ParamStore::flatten`].
    pub fn load_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_values() {
            return Err(Error::Checkpoint(format!(
                "expected {} parameter values, found {}",
                self.num_values(),
                values.len()
            )));
        }
        let mut offset = 0;
        for t in &mut self.tensors {
            let n = t.numel();
            t.data_mut().copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    /// Names and shapes, used to check checkpoint compatibility.
    pub fn layout(&self) -> Vec<(String, Vec<usize>)> {
        self.names
            .iter()
            .cloned()
            .zip(self.tensors.iter().map(|t| t.shape().to_vec()))
            .collect()
    }

    /// Sets every parameter to zero.
    pub fn zero_all(&mut self) {
        for t in &mut self.tensors {
            t.data_mut().fill(0.0);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    pub fn apply(self, tape: &mut Tape, x: Var) -> Result<Var> {
        match self {
            Activation::Relu => tape.relu(x),
            Activation::Tanh => tape.tanh(x),
        }
    }
}

/// Affine map `x W + b`.
#[derive(Clone, Debug)]
pub struct Linear {
    weight: ParamId,
    bias: ParamId,
    in_dim: usize,
    out_dim: usize,
}

fn uniform_tensor<R: Rng + ?Sized>(shape: &[usize], bound: f64, rng: &mut R) -> Tensor {
    let mut t = Tensor::zeros(shape);
    for v in t.data_mut() {
        *v = rng.random_range(-bound..bound);
    }
    t
}

impl Linear {
    /// Weights and biases drawn from `U(-1/sqrt(in), 1/sqrt(in))`.
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / (in_dim.max(1) as f64).sqrt();
        let weight = store.add(
            format!("{name}.weight"),
            uniform_tensor(&[in_dim, out_dim], bound, rng),
        );
        let bias = store.add(
            format!("{name}.bias"),
            uniform_tensor(&[1, out_dim], bound, rng),
        );
        Linear {
            weight,
            bias,
            in_dim,
            out_dim,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Sets weight and bias to zero.
    pub fn zero(&self, store: &mut ParamStore) {
        store.get_mut(self.weight).data_mut().fill(0.0);
        store.get_mut(self.bias).data_mut().fill(0.0);
    }

    pub fn forward(&self, tape: &mut Tape, params: &Bound, x: Var) -> Result<Var> {
        let (rows, cols) = tape.value(x).dims2("linear")?;
        if cols != self.in_dim {
            return Err(Error::shape(
                "linear",
                format!("input has {cols} columns, layer expects {}", self.in_dim),
            ));
        }
        let xw = tape.matmul(x, params.var(self.weight))?;
        // bias broadcast as ones[rows x 1] * b[1 x out]
        let ones = tape.constant(Tensor::ones(&[rows, 1]));
        let b = tape.matmul(ones, params.var(self.bias))?;
        tape.add(xw, b)
    }
}

/// Stack of linear layers with an activation after each hidden layer and,
/// optionally, after the last one.
#[derive(Clone, Debug)]
pub struct Mlp {
    layers: Vec<Linear>,
    activation: Activation,
    activate_output: bool,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        dims: &[usize],
        activation: Activation,
        activate_output: bool,
        rng: &mut R,
    ) -> Self {
        assert!(dims.len() >= 2, "an MLP needs input and output sizes");
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| Linear::new(store, &format!("{name}.{i}"), w[0], w[1], rng))
            .collect();
        Mlp {
            layers,
            activation,
            activate_output,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    pub fn output_layer(&self) -> &Linear {
        self.layers.last().unwrap()
    }

    pub fn forward(&self, tape: &mut Tape, params: &Bound, mut x: Var) -> Result<Var> {
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            x = layer.forward(tape, params, x)?;
            if i < last || self.activate_output {
                x = self.activation.apply(tape, x)?;
            }
        }
        Ok(x)
    }
}

/// `sum_{u in N(v)} w_uv h_u` for every node of the batch.
///
/// `edge_weights`, when given, is a `[num_edges x 1]` column indexed by the
/// batch-global undirected edge id; both directions of an edge share it.
pub fn aggregate_neighbors(
    tape: &mut Tape,
    batch: &GraphBatch,
    h: Var,
    edge_weights: Option<Var>,
) -> Result<Var> {
    let (_, width) = tape.value(h).dims2("aggregate_neighbors")?;
    let mut messages = tape.gather(h, batch.src())?;
    if let Some(w) = edge_weights {
        let shape = tape.value(w).shape().to_vec();
        if shape != [batch.num_edges(), 1] {
            return Err(Error::shape(
                "aggregate_neighbors",
                format!(
                    "edge weights of shape {shape:?} for {} edges",
                    batch.num_edges()
                ),
            ));
        }
        let directed = tape.gather(w, batch.directed_to_edge())?;
        let ones = tape.constant(Tensor::ones(&[1, width]));
        let spread = tape.matmul(directed, ones)?;
        messages = tape.mul(messages, spread)?;
    }
    tape.segment_sum(messages, batch.dst(), batch.num_nodes())
}

/// Sum of node rows per graph.
pub fn add_pool(tape: &mut Tape, batch: &GraphBatch, h: Var) -> Result<Var> {
    tape.segment_sum(h, batch.node_graph(), batch.num_graphs())
}

/// A sum-aggregation convolution `act(W((1 + eps) h_v + sum_u w_uv h_u) + b)`
/// with `eps = 0`, used by the explainer's own networks.
#[derive(Clone, Debug)]
pub struct SumConv {
    linear: Linear,
}

impl SumConv {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Self {
        SumConv {
            linear: Linear::new(store, name, in_dim, out_dim, rng),
        }
    }

    pub fn forward(
        &self,
        tape: &mut Tape,
        params: &Bound,
        batch: &GraphBatch,
        h: Var,
        edge_weights: Option<Var>,
    ) -> Result<Var> {
        let agg = aggregate_neighbors(tape, batch, h, edge_weights)?;
        let pre = tape.add(h, agg)?;
        let out = self.linear.forward(tape, params, pre)?;
        tape.relu(out)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::graph::Graph;

    #[test]
    fn flatten_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut store = ParamStore::new();
        Mlp::new(
            &mut store,
            "m",
            &[3, 4, 2],
            Activation::Relu,
            false,
            &mut rng,
        );
        let flat = store.flatten();
        assert_eq!(flat.len(), 3 * 4 + 4 + 4 * 2 + 2);
        let mut other = store.clone();
        other.zero_all();
        other.load_flat(&flat).unwrap();
        assert_eq!(other, store);
        assert!(other.load_flat(&flat[1..]).is_err());
    }

    #[test]
    fn aggregation_weights_both_directions() {
        let g = Graph::new(
            3,
            vec![vec![1.0], vec![10.0], vec![100.0]],
            vec![(0, 1), (1, 2)],
            None,
            None,
        )
        .unwrap();
        let batch = GraphBatch::new([&g]).unwrap();
        let mut tape = Tape::new();
        let h = tape.constant(batch.features().clone());
        let plain = aggregate_neighbors(&mut tape, &batch, h, None).unwrap();
        assert_eq!(tape.value(plain).data(), &[10.0, 101.0, 10.0]);
        let w = tape.constant(Tensor::column(vec![0.5, 0.0]));
        let weighted = aggregate_neighbors(&mut tape, &batch, h, Some(w)).unwrap();
        assert_eq!(tape.value(weighted).data(), &[5.0, 0.5, 0.0]);
    }

    #[test]
    fn pooling_sums_per_graph() {
        let a = Graph::new(2, vec![vec![1.0], vec![2.0]], vec![(0, 1)], None, None).unwrap();
        let b = Graph::new(1, vec![vec![5.0]], vec![], None, None).unwrap();
        let batch = GraphBatch::new([&a, &b]).unwrap();
        let mut tape = Tape::new();
        let h = tape.constant(batch.features().clone());
        let pooled = add_pool(&mut tape, &batch, h).unwrap();
        assert_eq!(tape.value(pooled).data(), &[3.0, 5.0]);
    }
}
