use rand::Rng;

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::graph::GraphBatch;
use crate::nn::{add_pool, Activation, Bound, Mlp, ParamStore, SumConv};

/// Edge scorer: two sum convolutions embed nodes, then an MLP maps the
/// concatenated endpoint embeddings `[z_i, z_j]` to one logit per edge.
#[derive(Clone, Debug)]
pub struct Generator {
    convs: Vec<SumConv>,
    head: Mlp,
}

impl Generator {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        feature_dim: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Self {
        let convs = vec![
            SumConv::new(store, "generator.conv0", feature_dim, hidden, rng),
            SumConv::new(store, "generator.conv1", hidden, hidden, rng),
        ];
        let head = Mlp::new(
            store,
            "generator.head",
            &[2 * hidden, hidden, 1],
            Activation::Tanh,
            false,
            rng,
        );
        Generator { convs, head }
    }

    /// `[E x 1]` logits, one per undirected edge of the batch.
    pub fn edge_logits(&self, tape: &mut Tape, params: &Bound, batch: &GraphBatch) -> Result<Var> {
        if batch.num_edges() == 0 {
            return Err(Error::invalid("cannot score edges of an edgeless graph"));
        }
        let mut h = tape.constant(batch.features().clone());
        for conv in &self.convs {
            h = conv.forward(tape, params, batch, h, None)?;
        }
        let (heads, tails) = batch.edge_endpoints();
        let zi = tape.gather(h, heads)?;
        let zj = tape.gather(h, tails)?;
        let pair = tape.concat(&[zi, zj])?;
        self.head.forward(tape, params, pair)
    }
}

/// Pair scorer `f(S, Z)`: three sum convolutions over the weighted subgraph,
/// add-pooling, then an MLP on `[pooled, Z]`.
#[derive(Clone, Debug)]
pub struct Critic {
    convs: Vec<SumConv>,
    head: Mlp,
}

impl Critic {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        feature_dim: usize,
        hidden: usize,
        rep_dim: usize,
        rng: &mut R,
    ) -> Self {
        let convs = (0..3)
            .map(|i| {
                let input = if i == 0 { feature_dim } else { hidden };
                SumConv::new(store, &format!("critic.conv{i}"), input, hidden, rng)
            })
            .collect();
        let head = Mlp::new(
            store,
            "critic.head",
            &[hidden + rep_dim, hidden, 1],
            Activation::Relu,
            false,
            rng,
        );
        // start from f = 0, where L1 sits at its chance value -2 ln 2
        head.output_layer().zero(store);
        Critic { convs, head }
    }

    /// `[K x hidden]` pooled embeddings of the weighted graphs in `batch`.
    pub fn embed(
        &self,
        tape: &mut Tape,
        params: &Bound,
        batch: &GraphBatch,
        edge_weights: Option<Var>,
    ) -> Result<Var> {
        let mut h = tape.constant(batch.features().clone());
        for conv in &self.convs {
            h = conv.forward(tape, params, batch, h, edge_weights)?;
        }
        add_pool(tape, batch, h)
    }

    /// `[K x 1]` scores for row-aligned pooled embeddings and standardised
    /// representations. Pooled sums are compressed with `ln(1 + x)` first.
    pub fn score(&self, tape: &mut Tape, params: &Bound, pooled: Var, z: Var) -> Result<Var> {
        let pooled = log1p(tape, pooled)?;
        let joint = tape.concat(&[pooled, z])?;
        self.head.forward(tape, params, joint)
    }
}

/// `ln(1 + x)`; the pooled sums of ReLU outputs are non-negative.
fn log1p(tape: &mut Tape, x: Var) -> Result<Var> {
    let shifted = tape.add_scalar(x, 1.0)?;
    tape.ln(shifted)
}
