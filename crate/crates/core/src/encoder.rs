//! The target model: a 3-layer GIN whose layer outputs are concatenated per
//! node and add-pooled into a 192-dimensional graph representation.
//!
//! Edge weights, when supplied, scale each neighbor's contribution to the
//! sum aggregation. That is how relaxed or truncated subgraphs are fed back
//! through the encoder: weight 1 everywhere is the plain graph, weight 0
//! everywhere is the edgeless graph on the same nodes.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::autodiff::{Adam, AdamConfig, Tape, Tensor, Var};
use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph, GraphBatch};
use crate::nn::{add_pool, aggregate_neighbors, Activation, Bound, Mlp, ParamStore};

pub const HIDDEN_DIM: usize = 64;
pub const NUM_LAYERS: usize = 3;
pub const REPRESENTATION_DIM: usize = HIDDEN_DIM * NUM_LAYERS;

const CHECKPOINT_KIND: &str = "gin-encoder";
const ENCODE_CHUNK: usize = 64;

/// Graph-level vector `z` and, optionally, the per-node vectors it pools.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    pub z: Vec<f64>,
    pub node_vectors: Option<Tensor>,
}

#[derive(Clone, Debug)]
pub struct Encoder {
    store: ParamStore,
    layers: Vec<Mlp>,
    feature_dim: usize,
    seed: u64,
}

impl PartialEq for Encoder {
    fn eq(&self, other: &Self) -> bool {
        self.feature_dim == other.feature_dim && self.store == other.store
    }
}

impl Encoder {
    /// Randomly initialised (untrained) encoder.
    pub fn new(feature_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::with_rng(feature_dim, seed, &mut rng)
    }

    fn with_rng<R: Rng + ?Sized>(feature_dim: usize, seed: u64, rng: &mut R) -> Self {
        let mut store = ParamStore::new();
        let layers = (0..NUM_LAYERS)
            .map(|l| {
                let input = if l == 0 { feature_dim } else { HIDDEN_DIM };
                Mlp::new(
                    &mut store,
                    &format!("gin{l}"),
                    &[input, HIDDEN_DIM, HIDDEN_DIM],
                    Activation::Relu,
                    true,
                    rng,
                )
            })
            .collect();
        Encoder {
            store,
            layers,
            feature_dim,
            seed,
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &ParamStore {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn bind(&self, tape: &mut Tape, requires_grad: bool) -> Bound {
        self.store.bind(tape, requires_grad)
    }

    fn check_features(&self, batch: &GraphBatch) -> Result<()> {
        if batch.feature_dim() != self.feature_dim {
            return Err(Error::shape(
                "encode",
                format!(
                    "graphs have {} node features, encoder expects {}",
                    batch.feature_dim(),
                    self.feature_dim
                ),
            ));
        }
        Ok(())
    }

    /// One GIN layer: `MLP((1 + eps) h_v + sum_u w_uv h_u)` with `eps = 0`.
    pub fn gin_layer(
        &self,
        layer: usize,
        tape: &mut Tape,
        params: &Bound,
        batch: &GraphBatch,
        h: Var,
        edge_weights: Option<Var>,
    ) -> Result<Var> {
        let agg = aggregate_neighbors(tape, batch, h, edge_weights)?;
        let pre = tape.add(h, agg)?;
        self.layers[layer].forward(tape, params, pre)
    }

    /// Records the encoder on `tape`; returns `(node vectors [N x 192], graph vectors [B x 192])`.
    pub fn forward(
        &self,
        tape: &mut Tape,
        params: &Bound,
        batch: &GraphBatch,
        edge_weights: Option<Var>,
    ) -> Result<(Var, Var)> {
        self.check_features(batch)?;
        let mut h = tape.constant(batch.features().clone());
        let mut outputs = Vec::with_capacity(NUM_LAYERS);
        for l in 0..NUM_LAYERS {
            h = self.gin_layer(l, tape, params, batch, h, edge_weights)?;
            outputs.push(h);
        }
        let nodes = tape.concat(&outputs)?;
        let graphs = add_pool(tape, batch, nodes)?;
        Ok((nodes, graphs))
    }

    /// Encodes one graph. `edge_weights` (one per edge) scale the aggregation;
    /// the graph's own stored weights are not consulted.
    pub fn encode_graph(
        &self,
        graph: &Graph,
        edge_weights: Option<&[f64]>,
    ) -> Result<Representation> {
        let batch = GraphBatch::new([graph])?;
        let mut tape = Tape::new();
        let params = self.bind(&mut tape, false);
        let w = weights_var(&mut tape, graph.num_edges(), edge_weights)?;
        let (nodes, graphs) = self.forward(&mut tape, &params, &batch, w)?;
        Ok(Representation {
            z: tape.value(graphs).data().to_vec(),
            node_vectors: Some(tape.value(nodes).clone()),
        })
    }

    /// Graph vectors for many graphs, optionally each with its own edge weights.
    pub fn encode_graphs(
        &self,
        graphs: &[Graph],
        edge_weights: Option<&[Vec<f64>]>,
    ) -> Result<Vec<Vec<f64>>> {
        if let Some(w) = edge_weights {
            if w.len() != graphs.len() {
                return Err(Error::invalid(format!(
                    "{} weight vectors for {} graphs",
                    w.len(),
                    graphs.len()
                )));
            }
        }
        let mut out = Vec::with_capacity(graphs.len());
        for (c, chunk) in graphs.chunks(ENCODE_CHUNK).enumerate() {
            let batch = GraphBatch::new(chunk)?;
            let mut tape = Tape::new();
            let params = self.bind(&mut tape, false);
            let w = match edge_weights {
                Some(all) => {
                    let mut flat = Vec::with_capacity(batch.num_edges());
                    for (g, w) in chunk.iter().zip(&all[c * ENCODE_CHUNK..]) {
                        if w.len() != g.num_edges() {
                            return Err(Error::shape(
                                "encode_graphs",
                                format!("{} weights for {} edges", w.len(), g.num_edges()),
                            ));
                        }
                        flat.extend_from_slice(w);
                    }
                    Some(tape.constant(Tensor::column(flat)))
                }
                None => None,
            };
            let (_, z) = self.forward(&mut tape, &params, &batch, w)?;
            let z = tape.value(z);
            out.extend((0..chunk.len()).map(|g| z.row(g).to_vec()));
        }
        Ok(out)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(
            CHECKPOINT_KIND,
            json!({
                "model": "gin",
                "layers": NUM_LAYERS,
                "hidden_dim": HIDDEN_DIM,
                "mlp_depth": 2,
                "pooling": "add",
                "representation_dim": REPRESENTATION_DIM,
            }),
            self.feature_dim,
            self.seed,
            &self.store,
        )
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let mut enc = Encoder::new(ck.feature_dim, ck.seed);
        ck.restore_into(CHECKPOINT_KIND, &mut enc.store)?;
        Ok(enc)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.checkpoint().save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

fn weights_var(tape: &mut Tape, num_edges: usize, weights: Option<&[f64]>) -> Result<Option<Var>> {
    match weights {
        None => Ok(None),
        Some(w) if w.len() != num_edges => Err(Error::shape(
            "encode_graph",
            format!("{} edge weights for {num_edges} edges", w.len()),
        )),
        Some(w) => Ok(Some(tape.constant(Tensor::column(w.to_vec())))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InfographConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Width of the node and graph projection heads of the discriminator.
    pub head_dim: usize,
}

impl Default for InfographConfig {
    fn default() -> Self {
        InfographConfig {
            epochs: 30,
            batch_size: 32,
            lr: 1e-3,
            head_dim: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Mean loss over all batches before the first update.
    pub initial_loss: f64,
    /// Mean loss over the batches of each epoch.
    pub epoch_losses: Vec<f64>,
}

impl TrainingLog {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses
            .last()
            .copied()
            .unwrap_or(self.initial_loss)
    }
}

/// Local/global mutual-information maximisation: node vectors are scored
/// against graph vectors with a dot product of two projection heads, own
/// graph as the positive pair and the other graphs of the batch as negatives,
/// under the softplus Jensen–Shannon bound.
struct InfographObjective {
    heads: ParamStore,
    local: Mlp,
    global: Mlp,
}

impl InfographObjective {
    fn new<R: Rng + ?Sized>(head_dim: usize, rng: &mut R) -> Self {
        let mut heads = ParamStore::new();
        let dims = [REPRESENTATION_DIM, head_dim, head_dim];
        let local = Mlp::new(&mut heads, "local", &dims, Activation::Relu, false, rng);
        let global = Mlp::new(&mut heads, "global", &dims, Activation::Relu, false, rng);
        InfographObjective {
            heads,
            local,
            global,
        }
    }

    fn loss(
        &self,
        tape: &mut Tape,
        enc: &Encoder,
        enc_params: &Bound,
        head_params: &Bound,
        batch: &GraphBatch,
    ) -> Result<Var> {
        let (nodes, graphs) = enc.forward(tape, enc_params, batch, None)?;
        let local = self.local.forward(tape, head_params, nodes)?;
        let global = self.global.forward(tape, head_params, graphs)?;
        let global_t = tape.transpose(global)?;
        let scores = tape.matmul(local, global_t)?;

        let n = batch.num_nodes();
        let b = batch.num_graphs();
        let mut pos = vec![0.0; n * b];
        for (v, &g) in batch.node_graph().iter().enumerate() {
            pos[v * b + g] = 1.0;
        }
        let neg: Vec<f64> = pos.iter().map(|p| 1.0 - p).collect();
        let pos = tape.constant(Tensor::matrix(n, b, pos)?);
        let neg = tape.constant(Tensor::matrix(n, b, neg)?);

        // positives: sp(-s) = -(-sp(-s)); negatives: sp(s)
        let neg_scores = tape.neg(scores)?;
        let sp_pos = tape.softplus(neg_scores)?;
        let sp_neg = tape.softplus(scores)?;
        let pos_terms = tape.mul(sp_pos, pos)?;
        let neg_terms = tape.mul(sp_neg, neg)?;
        let pos_sum = tape.sum(pos_terms)?;
        let neg_sum = tape.sum(neg_terms)?;
        let pos_mean = tape.mul_scalar(pos_sum, 1.0 / n as f64)?;
        let neg_mean = tape.mul_scalar(neg_sum, 1.0 / (n * (b - 1)) as f64)?;
        tape.add(pos_mean, neg_mean)
    }
}

fn make_batches<R: Rng + ?Sized>(n: usize, batch_size: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut batches: Vec<Vec<usize>> = order.chunks(batch_size).map(<[usize]>::to_vec).collect();
    // a trailing singleton has no negatives; fold it into the previous batch
    if batches.len() > 1 && batches.last().is_some_and(|b| b.len() < 2) {
        let tail = batches.pop().unwrap();
        batches.last_mut().unwrap().extend(tail);
    }
    batches
}

/// Trains a fresh encoder with the local/global objective.
pub fn train_infograph(
    dataset: &Dataset,
    config: &InfographConfig,
    seed: u64,
) -> Result<(Encoder, TrainingLog)> {
    if dataset.len() < 2 {
        return Err(Error::invalid(
            "InfoGraph training needs at least two graphs",
        ));
    }
    if config.batch_size < 2 {
        return Err(Error::invalid(
            "InfoGraph batch size must be at least 2 (negatives come from the batch)",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut encoder = Encoder::with_rng(dataset.meta().feature_dim, seed, &mut rng);
    let mut objective = InfographObjective::new(config.head_dim, &mut rng);
    let mut adam = Adam::new(AdamConfig::with_lr(config.lr));
    let graphs = dataset.graphs();

    let eval_batches = make_batches(graphs.len(), config.batch_size, &mut rng);
    let mut initial = 0.0;
    for idx in &eval_batches {
        let batch = GraphBatch::new(idx.iter().map(|&i| &graphs[i]))?;
        let mut tape = Tape::new();
        let ep = encoder.bind(&mut tape, false);
        let hp = objective.heads.bind(&mut tape, false);
        let loss = objective.loss(&mut tape, &encoder, &ep, &hp, &batch)?;
        initial += tape.value(loss).item()?;
    }
    let initial_loss = initial / eval_batches.len() as f64;

    let n_enc = encoder.store.len();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let batches = make_batches(graphs.len(), config.batch_size, &mut rng);
        let mut total = 0.0;
        for idx in &batches {
            let batch = GraphBatch::new(idx.iter().map(|&i| &graphs[i]))?;
            let mut tape = Tape::new();
            let ep = encoder.bind(&mut tape, true);
            let hp = objective.heads.bind(&mut tape, true);
            let loss = objective.loss(&mut tape, &encoder, &ep, &hp, &batch)?;
            total += tape.value(loss).item()?;
            let grads = tape.backward(loss)?;
            let mut all_grads = encoder.store.collect_grads(&ep, &grads);
            all_grads.extend(objective.heads.collect_grads(&hp, &grads));
            let mut all_params: Vec<Tensor> = encoder
                .store
                .tensors()
                .iter()
                .chain(objective.heads.tensors())
                .cloned()
                .collect();
            adam.step(&mut all_params, &all_grads)?;
            let (enc_part, head_part) = all_params.split_at(n_enc);
            encoder.store.tensors_mut().clone_from_slice(enc_part);
            objective.heads.tensors_mut().clone_from_slice(head_part);
        }
        epoch_losses.push(total / batches.len() as f64);
    }
    Ok((
        encoder,
        TrainingLog {
            initial_loss,
            epoch_losses,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate_ba3_dataset, Ba3Config};

    fn line(features: Vec<Vec<f64>>) -> Graph {
        let n = features.len();
        let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Graph::new(n, features, edges, None, None).unwrap()
    }

    #[test]
    fn output_dimension() {
        let enc = Encoder::new(3, 1);
        let rep = enc
            .encode_graph(&line(vec![vec![1.0, 0.0, 2.0]; 4]), None)
            .unwrap();
        assert_eq!(rep.z.len(), REPRESENTATION_DIM);
        assert_eq!(rep.node_vectors.unwrap().shape(), &[4, REPRESENTATION_DIM]);
    }

    #[test]
    fn isolated_node_is_mlp_of_features() {
        let enc = Encoder::new(2, 4);
        let g = Graph::new(1, vec![vec![0.3, -0.7]], vec![], None, None).unwrap();
        let rep = enc.encode_graph(&g, None).unwrap();
        // layer 1 on an isolated node is exactly the layer-1 MLP of its features
        let mut tape = Tape::new();
        let p = enc.bind(&mut tape, false);
        let x = tape.constant(Tensor::matrix(1, 2, vec![0.3, -0.7]).unwrap());
        let h1 = enc.layers[0].forward(&mut tape, &p, x).unwrap();
        assert_eq!(&rep.z[..HIDDEN_DIM], tape.value(h1).data());
    }

    #[test]
    fn symmetric_pair_has_identical_rows() {
        let enc = Encoder::new(2, 8);
        let rep = enc
            .encode_graph(&line(vec![vec![1.0, 2.0]; 2]), None)
            .unwrap();
        let nodes = rep.node_vectors.unwrap();
        assert_eq!(nodes.row(0), nodes.row(1));
    }

    #[test]
    fn weight_identities() {
        let enc = Encoder::new(1, 2);
        let g = line(vec![vec![1.0], vec![2.0], vec![0.5], vec![-1.0]]);
        let plain = enc.encode_graph(&g, None).unwrap().z;
        let ones = enc.encode_graph(&g, Some(&[1.0; 3])).unwrap().z;
        assert_eq!(plain, ones);
        let zeros = enc.encode_graph(&g, Some(&[0.0; 3])).unwrap().z;
        let edgeless = Graph::new(4, g.feature_rows(), vec![], None, None).unwrap();
        assert_eq!(zeros, enc.encode_graph(&edgeless, None).unwrap().z);
        assert!(enc.encode_graph(&g, Some(&[1.0; 2])).is_err());
    }

    #[test]
    fn batched_matches_single() {
        let ds = generate_ba3_dataset(&Ba3Config {
            graphs_per_class: 30,
            ..Ba3Config::default()
        })
        .unwrap();
        let enc = Encoder::new(8, 0);
        let batched = enc.encode_graphs(ds.graphs(), None).unwrap();
        for (g, z) in ds.graphs().iter().zip(&batched).step_by(13) {
            let single = enc.encode_graph(g, None).unwrap().z;
            for (a, b) in single.iter().zip(z) {
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn feature_dim_mismatch_is_explicit() {
        let enc = Encoder::new(4, 0);
        let err = enc
            .encode_graph(&line(vec![vec![1.0]; 3]), None)
            .unwrap_err();
        assert!(matches!(err, Error::Shape { .. }), "{err}");
    }

    #[test]
    fn infograph_rejects_batch_of_one() {
        let ds = generate_ba3_dataset(&Ba3Config {
            graphs_per_class: 2,
            ..Ba3Config::default()
        })
        .unwrap();
        let cfg = InfographConfig {
            batch_size: 1,
            ..InfographConfig::default()
        };
        assert!(train_infograph(&ds, &cfg, 0).is_err());
    }

    #[test]
    fn singleton_tail_is_merged() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let b = make_batches(9, 4, &mut rng);
        assert_eq!(b.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 5]);
    }
}
