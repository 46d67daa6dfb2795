//! The subgraph information-bottleneck explainer.
//!
//! A generator scores every edge from its endpoint embeddings, a concrete
//! (binary Gumbel-softmax) relaxation turns scores into soft edge weights, and
//! a critic scores (weighted subgraph, representation) pairs. Generator and
//! critic are trained together to maximise a Jensen–Shannon lower bound on
//! `I(Z; S)` minus `beta` times a Bernoulli cross-entropy upper bound on
//! `I(G; S)`.

mod losses;
mod networks;

pub use losses::{
    concrete_relaxation, logistic_noise, loss_l1, loss_l2, random_derangement, L2_CLAMP,
};
pub use networks::{Critic, Generator};

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::autodiff::{sigmoid, Adam, AdamConfig, Tape, Tensor, Var};
use crate::checkpoint::Checkpoint;
use crate::encoder::{Encoder, REPRESENTATION_DIM};
use crate::error::{Error, Result};
use crate::graph::{rank_edges, selection_count, Dataset, Graph, GraphBatch, Subgraph};
use crate::nn::{Bound, ParamStore};

pub const HIDDEN_DIM: usize = 32;
const CHECKPOINT_KIND: &str = "usib-explainer";

/// How many edges an explanation keeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// `ceil(r |E|)` edges.
    Ratio(f64),
    /// `min(n, |E|)` edges.
    Count(usize),
}

impl Selection {
    pub fn count(self, num_edges: usize) -> Result<usize> {
        match self {
            Selection::Ratio(r) => selection_count(r, num_edges),
            Selection::Count(0) => Err(Error::invalid("top-n selection needs n >= 1")),
            Selection::Count(n) => Ok(n.min(num_edges)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UsibHyper {
    pub beta: f64,
    pub tau: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub selection: Selection,
}

impl Default for UsibHyper {
    fn default() -> Self {
        UsibHyper {
            beta: 1.0,
            tau: 0.1,
            lr: 1e-3,
            batch_size: 64,
            epochs: 10,
            seed: 0,
            selection: Selection::Count(5),
        }
    }
}

impl UsibHyper {
    pub fn validate(&self) -> Result<()> {
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(Error::invalid(format!(
                "temperature must be positive, got {}",
                self.tau
            )));
        }
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(Error::invalid(format!(
                "beta must be non-negative, got {}",
                self.beta
            )));
        }
        if self.lr.is_nan() || self.lr <= 0.0 {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if self.batch_size < 2 {
            return Err(Error::invalid(
                "batch size must be at least 2 (negatives come from the batch)",
            ));
        }
        Ok(())
    }
}

/// Generator `g_theta` and critic `f_phi`, sharing one parameter store so a
/// single optimizer updates both.
#[derive(Clone, Debug)]
pub struct Explainer {
    store: ParamStore,
    generator: Generator,
    critic: Critic,
    feature_dim: usize,
    tau: f64,
    seed: u64,
    z_scaler: ZScaler,
}

/// Per-dimension standardisation of representations before the critic.
///
/// Fitted once on the frozen encoder's representations of the training set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZScaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl ZScaler {
    pub fn identity(dim: usize) -> Self {
        ZScaler {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    /// Dimensions with (near) zero spread keep unit scale.
    pub fn fit(reps: &[Vec<f64>]) -> Result<Self> {
        let first = reps
            .first()
            .ok_or_else(|| Error::invalid("cannot fit a scaler on no representations"))?;
        let (n, dim) = (reps.len() as f64, first.len());
        let mut mean = vec![0.0; dim];
        for r in reps {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; dim];
        for r in reps {
            for ((s, v), m) in scale.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        Ok(ZScaler { mean, scale })
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Values recorded while evaluating the training objective on one batch.
#[derive(Clone, Copy, Debug)]
pub struct ObjectiveVars {
    /// `-(L1 - beta * L2)`, the quantity minimised.
    pub loss: Var,
    pub l1: Var,
    pub l2: Var,
    /// `[E x 1]` edge logits `w`.
    pub logits: Var,
    /// `[E x 1]` relaxed edge weights.
    pub relaxed: Var,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplanationResult {
    pub edge_logits: Vec<f64>,
    pub edge_weights: Vec<f64>,
    pub selected: Subgraph,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UsibTrainingLog {
    pub epoch_loss: Vec<f64>,
    pub epoch_l1: Vec<f64>,
    pub epoch_l2: Vec<f64>,
}

impl Explainer {
    pub fn new(feature_dim: usize, tau: f64, seed: u64) -> Result<Self> {
        if tau.is_nan() || tau <= 0.0 {
            return Err(Error::invalid(format!(
                "temperature must be positive, got {tau}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let generator = Generator::new(&mut store, feature_dim, HIDDEN_DIM, &mut rng);
        let critic = Critic::new(
            &mut store,
            feature_dim,
            HIDDEN_DIM,
            REPRESENTATION_DIM,
            &mut rng,
        );
        Ok(Explainer {
            store,
            generator,
            critic,
            feature_dim,
            tau,
            seed,
            z_scaler: ZScaler::identity(REPRESENTATION_DIM),
        })
    }

    pub fn z_scaler(&self) -> &ZScaler {
        &self.z_scaler
    }

    pub fn params(&self) -> &ParamStore {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn critic(&self) -> &Critic {
        &self.critic
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn bind(&self, tape: &mut Tape, requires_grad: bool) -> Bound {
        self.store.bind(tape, requires_grad)
    }

    fn check_batch(&self, batch: &GraphBatch) -> Result<()> {
        if batch.feature_dim() != self.feature_dim {
            return Err(Error::shape(
                "explainer",
                format!(
                    "graphs have {} node features, explainer expects {}",
                    batch.feature_dim(),
                    self.feature_dim
                ),
            ));
        }
        Ok(())
    }

    /// Edge logits `w` for one graph, in edge order.
    pub fn edge_logits(&self, graph: &Graph) -> Result<Vec<f64>> {
        let batch = GraphBatch::new([graph])?;
        self.check_batch(&batch)?;
        if graph.num_edges() == 0 {
            return Ok(Vec::new());
        }
        let mut tape = Tape::new();
        let p = self.bind(&mut tape, false);
        let w = self.generator.edge_logits(&mut tape, &p, &batch)?;
        Ok(tape.value(w).data().to_vec())
    }

    /// Relaxed weights `sigma((logit(eps) + w) / tau)` for one graph, with `eps` drawn from `rng`.
    /// Returns `(logits, relaxed weights)`.
    pub fn relax_graph<R: Rng + ?Sized>(
        &self,
        graph: &Graph,
        rng: &mut R,
    ) -> Result<(Vec<f64>, Graph)> {
        let logits = self.edge_logits(graph)?;
        let relaxed = concrete_relaxation(&logits, self.tau, rng)?;
        Ok((logits, graph.with_edge_weights(relaxed)?))
    }

    /// Critic score `f(S, Z)` for one weighted graph.
    pub fn critic_score(&self, subgraph: &Graph, z: &[f64]) -> Result<f64> {
        if z.len() != REPRESENTATION_DIM {
            return Err(Error::shape(
                "critic",
                format!(
                    "representation has {} entries, expected {REPRESENTATION_DIM}",
                    z.len()
                ),
            ));
        }
        let batch = GraphBatch::new([subgraph])?;
        self.check_batch(&batch)?;
        let mut tape = Tape::new();
        let p = self.bind(&mut tape, false);
        let weights = subgraph
            .edge_weights()
            .map(|w| tape.constant(Tensor::column(w.to_vec())));
        let pooled = self.critic.embed(&mut tape, &p, &batch, weights)?;
        let zv = tape.constant(Tensor::matrix(
            1,
            REPRESENTATION_DIM,
            self.z_scaler.apply(z),
        )?);
        let score = self.critic.score(&mut tape, &p, pooled, zv)?;
        tape.value(score).item()
    }

    /// Records the training objective for one batch.
    ///
    /// `noise` holds one logistic sample `log(eps) - log(1 - eps)` per edge of
    /// the batch, `negatives[k]` is the graph whose representation is paired
    /// with subgraph `k` for the negative term, and `z` is `[K x 192]` of raw
    /// encoder output (standardised here).
    #[allow(clippy::too_many_arguments)]
    pub fn objective(
        &self,
        tape: &mut Tape,
        params: &Bound,
        batch: &GraphBatch,
        z: &Tensor,
        noise: &[f64],
        negatives: &[usize],
        beta: f64,
    ) -> Result<ObjectiveVars> {
        self.check_batch(batch)?;
        let k = batch.num_graphs();
        if k < 2 {
            return Err(Error::invalid(
                "the objective needs at least two graphs per batch",
            ));
        }
        if z.shape() != [k, REPRESENTATION_DIM] {
            return Err(Error::shape(
                "objective",
                format!("representations of shape {:?} for {k} graphs", z.shape()),
            ));
        }
        if noise.len() != batch.num_edges() || negatives.len() != k {
            return Err(Error::shape(
                "objective",
                "noise or negative pairing has the wrong length",
            ));
        }
        let logits = self.generator.edge_logits(tape, params, batch)?;
        let eps = tape.constant(Tensor::column(noise.to_vec()));
        let shifted = tape.add(logits, eps)?;
        let scaled = tape.mul_scalar(shifted, 1.0 / self.tau)?;
        let relaxed = tape.sigmoid(scaled)?;

        let pooled = self.critic.embed(tape, params, batch, Some(relaxed))?;
        let rows: Vec<Vec<f64>> = (0..k).map(|i| self.z_scaler.apply(z.row(i))).collect();
        let z_pos = tape.constant(Tensor::from_rows(&rows)?);
        let mut z_neg = Vec::with_capacity(z.numel());
        for &m in negatives {
            z_neg.extend_from_slice(&rows[m]);
        }
        let z_neg = tape.constant(Tensor::matrix(k, REPRESENTATION_DIM, z_neg)?);
        let pos = self.critic.score(tape, params, pooled, z_pos)?;
        let neg = self.critic.score(tape, params, pooled, z_neg)?;

        let l1 = loss_l1(tape, pos, neg)?;
        let l2 = loss_l2(tape, logits, relaxed, k)?;
        let penalty = tape.mul_scalar(l2, beta)?;
        let objective = tape.sub(l1, penalty)?;
        let loss = tape.neg(objective)?;
        Ok(ObjectiveVars {
            loss,
            l1,
            l2,
            logits,
            relaxed,
        })
    }

    /// Noise-free explanation: weights `sigma(w / tau)` and the top edges.
    ///
    /// Edges are ranked by logit, which orders them exactly as the weights
    /// do but without ties from saturated sigmoids.
    pub fn explain(&self, graph: &Graph, selection: Selection) -> Result<ExplanationResult> {
        let edge_logits = self.edge_logits(graph)?;
        let edge_weights = edge_logits.iter().map(|w| sigmoid(w / self.tau)).collect();
        let keep = selection.count(graph.num_edges())?;
        let selected = Subgraph::new(
            graph,
            rank_edges(&edge_logits).into_iter().take(keep).collect(),
        )?;
        Ok(ExplanationResult {
            edge_logits,
            edge_weights,
            selected,
        })
    }

    /// Edge logits for a whole dataset; a monotone score for ranking edges.
    pub fn dataset_logits(&self, dataset: &Dataset) -> Result<Vec<Vec<f64>>> {
        dataset
            .graphs()
            .iter()
            .map(|g| self.edge_logits(g))
            .collect()
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(
            CHECKPOINT_KIND,
            json!({
                "generator": {"conv": "sum", "layers": 2, "hidden_dim": HIDDEN_DIM, "mlp_activation": "tanh"},
                "critic": {"conv": "sum", "layers": 3, "hidden_dim": HIDDEN_DIM, "pooling": "add", "mlp_activation": "relu"},
                "representation_dim": REPRESENTATION_DIM,
                "tau": self.tau,
                "z_mean": self.z_scaler.mean,
                "z_scale": self.z_scaler.scale,
            }),
            self.feature_dim,
            self.seed,
            &self.store,
        )
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let tau = ck
            .architecture
            .get("tau")
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| Error::Checkpoint("explainer checkpoint lacks `tau`".into()))?;
        let vector = |key: &str| -> Result<Vec<f64>> {
            ck.architecture
                .get(key)
                .and_then(|v| serde_json::from_value::<Vec<f64>>(v.clone()).ok())
                .filter(|v| v.len() == REPRESENTATION_DIM)
                .ok_or_else(|| {
                    Error::Checkpoint(format!("explainer checkpoint lacks a valid `{key}`"))
                })
        };
        let mut ex = Explainer::new(ck.feature_dim, tau, ck.seed)?;
        ex.z_scaler = ZScaler {
            mean: vector("z_mean")?,
            scale: vector("z_scale")?,
        };
        ck.restore_into(CHECKPOINT_KIND, &mut ex.store)?;
        Ok(ex)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.checkpoint().save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }

    /// Mean binary entropy `H(sigma(w))` over every edge of the dataset.
    pub fn mean_edge_entropy(&self, dataset: &Dataset) -> Result<f64> {
        let mut total = 0.0;
        let mut count = 0usize;
        for g in dataset.graphs() {
            for w in self.edge_logits(g)? {
                total += binary_entropy(sigmoid(w));
                count += 1;
            }
        }
        Ok(total / count.max(1) as f64)
    }
}

/// `H(p)` in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Batches drawn once up front; a trailing singleton joins the previous batch.
fn fixed_batches<R: Rng + ?Sized>(n: usize, batch_size: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut batches: Vec<Vec<usize>> = order.chunks(batch_size).map(<[usize]>::to_vec).collect();
    if batches.len() > 1 && batches.last().is_some_and(|b| b.len() < 2) {
        let tail = batches.pop().unwrap();
        batches.last_mut().unwrap().extend(tail);
    }
    batches
}

/// Trains generator and critic jointly against a frozen encoder.
///
/// Representations are computed once before training, batches are drawn
/// once, and each step relaxes every graph of the batch, evaluates
/// `-(L1 - beta L2)` and applies one Adam update to all explainer parameters.
pub fn train_usib(
    dataset: &Dataset,
    encoder: &Encoder,
    hyper: &UsibHyper,
) -> Result<(Explainer, UsibTrainingLog)> {
    hyper.validate()?;
    if dataset.len() < 2 {
        return Err(Error::invalid("USIB training needs at least two graphs"));
    }
    let reps = encoder.encode_graphs(dataset.graphs(), None)?;
    let mut explainer = Explainer::new(dataset.meta().feature_dim, hyper.tau, hyper.seed)?;
    explainer.z_scaler = ZScaler::fit(&reps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    rng.set_stream(1);
    let graphs = dataset.graphs();
    let batches: Vec<(GraphBatch, Tensor)> =
        fixed_batches(graphs.len(), hyper.batch_size, &mut rng)
            .into_iter()
            .map(|idx| {
                let batch = GraphBatch::new(idx.iter().map(|&i| &graphs[i]))?;
                let z: Vec<f64> = idx.iter().flat_map(|&i| reps[i].iter().copied()).collect();
                Ok((batch, Tensor::matrix(idx.len(), REPRESENTATION_DIM, z)?))
            })
            .collect::<Result<_>>()?;

    let mut adam = Adam::new(AdamConfig::with_lr(hyper.lr));
    let mut log = UsibTrainingLog::default();
    for _ in 0..hyper.epochs {
        let (mut loss_sum, mut l1_sum, mut l2_sum) = (0.0, 0.0, 0.0);
        for (batch, z) in &batches {
            let noise = logistic_noise(batch.num_edges(), &mut rng);
            let negatives = random_derangement(batch.num_graphs(), &mut rng)?;
            let mut tape = Tape::new();
            let params = explainer.bind(&mut tape, true);
            let vars = explainer
                .objective(&mut tape, &params, batch, z, &noise, &negatives, hyper.beta)?;
            loss_sum += tape.value(vars.loss).item()?;
            l1_sum += tape.value(vars.l1).item()?;
            l2_sum += tape.value(vars.l2).item()?;
            let grads = tape.backward(vars.loss)?;
            let grads = explainer.store.collect_grads(&params, &grads);
            adam.step(explainer.store.tensors_mut(), &grads)?;
        }
        let nb = batches.len() as f64;
        log.epoch_loss.push(loss_sum / nb);
        log.epoch_l1.push(l1_sum / nb);
        log.epoch_l2.push(l2_sum / nb);
    }
    Ok((explainer, log))
}

#[cfg(test)]
mod tests;
