//! Gradient baselines that score edges by how strongly the norm of the
//! graph representation responds to each edge weight, plus a random floor.

use rand::Rng;

use crate::autodiff::{Tape, Tensor};
use crate::encoder::Encoder;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBatch};

/// Per-edge scores, higher meaning more important. One entry per edge.
pub type EdgeScores = Vec<f64>;

pub const IG_STEPS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Sa,
    Gradcam,
    Ig,
    Random,
}

impl Baseline {
    pub const ALL: [Baseline; 4] = [
        Baseline::Sa,
        Baseline::Gradcam,
        Baseline::Ig,
        Baseline::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Sa => "sa",
            Baseline::Gradcam => "gradcam",
            Baseline::Ig => "ig",
            Baseline::Random => "random",
        }
    }

    pub fn explain<R: Rng + ?Sized>(
        self,
        graph: &Graph,
        encoder: &Encoder,
        rng: &mut R,
    ) -> Result<EdgeScores> {
        match self {
            Baseline::Sa => sa_explain(graph, encoder),
            Baseline::Gradcam => gradcam_explain(graph, encoder),
            Baseline::Ig => ig_explain(graph, encoder, IG_STEPS),
            Baseline::Random => Ok(random_explain(graph, rng)),
        }
    }
}

impl std::str::FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown baseline `{s}`")))
    }
}

/// `||Z(G, w)||_2` for the given edge weights.
pub fn representation_norm(graph: &Graph, encoder: &Encoder, weights: &[f64]) -> Result<f64> {
    let z = encoder.encode_graph(graph, Some(weights))?.z;
    Ok(z.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// `(||Z(G, w)||_2, d||Z||_2 / dw)`.
pub fn norm_gradient(graph: &Graph, encoder: &Encoder, weights: &[f64]) -> Result<(f64, Vec<f64>)> {
    if weights.len() != graph.num_edges() {
        return Err(Error::shape(
            "norm_gradient",
            format!("{} weights for {} edges", weights.len(), graph.num_edges()),
        ));
    }
    if graph.num_edges() == 0 {
        return Ok((representation_norm(graph, encoder, weights)?, Vec::new()));
    }
    let batch = GraphBatch::new([graph])?;
    let mut tape = Tape::new();
    let params = encoder.bind(&mut tape, false);
    let w = tape.leaf(Tensor::column(weights.to_vec()), true);
    let (_, z) = encoder.forward(&mut tape, &params, &batch, Some(w))?;
    let sq = tape.mul(z, z)?;
    let total = tape.sum(sq)?;
    let log = tape.ln(total)?;
    let half = tape.mul_scalar(log, 0.5)?;
    let norm = tape.exp(half)?;
    let value = tape.value(norm).item()?;
    let grads = tape.backward(norm)?;
    Ok((value, grads.wrt(w).into_data()))
}

/// `|d||Z||_2 / dw_e|` at unit edge weights.
pub fn sa_explain(graph: &Graph, encoder: &Encoder) -> Result<EdgeScores> {
    let (_, g) = norm_gradient(graph, encoder, &vec![1.0; graph.num_edges()])?;
    Ok(g.into_iter().map(f64::abs).collect())
}

/// `(d||Z||_2 / dw_e) * w_e` at the graph's own edge weights (1 when absent).
pub fn gradcam_explain(graph: &Graph, encoder: &Encoder) -> Result<EdgeScores> {
    let w = graph
        .edge_weights()
        .map_or_else(|| vec![1.0; graph.num_edges()], <[f64]>::to_vec);
    let (_, g) = norm_gradient(graph, encoder, &w)?;
    Ok(g.iter().zip(&w).map(|(g, w)| g * w).collect())
}

/// Integrated gradients from all-zero edge weights to unit weights,
/// midpoint rule with `steps` points.
pub fn ig_explain(graph: &Graph, encoder: &Encoder, steps: usize) -> Result<EdgeScores> {
    if steps < 2 {
        return Err(Error::invalid(format!(
            "integrated gradients need at least 2 steps, got {steps}"
        )));
    }
    let m = graph.num_edges();
    let mut acc = vec![0.0; m];
    for t in 0..steps {
        let alpha = (t as f64 + 0.5) / steps as f64;
        let (_, g) = norm_gradient(graph, encoder, &vec![alpha; m])?;
        for (a, v) in acc.iter_mut().zip(g) {
            *a += v;
        }
    }
    Ok(acc.into_iter().map(|a| a / steps as f64).collect())
}

/// I.i.d. `U[0, 1)` scores.
pub fn random_explain<R: Rng + ?Sized>(graph: &Graph, rng: &mut R) -> EdgeScores {
    (0..graph.num_edges())
        .map(|_| rng.random::<f64>())
        .collect()
}
