//! Explanation metrics: Recall@n against ground-truth motifs, ACC@r through
//! a cross-validated logistic probe on re-encoded subgraphs, ACC-AUC, and the
//! clean/noisy probe comparison.

mod probe;
mod report;

pub use probe::{stratified_folds, train_logistic_cv, CvResult, LogisticProbe, ProbeConfig};
pub use report::{AccPoint, MethodReport, MetricReport, ReportMeta};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoder::Encoder;
use crate::error::{Error, Result};
use crate::graph::{add_noise_edges, rank_edges, selection_count, Dataset, Graph, Subgraph};

/// The selection-ratio grid `0.1, 0.2, ..., 0.9`.
pub fn ratio_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// `|S ∩ S*| / |S*|` for one graph.
pub fn recall_at_n(explanation: &Subgraph, gt_edge_mask: Option<&[bool]>) -> Result<f64> {
    let mask =
        gt_edge_mask.ok_or_else(|| Error::invalid("recall needs a ground-truth edge mask"))?;
    if mask.len() != explanation.parent_edges() {
        return Err(Error::invalid(format!(
            "mask covers {} edges, explanation's graph has {}",
            mask.len(),
            explanation.parent_edges()
        )));
    }
    let truth = mask.iter().filter(|&&b| b).count();
    if truth == 0 {
        return Err(Error::invalid(
            "recall is undefined for an empty ground truth",
        ));
    }
    let hits = explanation.edges().iter().filter(|&&k| mask[k]).count();
    Ok(hits as f64 / truth as f64)
}

/// Area under the ACC curve over the nine-point ratio grid, by the
/// trapezoid rule, divided by the grid span so a constant curve maps to
/// itself.
pub fn acc_auc(accs: &[f64]) -> Result<f64> {
    let grid = ratio_grid();
    if accs.len() != grid.len() {
        return Err(Error::invalid(format!(
            "ACC-AUC needs {} points, got {}",
            grid.len(),
            accs.len()
        )));
    }
    let area: f64 = grid
        .windows(2)
        .zip(accs.windows(2))
        .map(|(r, a)| (r[1] - r[0]) * (a[0] + a[1]) / 2.0)
        .sum();
    Ok(area / (grid[grid.len() - 1] - grid[0]))
}

/// Per-edge 0/1 weights keeping the `ceil(r |E|)` best-scored edges.
pub fn top_r_weights(scores: &[f64], ratio: f64) -> Result<Vec<f64>> {
    let keep = selection_count(ratio, scores.len())?;
    let mut w = vec![0.0; scores.len()];
    for k in rank_edges(scores).into_iter().take(keep) {
        w[k] = 1.0;
    }
    Ok(w)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// The `min(n, |E|)` best-scored edges of `graph`, ties to the smaller index.
pub fn top_n_from_scores(graph: &Graph, scores: &[f64], n: usize) -> Result<Subgraph> {
    if scores.len() != graph.num_edges() {
        return Err(Error::invalid(format!(
            "{} scores for {} edges",
            scores.len(),
            graph.num_edges()
        )));
    }
    if n == 0 {
        return Err(Error::invalid("top-n selection needs n >= 1"));
    }
    Subgraph::new(graph, rank_edges(scores).into_iter().take(n).collect())
}

/// Dataset Recall@n as (mean, std) over graphs.
pub fn dataset_recall(dataset: &Dataset, scores: &[Vec<f64>], n: usize) -> Result<(f64, f64)> {
    if scores.len() != dataset.len() {
        return Err(Error::invalid("one score vector per graph is required"));
    }
    let recalls = dataset
        .graphs()
        .iter()
        .zip(scores)
        .map(|(g, s)| recall_at_n(&top_n_from_scores(g, s, n)?, g.gt_edge_mask()))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_std(&recalls))
}

/// Probe accuracy on representations of the top-`r` subgraphs.
///
/// Every node is kept; unselected edges get weight 0 in the encoder.
pub fn acc_at_r<R: Rng + ?Sized>(
    dataset: &Dataset,
    scores: &[Vec<f64>],
    encoder: &Encoder,
    ratio: f64,
    probe: &ProbeConfig,
    rng: &mut R,
) -> Result<CvResult> {
    if scores.len() != dataset.len() {
        return Err(Error::invalid("one score vector per graph is required"));
    }
    let weights = scores
        .iter()
        .map(|s| top_r_weights(s, ratio))
        .collect::<Result<Vec<_>>>()?;
    let reps = encoder.encode_graphs(dataset.graphs(), Some(&weights))?;
    train_logistic_cv(&reps, &dataset.labels()?, 10, probe, rng)
}

/// Probe accuracy on full-graph representations.
pub fn full_graph_accuracy<R: Rng + ?Sized>(
    dataset: &Dataset,
    encoder: &Encoder,
    probe: &ProbeConfig,
    rng: &mut R,
) -> Result<CvResult> {
    let reps = encoder.encode_graphs(dataset.graphs(), None)?;
    train_logistic_cv(&reps, &dataset.labels()?, 10, probe, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RobustnessResult {
    pub acc_clean: f64,
    pub acc_noisy: f64,
}

/// Probe accuracy on clean graphs and on copies with `noise_per_edge * |E|`
/// random extra edges. The same fold assignment seeds both probes.
pub fn robustness_study<R: Rng + ?Sized>(
    dataset: &Dataset,
    encoder: &Encoder,
    noise_per_edge: usize,
    probe: &ProbeConfig,
    rng: &mut R,
) -> Result<RobustnessResult> {
    let noisy = dataset
        .graphs()
        .iter()
        .map(|g| add_noise_edges(g, noise_per_edge * g.num_edges(), rng))
        .collect::<Result<Vec<_>>>()?;
    let labels = dataset.labels()?;
    let fold_seed: u64 = rng.random();
    let clean_reps = encoder.encode_graphs(dataset.graphs(), None)?;
    let noisy_reps = encoder.encode_graphs(&noisy, None)?;
    let mut fold_rng = ChaCha8Rng::seed_from_u64(fold_seed);
    let acc_clean = train_logistic_cv(&clean_reps, &labels, 10, probe, &mut fold_rng)?.mean;
    let mut fold_rng = ChaCha8Rng::seed_from_u64(fold_seed);
    let acc_noisy = train_logistic_cv(&noisy_reps, &labels, 10, probe, &mut fold_rng)?.mean;
    Ok(RobustnessResult {
        acc_clean,
        acc_noisy,
    })
}
