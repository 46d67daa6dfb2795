//! Undirected graphs with optional labels, ground-truth edge masks and
//! relaxation weights, plus edge-subset selection and noise injection.

mod batch;
mod dot;
mod io;

pub use batch::GraphBatch;
pub use dot::export_dot;
pub use io::{dataset_from_json, dataset_to_json, graph_from_json, graph_to_json};

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    feature_dim: usize,
    features: Vec<f64>,
    edges: Vec<(usize, usize)>,
    label: Option<usize>,
    gt_edge_mask: Option<Vec<bool>>,
    edge_weights: Option<Vec<f64>>,
}

impl Graph {
    /// Builds a graph, orienting every pair as `i < j` and sorting the edge list.
    /// Per-edge data passed through `gt_edge_mask` follows its edge.
    pub fn new(
        num_nodes: usize,
        features: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
        label: Option<usize>,
        gt_edge_mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        if let Some(mask) = &gt_edge_mask {
            if mask.len() != edges.len() {
                return Err(Error::InvalidGraph(format!(
                    "gt_edge_mask has {} entries for {} edges",
                    mask.len(),
                    edges.len()
                )));
            }
        }
        let mut order: Vec<usize> = (0..edges.len()).collect();
        let oriented: Vec<(usize, usize)> =
            edges.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
        order.sort_by_key(|&k| oriented[k]);
        let sorted_edges = order.iter().map(|&k| oriented[k]).collect();
        let sorted_mask = gt_edge_mask.map(|m| order.iter().map(|&k| m[k]).collect());
        Self::from_parts(num_nodes, features, sorted_edges, label, sorted_mask, None)
    }

    /// Builds a graph keeping the given edge order. Pairs are oriented `i < j`.
    pub fn from_parts(
        num_nodes: usize,
        features: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
        label: Option<usize>,
        gt_edge_mask: Option<Vec<bool>>,
        edge_weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        if features.len() != num_nodes {
            return Err(Error::InvalidGraph(format!(
                "{} feature rows for {num_nodes} nodes",
                features.len()
            )));
        }
        let feature_dim = features[0].len();
        let mut flat = Vec::with_capacity(num_nodes * feature_dim);
        for (v, row) in features.iter().enumerate() {
            if row.len() != feature_dim {
                return Err(Error::InvalidGraph(format!(
                    "node {v} has {} features, expected {feature_dim}",
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "node {v} has a non-finite feature"
                )));
            }
            flat.extend_from_slice(row);
        }
        let edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        let graph = Graph {
            num_nodes,
            feature_dim,
            features: flat,
            edges,
            label,
            gt_edge_mask,
            edge_weights: None,
        };
        graph.validate_edges()?;
        match edge_weights {
            Some(w) => graph.with_edge_weights(w),
            None => Ok(graph),
        }
    }

    fn validate_edges(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.edges.len());
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            if i == j {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} is a self-loop on node {i}"
                )));
            }
            if j >= self.num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} ({i},{j}) references a node outside 0..{}",
                    self.num_nodes
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} ({i},{j}) is a duplicate"
                )));
            }
        }
        if let Some(mask) = &self.gt_edge_mask {
            if mask.len() != self.edges.len() {
                return Err(Error::InvalidGraph(format!(
                    "gt_edge_mask has {} entries for {} edges",
                    mask.len(),
                    self.edges.len()
                )));
            }
        }
        Ok(())
    }

    /// Returns a copy carrying per-edge weights in `[0, 1]`.
    pub fn with_edge_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::InvalidGraph(format!(
                "{} edge weights for {} edges",
                weights.len(),
                self.edges.len()
            )));
        }
        if let Some((k, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(0.0..=1.0).contains(*w))
        {
            return Err(Error::InvalidGraph(format!(
                "edge weight {k} = {w} is outside [0,1]"
            )));
        }
        Ok(Graph {
            edge_weights: Some(weights),
            ..self.clone()
        })
    }

    pub fn without_edge_weights(&self) -> Self {
        Graph {
            edge_weights: None,
            ..self.clone()
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Row-major `[num_nodes x feature_dim]` feature values.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature_row(&self, v: usize) -> &[f64] {
        &self.features[v * self.feature_dim..(v + 1) * self.feature_dim]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn gt_edge_mask(&self) -> Option<&[bool]> {
        self.gt_edge_mask.as_deref()
    }

    pub fn edge_weights(&self) -> Option<&[f64]> {
        self.edge_weights.as_deref()
    }

    /// Indices of ground-truth explanation edges.
    pub fn gt_edges(&self) -> Option<Vec<usize>> {
        self.gt_edge_mask.as_ref().map(|m| {
            m.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(k, _)| k)
                .collect()
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        self.edges.contains(&key)
    }

    /// True when every node is reachable from node 0.
    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.num_nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Relabels nodes so that old node `v` becomes `perm[v]`. Edge order and
    /// per-edge data are kept.
    pub fn permute_nodes(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_nodes {
            return Err(Error::invalid("permutation length differs from node count"));
        }
        let mut rows = vec![Vec::new(); self.num_nodes];
        for v in 0..self.num_nodes {
            rows[perm[v]] = self.feature_row(v).to_vec();
        }
        let edges = self
            .edges
            .iter()
            .map(|&(i, j)| (perm[i], perm[j]))
            .collect();
        Self::from_parts(
            self.num_nodes,
            rows,
            edges,
            self.label,
            self.gt_edge_mask.clone(),
            self.edge_weights.clone(),
        )
    }

    /// Feature rows as nested vectors.
    pub fn feature_rows(&self) -> Vec<Vec<f64>> {
        (0..self.num_nodes)
            .map(|v| self.feature_row(v).to_vec())
            .collect()
    }
}

/// A selection of edges from a parent graph with `parent_edges` edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgraph {
    parent_edges: usize,
    selected: Vec<usize>,
}

impl Subgraph {
    pub fn new(parent: &Graph, mut selected: Vec<usize>) -> Result<Self> {
        selected.sort_unstable();
        if selected.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("subgraph selects an edge twice"));
        }
        if let Some(&k) = selected.last() {
            if k >= parent.num_edges() {
                return Err(Error::invalid(format!(
                    "edge index {k} out of range for {} edges",
                    parent.num_edges()
                )));
            }
        }
        Ok(Subgraph {
            parent_edges: parent.num_edges(),
            selected,
        })
    }

    pub fn empty(parent: &Graph) -> Self {
        Subgraph {
            parent_edges: parent.num_edges(),
            selected: Vec::new(),
        }
    }

    /// Selected edge indices, ascending.
    pub fn edges(&self) -> &[usize] {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn parent_edges(&self) -> usize {
        self.parent_edges
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.selected.binary_search(&edge).is_ok()
    }

    /// 0/1 weights over the parent edges.
    pub fn indicator(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.parent_edges];
        for &k in &self.selected {
            w[k] = 1.0;
        }
        w
    }
}

/// Edge indices sorted by descending score, ties to the smaller index.
pub fn rank_edges(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Number of edges kept at selection ratio `r`: `ceil(r * |E|)`.
pub fn selection_count(ratio: f64, num_edges: usize) -> Result<usize> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::invalid(format!(
            "selection ratio {ratio} is outside (0, 1]"
        )));
    }
    // guard against 0.3 * 10 = 3.0000000000000004
    let raw = ratio * num_edges as f64;
    Ok(((raw - 1e-9).ceil().max(0.0) as usize).min(num_edges))
}

fn top_k(graph: &Graph, k: usize) -> Result<Subgraph> {
    let weights = graph
        .edge_weights()
        .ok_or_else(|| Error::invalid("edge selection needs edge weights"))?;
    let selected = rank_edges(weights).into_iter().take(k).collect();
    Subgraph::new(graph, selected)
}

/// The `ceil(r * |E|)` highest-weighted edges.
pub fn top_r_subgraph(graph: &Graph, ratio: f64) -> Result<Subgraph> {
    let k = selection_count(ratio, graph.num_edges())?;
    top_k(graph, k)
}

/// The `min(n, |E|)` highest-weighted edges.
pub fn top_n_subgraph(graph: &Graph, n: usize) -> Result<Subgraph> {
    if n == 0 {
        return Err(Error::invalid("top-n selection needs n >= 1"));
    }
    top_k(graph, n.min(graph.num_edges()))
}

/// Copy of `graph` with `count` uniformly chosen new edges appended.
///
/// New edges are absent from the ground-truth mask and get weight 1 when the
/// graph carries weights.
pub fn add_noise_edges<R: Rng + ?Sized>(graph: &Graph, count: usize, rng: &mut R) -> Result<Graph> {
    if count == 0 {
        return Ok(graph.clone());
    }
    let n = graph.num_nodes();
    let existing: HashSet<(usize, usize)> = graph.edges().iter().copied().collect();
    let free: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|e| !existing.contains(e))
        .collect();
    if count > free.len() {
        return Err(Error::invalid(format!(
            "cannot add {count} noise edges, only {} non-edges exist",
            free.len()
        )));
    }
    let picks = index::sample(rng, free.len(), count);
    let mut edges = graph.edges().to_vec();
    edges.extend(picks.iter().map(|k| free[k]));
    let mask = graph.gt_edge_mask().map(|m| {
        let mut m = m.to_vec();
        m.resize(edges.len(), false);
        m
    });
    let weights = graph.edge_weights().map(|w| {
        let mut w = w.to_vec();
        w.resize(edges.len(), 1.0);
        w
    });
    Graph::from_parts(n, graph.feature_rows(), edges, graph.label(), mask, weights)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetMeta {
    pub name: String,
    pub num_classes: usize,
    pub feature_dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    meta: DatasetMeta,
    graphs: Vec<Graph>,
}

impl Dataset {
    pub fn new(meta: DatasetMeta, graphs: Vec<Graph>) -> Result<Self> {
        for (k, g) in graphs.iter().enumerate() {
            if g.feature_dim() != meta.feature_dim {
                return Err(Error::InvalidGraph(format!(
                    "graph {k} has feature_dim {}, dataset declares {}",
                    g.feature_dim(),
                    meta.feature_dim
                )));
            }
            if let Some(y) = g.label() {
                if y >= meta.num_classes {
                    return Err(Error::InvalidGraph(format!(
                        "graph {k} has label {y} but the dataset has {} classes",
                        meta.num_classes
                    )));
                }
            }
        }
        Ok(Dataset { meta, graphs })
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Class labels of every graph; errors if any graph is unlabeled.
    pub fn labels(&self) -> Result<Vec<usize>> {
        self.graphs
            .iter()
            .enumerate()
            .map(|(k, g)| {
                g.label()
                    .ok_or_else(|| Error::invalid(format!("graph {k} has no label")))
            })
            .collect()
    }

    pub fn mean_nodes(&self) -> f64 {
        self.graphs
            .iter()
            .map(|g| g.num_nodes() as f64)
            .sum::<f64>()
            / self.len().max(1) as f64
    }

    pub fn mean_edges(&self) -> f64 {
        self.graphs
            .iter()
            .map(|g| g.num_edges() as f64)
            .sum::<f64>()
            / self.len().max(1) as f64
    }

    /// Same metadata, different graphs.
    pub fn with_graphs(&self, graphs: Vec<Graph>) -> Result<Self> {
        Dataset::new(self.meta.clone(), graphs)
    }
}
