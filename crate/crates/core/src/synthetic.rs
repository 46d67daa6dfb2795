//! BA3-style benchmark: a Barabási–Albert base graph with one attached motif
//! (house, cycle or grid) whose internal edges form the ground-truth
//! explanation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, DatasetMeta, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotifKind {
    House,
    Cycle,
    Grid,
}

impl MotifKind {
    pub const ALL: [MotifKind; 3] = [MotifKind::House, MotifKind::Cycle, MotifKind::Grid];

    pub fn label(self) -> usize {
        match self {
            MotifKind::House => 0,
            MotifKind::Cycle => 1,
            MotifKind::Grid => 2,
        }
    }

    pub fn from_label(label: usize) -> Option<Self> {
        Self::ALL.get(label).copied()
    }

    pub fn num_nodes(self) -> usize {
        match self {
            MotifKind::House => 5,
            MotifKind::Cycle => 6,
            MotifKind::Grid => 9,
        }
    }

    /// Motif-local edge list.
    pub fn edges(self) -> Vec<(usize, usize)> {
        match self {
            // square 0-1-2-3 with roof node 4 over the 0-1 side
            MotifKind::House => vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 4)],
            MotifKind::Cycle => (0..6).map(|i| (i, (i + 1) % 6)).collect(),
            MotifKind::Grid => {
                let mut e = Vec::with_capacity(12);
                for r in 0..3 {
                    for c in 0..3 {
                        let v = 3 * r + c;
                        if c < 2 {
                            e.push((v, v + 1));
                        }
                        if r < 2 {
                            e.push((v, v + 3));
                        }
                    }
                }
                e
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    ConstantOne,
    RandomNormal,
}

/// Node feature layout shared by every graph of a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub dim: usize,
    pub mode: FeatureMode,
}

impl FeatureSpec {
    pub fn constant(dim: usize) -> Self {
        FeatureSpec {
            dim,
            mode: FeatureMode::ConstantOne,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| match self.mode {
                FeatureMode::ConstantOne => vec![1.0; self.dim],
                FeatureMode::RandomNormal => {
                    (0..self.dim).map(|_| rng.sample(StandardNormal)).collect()
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Ba3Config {
    pub graphs_per_class: usize,
    pub base_nodes: usize,
    pub ba_attachment: usize,
    pub feature_dim: usize,
    pub feature_mode: FeatureMode,
    pub seed: u64,
}

impl Default for Ba3Config {
    fn default() -> Self {
        Ba3Config {
            graphs_per_class: 100,
            base_nodes: 14,
            ba_attachment: 1,
            feature_dim: 8,
            feature_mode: FeatureMode::ConstantOne,
            seed: 0,
        }
    }
}

impl Ba3Config {
    fn validate(&self) -> Result<()> {
        if self.graphs_per_class == 0 {
            return Err(Error::invalid("graphs_per_class must be at least 1"));
        }
        if self.ba_attachment == 0 || self.base_nodes < self.ba_attachment + 1 {
            return Err(Error::invalid(format!(
                "base_nodes ({}) must exceed ba_attachment ({}) >= 1",
                self.base_nodes, self.ba_attachment
            )));
        }
        if self.feature_dim == 0 {
            return Err(Error::invalid("feature_dim must be at least 1"));
        }
        Ok(())
    }
}

/// Preferential-attachment edges: a seed clique on `m + 1` nodes, then each
/// new node links to `m` distinct existing nodes chosen proportionally to degree.
pub fn ba_edges<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    if m == 0 || n <= m {
        return Err(Error::invalid(format!(
            "Barabási–Albert needs n > m >= 1, got n={n}, m={m}"
        )));
    }
    let mut edges = Vec::with_capacity(m * (m + 1) / 2 + (n - m - 1) * m);
    // every edge endpoint, so a uniform pick is a degree-proportional pick
    let mut endpoints = Vec::new();
    for i in 0..=m {
        for j in i + 1..=m {
            edges.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    for v in m + 1..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    Ok(edges)
}

pub fn generate_ba_graph<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    features: FeatureSpec,
    rng: &mut R,
) -> Result<Graph> {
    let edges = ba_edges(n, m, rng)?;
    let rows = features.sample(n, rng);
    Graph::new(n, rows, edges, None, None)
}

/// Appends `kind` after the base nodes and links it with one bridge edge
/// between a uniformly chosen base node and motif node. Only motif-internal
/// edges are marked as ground truth.
pub fn attach_motif<R: Rng + ?Sized>(
    base: &Graph,
    kind: MotifKind,
    features: FeatureSpec,
    rng: &mut R,
) -> Result<Graph> {
    let off = base.num_nodes();
    let k = kind.num_nodes();
    let mut edges = base.edges().to_vec();
    let mut mask = vec![false; edges.len()];
    for (i, j) in kind.edges() {
        edges.push((off + i, off + j));
        mask.push(true);
    }
    let anchor = rng.random_range(0..off);
    let entry = off + rng.random_range(0..k);
    edges.push((anchor, entry));
    mask.push(false);

    let mut rows = base.feature_rows();
    rows.extend(features.sample(k, rng));
    Graph::new(off + k, rows, edges, Some(kind.label()), Some(mask))
}

/// Class-balanced BA3 dataset. Graph `i` is generated from its own stream of
/// the seed, then the whole list is shuffled deterministically.
pub fn generate_ba3_dataset(config: &Ba3Config) -> Result<Dataset> {
    config.validate()?;
    let spec = FeatureSpec {
        dim: config.feature_dim,
        mode: config.feature_mode,
    };
    let mut graphs = Vec::with_capacity(3 * config.graphs_per_class);
    for (c, kind) in MotifKind::ALL.iter().enumerate() {
        for i in 0..config.graphs_per_class {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(1 + (c * config.graphs_per_class + i) as u64);
            let base = generate_ba_graph(config.base_nodes, config.ba_attachment, spec, &mut rng)?;
            graphs.push(attach_motif(&base, *kind, spec, &mut rng)?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    graphs.shuffle(&mut rng);
    Dataset::new(
        DatasetMeta {
            name: "BA3".into(),
            num_classes: 3,
            feature_dim: config.feature_dim,
        },
        graphs,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn motif_sizes() {
        assert_eq!(MotifKind::House.edges().len(), 6);
        assert_eq!(MotifKind::Cycle.edges().len(), 6);
        assert_eq!(MotifKind::Grid.edges().len(), 12);
        for kind in MotifKind::ALL {
            assert_eq!(MotifKind::from_label(kind.label()), Some(kind));
            let max = kind.edges().iter().map(|&(i, j)| i.max(j)).max().unwrap();
            assert_eq!(max + 1, kind.num_nodes());
        }
    }

    #[test]
    fn ba_edge_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(ba_edges(3, 1, &mut rng).unwrap().len(), 2);
        assert_eq!(ba_edges(14, 1, &mut rng).unwrap().len(), 13);
        assert_eq!(ba_edges(10, 2, &mut rng).unwrap().len(), 1 + 8 * 2);
        assert!(ba_edges(2, 2, &mut rng).is_err());
        assert!(ba_edges(5, 0, &mut rng).is_err());
    }

    #[test]
    fn house_on_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = FeatureSpec::constant(4);
        let base = generate_ba_graph(14, 1, spec, &mut rng).unwrap();
        let g = attach_motif(&base, MotifKind::House, spec, &mut rng).unwrap();
        assert_eq!(g.num_nodes(), 19);
        assert_eq!(g.num_edges(), 13 + 6 + 1);
        assert_eq!(g.gt_edge_mask().unwrap().iter().filter(|&&b| b).count(), 6);
        assert_eq!(g.label(), Some(0));
        // the only edge crossing from base to motif is the bridge, and it is not ground truth
        let bridge: Vec<usize> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| i < 14 && j >= 14)
            .map(|(k, _)| k)
            .collect();
        assert_eq!(bridge.len(), 1);
        assert!(!g.gt_edge_mask().unwrap()[bridge[0]]);
        assert!(g.is_connected());
    }

    #[test]
    fn grid_mask_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = FeatureSpec::constant(1);
        let base = generate_ba_graph(3, 1, spec, &mut rng).unwrap();
        let g = attach_motif(&base, MotifKind::Grid, spec, &mut rng).unwrap();
        assert_eq!(g.gt_edges().unwrap().len(), 12);
    }

    #[test]
    fn invalid_config() {
        let cfg = Ba3Config {
            graphs_per_class: 0,
            ..Ba3Config::default()
        };
        assert!(generate_ba3_dataset(&cfg).is_err());
        let cfg = Ba3Config {
            base_nodes: 1,
            ..Ba3Config::default()
        };
        assert!(generate_ba3_dataset(&cfg).is_err());
    }
}
