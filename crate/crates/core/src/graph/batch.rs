use std::rc::Rc;

use super::Graph;
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// Several graphs packed into one disjoint union for message passing.
///
/// Each undirected edge `e = (i, j)` becomes the directed pair `i -> j`,
/// `j -> i` at positions `2e` and `2e + 1` (offset by the edges of earlier
/// graphs).
#[derive(Clone, Debug)]
pub struct GraphBatch {
    num_graphs: usize,
    feature_dim: usize,
    features: Tensor,
    src: Rc<[usize]>,
    dst: Rc<[usize]>,
    directed_to_edge: Rc<[usize]>,
    node_graph: Rc<[usize]>,
    node_offsets: Vec<usize>,
    edge_offsets: Vec<usize>,
}

impl GraphBatch {
    pub fn new<'a, I>(graphs: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Graph>,
    {
        let graphs: Vec<&Graph> = graphs.into_iter().collect();
        let first = graphs
            .first()
            .ok_or_else(|| Error::invalid("cannot batch zero graphs"))?;
        let feature_dim = first.feature_dim();
        let mut features = Vec::new();
        let (mut src, mut dst, mut dir_edge, mut node_graph) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut node_offsets = vec![0];
        let mut edge_offsets = vec![0];
        for (gi, g) in graphs.iter().enumerate() {
            if g.feature_dim() != feature_dim {
                return Err(Error::shape(
                    "GraphBatch",
                    format!(
                        "graph {gi} has feature_dim {}, expected {feature_dim}",
                        g.feature_dim()
                    ),
                ));
            }
            let off = *node_offsets.last().unwrap();
            let eoff = *edge_offsets.last().unwrap();
            features.extend_from_slice(g.features());
            node_graph.extend(std::iter::repeat_n(gi, g.num_nodes()));
            for (k, &(i, j)) in g.edges().iter().enumerate() {
                src.extend([off + i, off + j]);
                dst.extend([off + j, off + i]);
                dir_edge.extend([eoff + k, eoff + k]);
            }
            node_offsets.push(off + g.num_nodes());
            edge_offsets.push(eoff + g.num_edges());
        }
        let num_nodes = *node_offsets.last().unwrap();
        Ok(GraphBatch {
            num_graphs: graphs.len(),
            feature_dim,
            features: Tensor::matrix(num_nodes, feature_dim, features)?,
            src: src.into(),
            dst: dst.into(),
            directed_to_edge: dir_edge.into(),
            node_graph: node_graph.into(),
            node_offsets,
            edge_offsets,
        })
    }

    pub fn num_graphs(&self) -> usize {
        self.num_graphs
    }

    pub fn num_nodes(&self) -> usize {
        *self.node_offsets.last().unwrap()
    }

    pub fn num_edges(&self) -> usize {
        *self.edge_offsets.last().unwrap()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn src(&self) -> Rc<[usize]> {
        Rc::clone(&self.src)
    }

    pub fn dst(&self) -> Rc<[usize]> {
        Rc::clone(&self.dst)
    }

    /// For each directed edge, the batch-global undirected edge it came from.
    pub fn directed_to_edge(&self) -> Rc<[usize]> {
        Rc::clone(&self.directed_to_edge)
    }

    /// For each node, the index of the graph it belongs to.
    pub fn node_graph(&self) -> Rc<[usize]> {
        Rc::clone(&self.node_graph)
    }

    /// Range of batch-global node ids owned by graph `g`.
    pub fn node_range(&self, g: usize) -> std::ops::Range<usize> {
        self.node_offsets[g]..self.node_offsets[g + 1]
    }

    /// Range of batch-global undirected edge ids owned by graph `g`.
    pub fn edge_range(&self, g: usize) -> std::ops::Range<usize> {
        self.edge_offsets[g]..self.edge_offsets[g + 1]
    }

    /// Batch-global endpoints of every undirected edge.
    pub fn edge_endpoints(&self) -> (Rc<[usize]>, Rc<[usize]>) {
        let heads: Vec<usize> = self.src.iter().step_by(2).copied().collect();
        let tails: Vec<usize> = self.dst.iter().step_by(2).copied().collect();
        (heads.into(), tails.into())
    }
}
