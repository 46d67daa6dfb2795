use std::fmt::Write;

use super::{Graph, Subgraph};

/// Graphviz rendering: explanation edges in red, ground-truth motif nodes
/// filled gold, every other node filled dark gray.
pub fn export_dot(graph: &Graph, explanation: &Subgraph) -> String {
    let mut motif = vec![false; graph.num_nodes()];
    if let Some(mask) = graph.gt_edge_mask() {
        for (&(i, j), &m) in graph.edges().iter().zip(mask) {
            if m {
                motif[i] = true;
                motif[j] = true;
            }
        }
    }

    let mut out = String::from("graph G {\n  node [shape=circle, style=filled];\n");
    for (v, &is_motif) in motif.iter().enumerate() {
        if is_motif {
            let _ = writeln!(out, "  {v} [fillcolor=gold];");
        } else {
            let _ = writeln!(out, "  {v} [fillcolor=gray25, fontcolor=white];");
        }
    }
    for (k, &(i, j)) in graph.edges().iter().enumerate() {
        if explanation.contains(k) {
            let _ = writeln!(out, "  {i} -- {j} [color=red, penwidth=2.5];");
        } else {
            let _ = writeln!(out, "  {i} -- {j} [color=gray60];");
        }
    }
    out.push_str("}\n");
    out
}
