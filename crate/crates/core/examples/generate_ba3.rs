//! Generate a small BA3 motif dataset, print its statistics and render one
//! graph with its ground-truth motif highlighted.

use usib::graph::{export_dot, Subgraph};
use usib::synthetic::{generate_ba3_dataset, Ba3Config};

pub fn run_example() -> usib::Result<String> {
    let ds = generate_ba3_dataset(&Ba3Config {
        graphs_per_class: 5,
        seed: 11,
        ..Ba3Config::default()
    })?;
    let g = &ds.graphs()[0];
    let motif = Subgraph::new(g, g.gt_edges().unwrap_or_default())?;
    println!(
        "{} graphs, {:.2} nodes and {:.2} edges on average",
        ds.len(),
        ds.mean_nodes(),
        ds.mean_edges()
    );
    println!(
        "graph 0: label {:?}, {} motif edges",
        g.label(),
        motif.len()
    );
    Ok(export_dot(g, &motif))
}

fn main() -> usib::Result<()> {
    println!("{}", run_example()?);
    Ok(())
}
