//! Train the USIB explainer against a frozen encoder and explain one graph.

use usib::encoder::Encoder;
use usib::explainer::{train_usib, Selection, UsibHyper};
use usib::synthetic::{generate_ba3_dataset, Ba3Config};

pub fn run_example() -> usib::Result<Vec<usize>> {
    let ds = generate_ba3_dataset(&Ba3Config {
        graphs_per_class: 8,
        seed: 4,
        ..Ba3Config::default()
    })?;
    let encoder = Encoder::new(ds.meta().feature_dim, 4);
    let hyper = UsibHyper {
        epochs: 3,
        batch_size: 8,
        seed: 4,
        ..UsibHyper::default()
    };
    let (explainer, log) = train_usib(&ds, &encoder, &hyper)?;
    println!("L1 per epoch {:?}", log.epoch_l1);
    println!("L2 per epoch {:?}", log.epoch_l2);

    let g = &ds.graphs()[0];
    let r = explainer.explain(g, Selection::Count(5))?;
    let edges: Vec<_> = r.selected.edges().iter().map(|&k| g.edges()[k]).collect();
    println!("top edges of graph 0: {edges:?}");
    Ok(r.selected.edges().to_vec())
}

fn main() -> usib::Result<()> {
    run_example()?;
    Ok(())
}
