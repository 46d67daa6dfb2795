//! Sweep the bottleneck weight beta and watch the edge masks sharpen.

use usib::encoder::Encoder;
use usib::experiment::{sweep_betas, RunConfig};
use usib::explainer::UsibHyper;
use usib::synthetic::{generate_ba3_dataset, Ba3Config};

pub fn run_example() -> usib::Result<usib::experiment::SweepReport> {
    let ds = generate_ba3_dataset(&Ba3Config {
        graphs_per_class: 6,
        seed: 8,
        ..Ba3Config::default()
    })?;
    let encoder = Encoder::new(ds.meta().feature_dim, 8);
    let mut cfg = RunConfig {
        seed: Some(8),
        betas: vec![0.01, 1.0, 100.0],
        usib: UsibHyper {
            epochs: 3,
            batch_size: 6,
            ..UsibHyper::default()
        },
        ..RunConfig::default()
    };
    cfg.probe.iterations = 50;
    let report = sweep_betas(&cfg, &ds, &encoder)?;
    print!("{}", report.csv());
    Ok(report)
}

fn main() -> usib::Result<()> {
    run_example()?;
    Ok(())
}
