//! The full evaluation pipeline at toy scale: every method scored by its ACC
//! curve, ACC-AUC and Recall@n, written as CSV and JSON.

use usib::experiment::{evaluate_methods, write_report, EncoderMode, RunConfig};
use usib::explainer::UsibHyper;
use usib::synthetic::Ba3Config;

pub fn toy_config(seed: u64) -> RunConfig {
    let mut cfg = RunConfig {
        seed: Some(seed),
        usib: UsibHyper {
            epochs: 2,
            batch_size: 8,
            ..UsibHyper::default()
        },
        ..RunConfig::default()
    };
    cfg.data.ba3 = Ba3Config {
        graphs_per_class: 10,
        ..Ba3Config::default()
    };
    cfg.encoder.mode = EncoderMode::Untrained;
    cfg.probe.iterations = 100;
    cfg
}

pub fn run_example(out_dir: &std::path::Path) -> usib::Result<usib::evaluation::MetricReport> {
    let cfg = toy_config(5);
    let ds = usib::experiment::load_or_generate_data(&cfg)?;
    let encoder = usib::experiment::build_encoder(&cfg, &ds)?.encoder;
    let report = evaluate_methods(&cfg, &ds, &encoder, None)?;
    write_report(&report, out_dir)?;
    print!("{}", report.summary_csv());
    Ok(report)
}

fn main() -> usib::Result<()> {
    run_example(&std::env::temp_dir().join("usib-evaluate-example"))?;
    Ok(())
}
