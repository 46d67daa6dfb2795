//! Gradient baselines on an untrained encoder, scored by Recall@5 against
//! the planted motifs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use usib::baselines::Baseline;
use usib::encoder::Encoder;
use usib::evaluation::dataset_recall;
use usib::synthetic::{generate_ba3_dataset, Ba3Config};

pub fn run_example() -> usib::Result<Vec<(&'static str, f64)>> {
    let ds = generate_ba3_dataset(&Ba3Config {
        graphs_per_class: 5,
        seed: 9,
        ..Ba3Config::default()
    })?;
    let encoder = Encoder::new(ds.meta().feature_dim, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut out = Vec::new();
    for b in Baseline::ALL {
        let scores = ds
            .graphs()
            .iter()
            .map(|g| b.explain(g, &encoder, &mut rng))
            .collect::<usib::Result<Vec<_>>>()?;
        let (recall, _) = dataset_recall(&ds, &scores, 5)?;
        println!("{:<8} recall@5 {recall:.3}", b.name());
        out.push((b.name(), recall));
    }
    Ok(out)
}

fn main() -> usib::Result<()> {
    run_example()?;
    Ok(())
}
