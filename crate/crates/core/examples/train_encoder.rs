//! Train the GIN encoder with InfoGraph on unlabeled graphs, then check how
//! much class information its representations carry with a linear probe.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use usib::encoder::{train_infograph, InfographConfig};
use usib::evaluation::{full_graph_accuracy, ProbeConfig};
use usib::synthetic::{generate_ba3_dataset, Ba3Config};

pub fn run_example() -> usib::Result<(f64, f64)> {
    let ds = generate_ba3_dataset(&Ba3Config {
        graphs_per_class: 10,
        seed: 2,
        ..Ba3Config::default()
    })?;
    let config = InfographConfig {
        epochs: 3,
        ..InfographConfig::default()
    };
    let (encoder, log) = train_infograph(&ds, &config, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let acc = full_graph_accuracy(&ds, &encoder, &ProbeConfig::default(), &mut rng)?;
    println!("infograph loss per epoch {:?}", log.epoch_losses);
    println!("probe accuracy {:.3} +- {:.3}", acc.mean, acc.std);
    Ok((log.final_loss(), acc.mean))
}

fn main() -> usib::Result<()> {
    run_example()?;
    Ok(())
}
