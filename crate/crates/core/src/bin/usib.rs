use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use usib::experiment::{self, Method, RunConfig};
use usib::explainer::Selection;

#[derive(Parser)]
#[command(
    name = "usib",
    version,
    about = "Explain unsupervised graph representations with subgraph bottlenecks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (the USIB_OUT_DIR variable takes precedence).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Use this dataset instead of generating one.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Use this encoder checkpoint instead of training one.
    #[arg(long, global = true)]
    encoder: Option<PathBuf>,
    /// Use this explainer checkpoint instead of training one.
    #[arg(long, global = true)]
    explainer: Option<PathBuf>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the BA3 motif dataset.
    GenData {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train (or build) the GIN encoder and report linear-probe accuracy.
    TrainEncoder {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write per-graph explanations for one method.
    Explain {
        /// usib, sa, gradcam, ig or random.
        #[arg(long, default_value = "usib")]
        method: String,
        /// Keep this fraction of edges.
        #[arg(long, conflicts_with = "count")]
        ratio: Option<f64>,
        /// Keep this many edges.
        #[arg(long)]
        count: Option<usize>,
        /// Also write Graphviz files.
        #[arg(long)]
        dot: bool,
        /// Save the trained explainer here.
        #[arg(long)]
        save_explainer: Option<PathBuf>,
    },
    /// Score all configured methods (ACC curve, ACC-AUC, Recall@n).
    Evaluate,
    /// Train and score USIB over the beta grid.
    SweepBeta,
    /// Check the information-theoretic claims on random discrete systems.
    VerifyTheory {
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn config(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => RunConfig::default(),
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if let Some(d) = &common.out_dir {
        cfg.out_dir = d.clone();
    }
    if common.data.is_some() {
        cfg.data.path = common.data.clone();
    }
    if common.encoder.is_some() {
        cfg.encoder.path = common.encoder.clone();
    }
    if common.explainer.is_some() {
        cfg.explainer_path = common.explainer.clone();
    }
    if let Some(b) = common.beta {
        cfg.usib.beta = b;
    }
    if let Some(e) = common.epochs {
        cfg.usib.epochs = e;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut cfg = config(&cli.common)?;
    match cli.command {
        Command::GenData { output } => {
            let (ds, path) = experiment::gen_data(&cfg, output.as_deref())?;
            println!("{}", experiment::dataset_stats(&ds));
            println!("wrote {}", path.display());
        }
        Command::TrainEncoder { output } => {
            let (run, path) = experiment::train_encoder(&cfg, output.as_deref())?;
            if let Some(log) = &run.log {
                if let Some(last) = log.epoch_losses.last() {
                    println!("final infograph loss {last:.4}");
                }
            }
            println!("probe accuracy {:.4}", run.probe_accuracy);
            println!("wrote {}", path.display());
        }
        Command::Explain {
            method,
            ratio,
            count,
            dot,
            save_explainer,
        } => {
            let method: Method = method.parse()?;
            let selection = match (ratio, count) {
                (Some(r), _) => Selection::Ratio(r),
                (None, Some(n)) => Selection::Count(n),
                (None, None) => cfg.usib.selection,
            };
            if let Some(path) = save_explainer {
                if method != Method::Usib {
                    bail!("--save-explainer only applies to the usib method");
                }
                let ds = experiment::load_or_generate_data(&cfg)?;
                let enc = experiment::build_encoder(&cfg, &ds)?.encoder;
                experiment::build_explainer(&cfg, &ds, &enc)?
                    .0
                    .save(&path)?;
                println!("wrote {}", path.display());
                cfg.explainer_path = Some(path);
            }
            let dir = experiment::explain(&cfg, method, selection, dot)?;
            println!("wrote {}", dir.display());
        }
        Command::Evaluate => {
            let (report, dir) = experiment::evaluate(&cfg)?;
            print!("{}", report.summary_csv());
            println!("wrote {}", dir.display());
        }
        Command::SweepBeta => {
            let (report, dir) = experiment::sweep_beta(&cfg)?;
            print!("{}", report.csv());
            if let Some(best) = report.best() {
                let place = if report.best_is_interior() {
                    "interior"
                } else {
                    "edge of the grid"
                };
                println!(
                    "best beta {} (acc_auc {:.4}, {place})",
                    best.beta, best.acc_auc
                );
            }
            println!("wrote {}", dir.display());
        }
        Command::VerifyTheory { samples } => {
            if let Some(n) = samples {
                cfg.theory_samples = n;
            }
            let (report, path) = experiment::verify_theory(&cfg)?;
            print!("{}", report.table());
            println!("wrote {}", path.display());
            if !report.passed() {
                bail!("some theoretical checks failed");
            }
        }
    }
    Ok(())
}
