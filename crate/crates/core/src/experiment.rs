//! Reproducible experiment pipelines behind the command-line tool.
//!
//! Every stage draws its randomness from one run seed through a named
//! sub-stream, so retraining the encoder, say, leaves the generated data and
//! the evaluation folds untouched.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::Baseline;
use crate::encoder::{train_infograph, Encoder, InfographConfig, TrainingLog};
use crate::error::{Error, Result};
use crate::evaluation::{
    acc_at_r, acc_auc, dataset_recall, full_graph_accuracy, ratio_grid, AccPoint, MethodReport,
    MetricReport, ProbeConfig, ReportMeta,
};
use crate::explainer::{train_usib, Explainer, Selection, UsibHyper, UsibTrainingLog};
use crate::graph::{dataset_from_json, dataset_to_json, export_dot, Dataset, Subgraph};
use crate::info_theory::{run_theory_suite, Cardinalities, TheorySuiteReport};
use crate::synthetic::{generate_ba3_dataset, Ba3Config};

/// Overrides the configured output directory when set.
pub const OUT_DIR_ENV: &str = "USIB_OUT_DIR";

/// The beta grid swept by default.
pub const BETA_GRID: [f64; 6] = [0.001, 0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Data,
    Encoder,
    Explainer,
    Eval,
}

/// Seed for one stage, derived from the run seed on its own ChaCha stream.
pub fn stage_seed(seed: u64, stage: Stage) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage as u64 + 1);
    rng.next_u64()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderMode {
    Untrained,
    Infograph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Usib,
    Baseline(Baseline),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Usib => "usib",
            Method::Baseline(b) => b.name(),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "usib" {
            Ok(Method::Usib)
        } else {
            s.parse().map(Method::Baseline)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataSection {
    /// Load this dataset instead of generating BA3.
    pub path: Option<PathBuf>,
    /// Generation parameters; `seed` is replaced by the data sub-stream.
    pub ba3: Ba3Config,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderSection {
    /// Load this checkpoint instead of building an encoder.
    pub path: Option<PathBuf>,
    pub mode: EncoderMode,
    pub infograph: InfographConfig,
}

impl Default for EncoderSection {
    fn default() -> Self {
        EncoderSection {
            path: None,
            mode: EncoderMode::Infograph,
            infograph: InfographConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Required before any command runs.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub data: DataSection,
    pub encoder: EncoderSection,
    /// `seed` is replaced by the explainer sub-stream.
    pub usib: UsibHyper,
    /// Load this explainer instead of training one.
    pub explainer_path: Option<PathBuf>,
    pub methods: Vec<String>,
    pub recall_n: usize,
    pub probe: ProbeConfig,
    pub betas: Vec<f64>,
    pub theory_samples: usize,
    pub theory_cardinalities: Cardinalities,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            out_dir: PathBuf::from("results"),
            data: DataSection::default(),
            encoder: EncoderSection::default(),
            usib: UsibHyper {
                batch_size: 32,
                ..UsibHyper::default()
            },
            explainer_path: None,
            methods: ["usib", "sa", "gradcam", "ig", "random"]
                .map(String::from)
                .to_vec(),
            recall_n: 5,
            probe: ProbeConfig::default(),
            betas: BETA_GRID.to_vec(),
            theory_samples: 1000,
            theory_cardinalities: Cardinalities::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::invalid("a seed is required (--seed or `seed` in the config file)")
        })
    }

    /// The output directory, honouring the environment override.
    pub fn resolved_out_dir(&self) -> PathBuf {
        std::env::var_os(OUT_DIR_ENV).map_or_else(|| self.out_dir.clone(), PathBuf::from)
    }

    pub fn parsed_methods(&self) -> Result<Vec<Method>> {
        self.methods.iter().map(|m| m.parse()).collect()
    }

    /// Checks the seed, referenced paths and hyper-parameters.
    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        for p in [&self.data.path, &self.encoder.path, &self.explainer_path]
            .into_iter()
            .flatten()
        {
            if !p.exists() {
                return Err(Error::invalid(format!("{} does not exist", p.display())));
            }
        }
        self.usib.validate()?;
        self.parsed_methods()?;
        if self.recall_n == 0 {
            return Err(Error::invalid("recall_n must be at least 1"));
        }
        Ok(())
    }

    fn usib_hyper(&self, seed: u64) -> UsibHyper {
        UsibHyper {
            seed: stage_seed(seed, Stage::Explainer),
            ..self.usib.clone()
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

/// The dataset named by the config, generated or loaded.
pub fn load_or_generate_data(cfg: &RunConfig) -> Result<Dataset> {
    match &cfg.data.path {
        Some(p) => dataset_from_json(&fs::read_to_string(p)?),
        None => generate_ba3_dataset(&Ba3Config {
            seed: stage_seed(cfg.seed()?, Stage::Data),
            ..cfg.data.ba3.clone()
        }),
    }
}

/// `graphs=.. mean_nodes=.. mean_edges=..` with the full-scale BA3 reference.
pub fn dataset_stats(ds: &Dataset) -> String {
    format!(
        "graphs={} mean_nodes={:.2} mean_edges={:.2} (full-scale BA3 reference: 21.92 nodes, 29.51 edges)",
        ds.len(),
        ds.mean_nodes(),
        ds.mean_edges()
    )
}

pub fn gen_data(cfg: &RunConfig, output: Option<&Path>) -> Result<(Dataset, PathBuf)> {
    let ds = load_or_generate_data(cfg)?;
    let path = output.map_or_else(
        || cfg.resolved_out_dir().join("dataset.json"),
        Path::to_path_buf,
    );
    write(&path, &dataset_to_json(&ds))?;
    Ok((ds, path))
}

pub struct EncoderRun {
    pub encoder: Encoder,
    pub log: Option<TrainingLog>,
    pub probe_accuracy: f64,
}

/// Builds (or loads) the encoder and probes its full-graph representations.
pub fn build_encoder(cfg: &RunConfig, ds: &Dataset) -> Result<EncoderRun> {
    let seed = cfg.seed()?;
    let (encoder, log) = match (&cfg.encoder.path, cfg.encoder.mode) {
        (Some(p), _) => (Encoder::load(p)?, None),
        (None, EncoderMode::Untrained) => (
            Encoder::new(ds.meta().feature_dim, stage_seed(seed, Stage::Encoder)),
            None,
        ),
        (None, EncoderMode::Infograph) => {
            let (e, l) =
                train_infograph(ds, &cfg.encoder.infograph, stage_seed(seed, Stage::Encoder))?;
            (e, Some(l))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(seed, Stage::Eval));
    let probe_accuracy = full_graph_accuracy(ds, &encoder, &cfg.probe, &mut rng)?.mean;
    Ok(EncoderRun {
        encoder,
        log,
        probe_accuracy,
    })
}

pub fn train_encoder(cfg: &RunConfig, output: Option<&Path>) -> Result<(EncoderRun, PathBuf)> {
    let ds = load_or_generate_data(cfg)?;
    let run = build_encoder(cfg, &ds)?;
    let dir = cfg.resolved_out_dir();
    let path = output.map_or_else(|| dir.join("encoder.json"), Path::to_path_buf);
    run.encoder.save(&path)?;
    if let Some(log) = &run.log {
        write(
            &dir.join("encoder_log.json"),
            &serde_json::to_string_pretty(log)?,
        )?;
    }
    Ok((run, path))
}

/// The configured explainer, loaded or trained on `ds`.
pub fn build_explainer(
    cfg: &RunConfig,
    ds: &Dataset,
    encoder: &Encoder,
) -> Result<(Explainer, Option<UsibTrainingLog>)> {
    match &cfg.explainer_path {
        Some(p) => Ok((Explainer::load(p)?, None)),
        None => {
            let (ex, log) = train_usib(ds, encoder, &cfg.usib_hyper(cfg.seed()?))?;
            Ok((ex, Some(log)))
        }
    }
}

/// One score vector per graph; for USIB the edge logits, which rank edges
/// exactly as the inference weights do.
pub fn method_scores(
    method: Method,
    ds: &Dataset,
    encoder: &Encoder,
    explainer: Option<&Explainer>,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    match method {
        Method::Usib => explainer
            .ok_or_else(|| Error::invalid("USIB scores need a trained explainer"))?
            .dataset_logits(ds),
        Method::Baseline(b) => {
            let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(seed, Stage::Eval));
            rng.set_stream(100);
            ds.graphs()
                .iter()
                .map(|g| b.explain(g, encoder, &mut rng))
                .collect()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct ExplanationFile<'a> {
    graph_index: usize,
    method: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge_logits: Option<&'a [f64]>,
    edge_weights: Vec<f64>,
    scores: &'a [f64],
    selected_edges: Vec<(usize, usize)>,
}

/// Writes one JSON file (and optionally a DOT file) per graph under
/// `<out>/explanations/<method>/`. Returns the directory.
pub fn explain(
    cfg: &RunConfig,
    method: Method,
    selection: Selection,
    dot: bool,
) -> Result<PathBuf> {
    let seed = cfg.seed()?;
    let ds = load_or_generate_data(cfg)?;
    let encoder = build_encoder_quiet(cfg, &ds)?;
    let explainer = match method {
        Method::Usib => Some(build_explainer(cfg, &ds, &encoder)?.0),
        Method::Baseline(_) => None,
    };
    let scores = method_scores(method, &ds, &encoder, explainer.as_ref(), seed)?;
    let dir = cfg
        .resolved_out_dir()
        .join("explanations")
        .join(method.name());
    fs::create_dir_all(&dir)?;
    for (i, (g, s)) in ds.graphs().iter().zip(&scores).enumerate() {
        let keep = selection.count(g.num_edges())?;
        let selected = Subgraph::new(
            g,
            crate::graph::rank_edges(s).into_iter().take(keep).collect(),
        )?;
        let edge_weights = match &explainer {
            Some(ex) => ex.explain(g, selection)?.edge_weights,
            None => selected.indicator(),
        };
        let file = ExplanationFile {
            graph_index: i,
            method: method.name(),
            edge_logits: explainer.as_ref().map(|_| s.as_slice()),
            edge_weights,
            scores: s,
            selected_edges: selected.edges().iter().map(|&k| g.edges()[k]).collect(),
        };
        write(
            &dir.join(format!("graph_{i:04}.json")),
            &serde_json::to_string_pretty(&file)?,
        )?;
        if dot {
            write(
                &dir.join(format!("graph_{i:04}.dot")),
                &export_dot(g, &selected),
            )?;
        }
    }
    Ok(dir)
}

fn build_encoder_quiet(cfg: &RunConfig, ds: &Dataset) -> Result<Encoder> {
    let seed = cfg.seed()?;
    match (&cfg.encoder.path, cfg.encoder.mode) {
        (Some(p), _) => Encoder::load(p),
        (None, EncoderMode::Untrained) => Ok(Encoder::new(
            ds.meta().feature_dim,
            stage_seed(seed, Stage::Encoder),
        )),
        (None, EncoderMode::Infograph) => {
            Ok(train_infograph(ds, &cfg.encoder.infograph, stage_seed(seed, Stage::Encoder))?.0)
        }
    }
}

fn has_ground_truth(ds: &Dataset) -> bool {
    ds.graphs()
        .iter()
        .all(|g| g.gt_edge_mask().is_some_and(|m| m.iter().any(|&b| b)))
}

/// ACC curve, ACC-AUC and (with ground truth) Recall@n for one score set.
/// Every ratio reuses the same fold assignment.
pub fn score_method(
    name: &str,
    ds: &Dataset,
    scores: &[Vec<f64>],
    encoder: &Encoder,
    recall_n: usize,
    probe: &ProbeConfig,
    fold_seed: u64,
) -> Result<MethodReport> {
    let mut acc_curve = Vec::new();
    for r in ratio_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(fold_seed);
        let cv = acc_at_r(ds, scores, encoder, r, probe, &mut rng)?;
        acc_curve.push(AccPoint {
            r,
            acc: cv.mean,
            acc_std: cv.std,
        });
    }
    let auc = acc_auc(&acc_curve.iter().map(|p| p.acc).collect::<Vec<_>>())?;
    let (recall_mean, recall_std) = if has_ground_truth(ds) {
        let (m, s) = dataset_recall(ds, scores, recall_n)?;
        (Some(m), Some(s))
    } else {
        (None, None)
    };
    Ok(MethodReport {
        method: name.into(),
        acc_curve,
        acc_auc: auc,
        recall_mean,
        recall_std,
        runtime_s: 0.0,
    })
}

/// Metrics for every configured method on one dataset and encoder.
pub fn evaluate_methods(
    cfg: &RunConfig,
    ds: &Dataset,
    encoder: &Encoder,
    explainer: Option<&Explainer>,
) -> Result<MetricReport> {
    let seed = cfg.seed()?;
    let fold_seed = stage_seed(seed, Stage::Eval);
    let mut methods = Vec::new();
    let mut trained = None;
    for method in cfg.parsed_methods()? {
        let start = Instant::now();
        let ex = match (method, explainer) {
            (Method::Usib, Some(ex)) => Some(ex),
            (Method::Usib, None) => Some(&*trained.insert(build_explainer(cfg, ds, encoder)?.0)),
            _ => None,
        };
        let scores = method_scores(method, ds, encoder, ex, seed)?;
        let runtime_s = start.elapsed().as_secs_f64();
        let mut report = score_method(
            method.name(),
            ds,
            &scores,
            encoder,
            cfg.recall_n,
            &cfg.probe,
            fold_seed,
        )?;
        report.runtime_s = runtime_s;
        methods.push(report);
    }
    Ok(MetricReport {
        meta: ReportMeta {
            seed,
            dataset: ds.meta().name.clone(),
            num_graphs: ds.len(),
            encoder: encoder_id(cfg),
            beta: cfg.usib.beta,
            recall_n: cfg.recall_n,
        },
        methods,
    })
}

fn encoder_id(cfg: &RunConfig) -> String {
    match (&cfg.encoder.path, cfg.encoder.mode) {
        (Some(p), _) => p.display().to_string(),
        (None, EncoderMode::Untrained) => "untrained-gin".into(),
        (None, EncoderMode::Infograph) => "infograph-gin".into(),
    }
}

/// Writes `acc_curve.csv`, `summary.csv`, `report.json` (all reproducible)
/// and `timing.csv` (wall-clock) into `dir`.
pub fn write_report(report: &MetricReport, dir: &Path) -> Result<()> {
    write(&dir.join("acc_curve.csv"), &report.curve_csv())?;
    write(&dir.join("summary.csv"), &report.summary_csv())?;
    write(&dir.join("report.json"), &report.to_json())?;
    write(&dir.join("timing.csv"), &report.timing_csv())?;
    Ok(())
}

pub fn evaluate(cfg: &RunConfig) -> Result<(MetricReport, PathBuf)> {
    cfg.validate()?;
    let ds = load_or_generate_data(cfg)?;
    let encoder = build_encoder_quiet(cfg, &ds)?;
    let explainer = match &cfg.explainer_path {
        Some(p) => Some(Explainer::load(p)?),
        None => None,
    };
    let report = evaluate_methods(cfg, &ds, &encoder, explainer.as_ref())?;
    let dir = cfg.resolved_out_dir();
    write_report(&report, &dir)?;
    Ok((report, dir))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub acc_auc: f64,
    pub recall_mean: Option<f64>,
    pub recall_std: Option<f64>,
    /// Mean binary entropy of `sigma(w)` over all edges, before and after training.
    pub entropy_init: f64,
    pub entropy_final: f64,
    pub final_l1: f64,
    pub final_l2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub recall_n: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Row with the highest ACC-AUC; the first such row on ties.
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&SweepRow>, r| match best {
                Some(b) if b.acc_auc >= r.acc_auc => Some(b),
                _ => Some(r),
            })
    }

    /// Whether the best row is neither the first nor the last grid point.
    pub fn best_is_interior(&self) -> bool {
        self.best()
            .and_then(|b| self.rows.iter().position(|r| std::ptr::eq(r, b)))
            .is_some_and(|i| i > 0 && i + 1 < self.rows.len())
    }

    pub fn csv(&self) -> String {
        let mut out = format!(
            "beta,acc_auc,recall_at_{},recall_std,entropy_init,entropy_final,final_l1,final_l2\n",
            self.recall_n
        );
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6},{},{},{:.6},{:.6},{:.6},{:.6}",
                r.beta,
                r.acc_auc,
                opt(r.recall_mean),
                opt(r.recall_std),
                r.entropy_init,
                r.entropy_final,
                r.final_l1,
                r.final_l2
            );
        }
        out
    }
}

/// Trains and scores USIB once per beta, all other settings fixed.
pub fn sweep_betas(cfg: &RunConfig, ds: &Dataset, encoder: &Encoder) -> Result<SweepReport> {
    let seed = cfg.seed()?;
    if cfg.betas.is_empty() {
        return Err(Error::invalid("the beta grid is empty"));
    }
    let fold_seed = stage_seed(seed, Stage::Eval);
    let mut rows = Vec::with_capacity(cfg.betas.len());
    for &beta in &cfg.betas {
        let hyper = UsibHyper {
            beta,
            ..cfg.usib_hyper(seed)
        };
        let initial = Explainer::new(ds.meta().feature_dim, hyper.tau, hyper.seed)?;
        let (ex, log) = train_usib(ds, encoder, &hyper)?;
        let scores = ex.dataset_logits(ds)?;
        let m = score_method(
            "usib",
            ds,
            &scores,
            encoder,
            cfg.recall_n,
            &cfg.probe,
            fold_seed,
        )?;
        rows.push(SweepRow {
            beta,
            acc_auc: m.acc_auc,
            recall_mean: m.recall_mean,
            recall_std: m.recall_std,
            entropy_init: initial.mean_edge_entropy(ds)?,
            entropy_final: ex.mean_edge_entropy(ds)?,
            final_l1: log.epoch_l1.last().copied().unwrap_or(f64::NAN),
            final_l2: log.epoch_l2.last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok(SweepReport {
        seed,
        recall_n: cfg.recall_n,
        rows,
    })
}

pub fn sweep_beta(cfg: &RunConfig) -> Result<(SweepReport, PathBuf)> {
    cfg.validate()?;
    let ds = load_or_generate_data(cfg)?;
    let encoder = build_encoder_quiet(cfg, &ds)?;
    let report = sweep_betas(cfg, &ds, &encoder)?;
    let dir = cfg.resolved_out_dir();
    write(&dir.join("sweep_beta.csv"), &report.csv())?;
    write(
        &dir.join("sweep_beta.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    Ok((report, dir))
}

pub fn verify_theory(cfg: &RunConfig) -> Result<(TheorySuiteReport, PathBuf)> {
    let report = run_theory_suite(cfg.theory_samples, cfg.seed()?, cfg.theory_cardinalities)?;
    let path = cfg.resolved_out_dir().join("theory_report.json");
    write(&path, &report.to_json())?;
    Ok((report, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_seeds_differ_and_repeat() {
        let s: Vec<u64> = [Stage::Data, Stage::Encoder, Stage::Explainer, Stage::Eval]
            .into_iter()
            .map(|st| stage_seed(7, st))
            .collect();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_eq!(stage_seed(7, Stage::Data), s[0]);
        assert_ne!(stage_seed(8, Stage::Data), s[0]);
    }

    #[test]
    fn config_file_defaults_and_overrides() {
        let cfg = RunConfig::from_toml(
            "seed = 3\n[usib]\nbeta = 0.1\n[data.ba3]\ngraphs_per_class = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.usib.beta, 0.1);
        assert_eq!(cfg.usib.tau, 0.1);
        assert_eq!(cfg.data.ba3.graphs_per_class, 4);
        assert_eq!(cfg.data.ba3.base_nodes, 14);
        assert!(RunConfig::from_toml("seed = \"x\"").is_err());
    }

    #[test]
    fn seed_is_required() {
        assert!(RunConfig::default().validate().is_err());
        let cfg = RunConfig {
            seed: Some(1),
            ..RunConfig::default()
        };
        cfg.validate().unwrap();
    }

    #[test]
    fn missing_paths_fail_validation() {
        let cfg = RunConfig {
            seed: Some(1),
            explainer_path: Some("/nonexistent/explainer.json".into()),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn method_names_parse() {
        assert_eq!("usib".parse::<Method>().unwrap(), Method::Usib);
        assert_eq!(
            "ig".parse::<Method>().unwrap(),
            Method::Baseline(Baseline::Ig)
        );
        assert!("pgexplainer".parse::<Method>().is_err());
    }

    #[test]
    fn sweep_best_prefers_first_on_ties() {
        let row = |beta, acc_auc| SweepRow {
            beta,
            acc_auc,
            recall_mean: None,
            recall_std: None,
            entropy_init: 0.0,
            entropy_final: 0.0,
            final_l1: 0.0,
            final_l2: 0.0,
        };
        let r = SweepReport {
            seed: 0,
            recall_n: 5,
            rows: vec![row(0.1, 0.5), row(1.0, 0.9), row(10.0, 0.9)],
        };
        assert_eq!(r.best().unwrap().beta, 1.0);
        assert!(r.best_is_interior());
    }
}
