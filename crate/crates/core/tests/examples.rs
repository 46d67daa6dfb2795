#[path = "../examples/autodiff_gradcheck.rs"]
#[allow(dead_code)]
mod autodiff_gradcheck;
#[path = "../examples/beta_sweep.rs"]
#[allow(dead_code)]
mod beta_sweep;
#[path = "../examples/evaluate_metrics.rs"]
#[allow(dead_code)]
mod evaluate_metrics;
#[path = "../examples/explain_usib.rs"]
#[allow(dead_code)]
mod explain_usib;
#[path = "../examples/generate_ba3.rs"]
#[allow(dead_code)]
mod generate_ba3;
#[path = "../examples/train_encoder.rs"]
#[allow(dead_code)]
mod train_encoder;
#[path = "../examples/verify_theory.rs"]
#[allow(dead_code)]
mod verify_theory;

#[test]
fn autodiff_example_gradient_is_accurate() {
    assert!(autodiff_gradcheck::run_example().unwrap() < 1e-6);
}

#[test]
fn baselines_example_covers_every_method() {
    let r = baselines::run_example().unwrap();
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|(_, v)| (0.0..=1.0).contains(v)));
}

#[test]
fn beta_sweep_example_has_one_row_per_beta() {
    let r = beta_sweep::run_example().unwrap();
    assert_eq!(r.rows.len(), 3);
    assert!(r.best().is_some());
}

#[test]
fn evaluate_example_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = evaluate_metrics::run_example(dir.path()).unwrap();
    assert_eq!(report.methods.len(), 5);
    for f in ["acc_curve.csv", "summary.csv", "report.json", "timing.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn explain_example_selects_five_edges() {
    assert_eq!(explain_usib::run_example().unwrap().len(), 5);
}

#[test]
fn generate_example_renders_dot() {
    let dot = generate_ba3::run_example().unwrap();
    assert!(dot.starts_with("graph"));
    assert!(dot.contains("color=red"));
}

#[test]
fn train_encoder_example_is_finite() {
    let (loss, acc) = train_encoder::run_example().unwrap();
    assert!(loss.is_finite());
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn theory_example_passes() {
    assert!(verify_theory::run_example().unwrap());
}
