mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use usib::autodiff::{sigmoid, Tape, Tensor};
use usib::encoder::Encoder;
use usib::explainer::{
    concrete_relaxation, loss_l1, loss_l2, train_usib, Explainer, Selection, UsibHyper,
};

#[test]
fn relaxation_matches_bernoulli_limit() {
    for (i, w) in [-2.0, 0.0, 2.0].into_iter().enumerate() {
        let p = common::relaxation_above_half(w, 0.05, 100_000, 40 + i as u64);
        assert!(
            (p - sigmoid(w)).abs() < 0.01,
            "w = {w}: {p} vs {}",
            sigmoid(w)
        );
    }
}

#[test]
fn relaxed_values_stay_in_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let logits: Vec<f64> = (-20..=20).map(|k| k as f64).collect();
    for tau in [0.01, 0.1, 1.0, 10.0] {
        let e = concrete_relaxation(&logits, tau, &mut rng).unwrap();
        assert!(e.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn l2_expectation_is_bernoulli_entropy() {
    let mu = sigmoid(1.0);
    let entropy = -(mu * mu.ln() + (1.0 - mu) * (1.0 - mu).ln());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 50_000;
    let relaxed = concrete_relaxation(&vec![1.0; n], 0.1, &mut rng).unwrap();
    let mut tape = Tape::new();
    let w = tape.constant(Tensor::column(vec![1.0; n]));
    let e = tape.constant(Tensor::column(relaxed));
    let l2 = loss_l2(&mut tape, w, e, n).unwrap();
    let v = tape.value(l2).item().unwrap();
    assert!((v - entropy).abs() < 0.01, "{v} vs {entropy}");
}

#[test]
fn l1_grows_with_separation() {
    let value = |pos: f64, neg: f64| {
        let mut tape = Tape::new();
        let p = tape.constant(Tensor::column(vec![pos; 3]));
        let n = tape.constant(Tensor::column(vec![neg; 3]));
        let l = loss_l1(&mut tape, p, n).unwrap();
        tape.value(l).item().unwrap()
    };
    assert!(value(2.0, -2.0) > value(0.0, 0.0));
    assert!(value(10.0, -10.0) < 0.0);
    assert!(value(10.0, -10.0) > -1e-3);
}

#[test]
fn end_to_end_gradient_matches_finite_differences() {
    let err = common::usib_end_to_end_gradcheck(2, 40);
    assert!(err < 1e-3, "relative error {err}");
}

#[test]
fn trained_explainer_round_trips_through_checkpoint() {
    let ds = common::small_ba3(4, 6);
    let encoder = Encoder::new(ds.meta().feature_dim, 6);
    let hyper = UsibHyper {
        epochs: 2,
        batch_size: 4,
        seed: 6,
        ..UsibHyper::default()
    };
    let (ex, log) = train_usib(&ds, &encoder, &hyper).unwrap();
    assert_eq!(log.epoch_loss.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("explainer.json");
    ex.save(&path).unwrap();
    let back = Explainer::load(&path).unwrap();
    for g in ds.graphs() {
        assert_eq!(
            ex.explain(g, Selection::Ratio(0.3)).unwrap(),
            back.explain(g, Selection::Ratio(0.3)).unwrap()
        );
    }
}

#[test]
fn strong_bottleneck_sharpens_masks() {
    let ds = common::small_ba3(4, 9);
    let encoder = Encoder::new(ds.meta().feature_dim, 9);
    let hyper = UsibHyper {
        beta: 100.0,
        epochs: 5,
        batch_size: 6,
        seed: 9,
        ..UsibHyper::default()
    };
    let before = Explainer::new(ds.meta().feature_dim, hyper.tau, hyper.seed).unwrap();
    let (after, _) = train_usib(&ds, &encoder, &hyper).unwrap();
    assert!(after.mean_edge_entropy(&ds).unwrap() < before.mean_edge_entropy(&ds).unwrap());
}
