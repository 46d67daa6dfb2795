use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::Graph;
use crate::synthetic::{generate_ba3_dataset, Ba3Config};

fn small_dataset(n: usize) -> Dataset {
    generate_ba3_dataset(&Ba3Config {
        graphs_per_class: n,
        seed: 3,
        ..Ba3Config::default()
    })
    .unwrap()
}

#[test]
fn relaxation_rejects_bad_temperature() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(concrete_relaxation(&[0.0], 0.0, &mut rng).is_err());
    assert!(concrete_relaxation(&[0.0], -1.0, &mut rng).is_err());
    assert!(Explainer::new(8, 0.0, 0).is_err());
}

#[test]
fn derangement_has_no_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 2..12 {
        let p = random_derangement(k, &mut rng).unwrap();
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..k).collect::<Vec<_>>());
        assert!(p.iter().enumerate().all(|(i, &j)| i != j));
    }
    assert!(random_derangement(1, &mut rng).is_err());
}

#[test]
fn l1_needs_two_graphs() {
    let mut tape = Tape::new();
    let pos = tape.constant(Tensor::column(vec![1.0]));
    let neg = tape.constant(Tensor::column(vec![0.0]));
    assert!(loss_l1(&mut tape, pos, neg).is_err());
}

#[test]
fn l1_at_zero_scores() {
    let mut tape = Tape::new();
    let pos = tape.constant(Tensor::column(vec![0.0; 4]));
    let neg = tape.constant(Tensor::column(vec![0.0; 4]));
    let l1 = loss_l1(&mut tape, pos, neg).unwrap();
    assert!((tape.value(l1).item().unwrap() + 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
}

#[test]
fn l2_stays_finite_at_extreme_logits() {
    let mut tape = Tape::new();
    let w = tape.constant(Tensor::column(vec![-200.0, 200.0, 0.0]));
    let e = tape.constant(Tensor::column(vec![1.0, 0.0, 0.5]));
    let l2 = loss_l2(&mut tape, w, e, 1).unwrap();
    let v = tape.value(l2).item().unwrap();
    let expected = -2.0 * L2_CLAMP.ln() + std::f64::consts::LN_2;
    assert!((v - expected).abs() < 1e-6, "{v} vs {expected}");
}

#[test]
fn zero_critic_scores_zero() {
    let mut ex = Explainer::new(8, 0.1, 0).unwrap();
    ex.params_mut().zero_all();
    let g = small_dataset(1).graphs()[0].clone();
    let g = g.with_edge_weights(vec![0.0; g.num_edges()]).unwrap();
    assert_eq!(
        ex.critic_score(&g, &[0.0; REPRESENTATION_DIM]).unwrap(),
        0.0
    );
}

#[test]
fn explanation_counts_and_bounds() {
    let ds = small_dataset(2);
    let ex = Explainer::new(8, 0.1, 5).unwrap();
    for g in ds.graphs() {
        let r = ex.explain(g, Selection::Count(5)).unwrap();
        assert_eq!(r.selected.len(), 5);
        assert_eq!(r.edge_weights.len(), g.num_edges());
        assert!(r.edge_weights.iter().all(|w| (0.0..=1.0).contains(w)));
        let r = ex.explain(g, Selection::Ratio(0.3)).unwrap();
        assert_eq!(
            r.selected.len(),
            selection_count(0.3, g.num_edges()).unwrap()
        );
        assert!(ex.explain(g, Selection::Count(0)).is_err());
    }
}

#[test]
fn explainer_rejects_wrong_feature_dim() {
    let ex = Explainer::new(4, 0.1, 0).unwrap();
    let g = small_dataset(1).graphs()[0].clone();
    assert!(matches!(ex.edge_logits(&g), Err(Error::Shape { .. })));
}

#[test]
fn edgeless_graph_has_no_logits() {
    let ex = Explainer::new(1, 0.1, 0).unwrap();
    let g = Graph::new(2, vec![vec![1.0]; 2], vec![], None, None).unwrap();
    assert!(ex.edge_logits(&g).unwrap().is_empty());
    let r = ex.explain(&g, Selection::Count(5)).unwrap();
    assert!(r.selected.is_empty() && r.edge_weights.is_empty());
}

#[test]
fn checkpoint_round_trip() {
    let ex = Explainer::new(8, 0.25, 9).unwrap();
    let back =
        Explainer::from_checkpoint(&Checkpoint::from_json(&ex.checkpoint().to_json()).unwrap())
            .unwrap();
    assert_eq!(back.params().flatten(), ex.params().flatten());
    assert_eq!(back.tau(), 0.25);
}

#[test]
fn training_is_deterministic_and_finite() {
    let ds = small_dataset(4);
    let enc = Encoder::new(8, 0);
    let hyper = UsibHyper {
        epochs: 2,
        batch_size: 5,
        ..UsibHyper::default()
    };
    let (a, log_a) = train_usib(&ds, &enc, &hyper).unwrap();
    let (b, log_b) = train_usib(&ds, &enc, &hyper).unwrap();
    assert_eq!(a.params().flatten(), b.params().flatten());
    assert_eq!(log_a, log_b);
    assert_eq!(log_a.epoch_loss.len(), 2);
    assert!(log_a.epoch_loss.iter().all(|v| v.is_finite()));
}

#[test]
fn batches_merge_singleton_tail() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let b = fixed_batches(9, 4, &mut rng);
    assert_eq!(b.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 5]);
}
