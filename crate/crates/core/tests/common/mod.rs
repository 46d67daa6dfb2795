#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::rc::Rc;

use usib::autodiff::check::{finite_difference, max_relative_error};
use usib::autodiff::{sigmoid, Tape, Tensor, Var};
use usib::encoder::Encoder;
use usib::explainer::{logistic_noise, random_derangement, Explainer};
use usib::graph::{Dataset, GraphBatch};
use usib::synthetic::{generate_ba3_dataset, Ba3Config};
use usib::Result;

pub const H: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;
pub const FLOOR: f64 = 1e-6;

/// Compares the tape gradient of `sum(c * f(x..))` with central differences.
/// The fixed weights `c` keep the upstream gradient from being all ones.
pub fn check<F>(inputs: &[Tensor], f: F) -> f64
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let scalarise = |tape: &mut Tape, out: Var| -> Result<Var> {
        let n = tape.value(out).numel();
        let shape = tape.value(out).shape().to_vec();
        let c: Vec<f64> = (0..n)
            .map(|i| 0.3 + 0.7 * ((i * 7 + 3) % 5) as f64 / 4.0)
            .collect();
        let cv = tape.constant(Tensor::new(shape, c)?);
        let weighted = tape.mul(out, cv)?;
        tape.sum(weighted)
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone(), true)).collect();
    let out = f(&mut tape, &vars).unwrap();
    let loss = scalarise(&mut tape, out).unwrap();
    let grads = tape.backward(loss).unwrap();

    let numeric = finite_difference(inputs, H, |xs| {
        let mut t = Tape::new();
        let v: Vec<Var> = xs.iter().map(|x| t.leaf(x.clone(), false)).collect();
        let o = f(&mut t, &v)?;
        let l = scalarise(&mut t, o)?;
        t.value(l).item()
    })
    .unwrap();
    vars.iter()
        .zip(&numeric)
        .map(|(&v, n)| max_relative_error(&grads.wrt(v), n, FLOOR))
        .fold(0.0, f64::max)
}

/// Gradient check of every tape op on fixed pseudo-random inputs, as
/// `(op, worst relative error)`.
pub fn op_gradient_errors(seed: u64) -> Vec<(&'static str, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = |r: usize, c: usize, lo: f64, hi: f64| {
        Tensor::matrix(r, c, (0..r * c).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
    };
    // keep relu and clamp inputs off their kinks
    let off_kinks = |t: Tensor| t.map(|x| if x.abs() < 0.05 { x + 0.2 } else { x });
    let a = m(3, 4, -2.0, 2.0);
    let b = m(4, 2, -2.0, 2.0);
    let c = m(3, 4, -2.0, 2.0);
    let pos = m(3, 4, 0.1, 4.0);
    let kinked = off_kinks(m(3, 4, -2.0, 2.0));
    let clamped = m(3, 4, -2.0, 2.0).map(|x| {
        if (x - 0.5).abs() < 0.05 || (x + 0.5).abs() < 0.05 {
            x + 0.2
        } else {
            x
        }
    });
    let s = Tensor::scalar(0.7);
    let seg: Rc<[usize]> = Rc::from(vec![1, 0, 1]);
    let rows: Rc<[usize]> = Rc::from(vec![2, 0, 2, 1]);
    vec![
        (
            "matmul",
            check(&[a.clone(), b.clone()], |t, v| t.matmul(v[0], v[1])),
        ),
        (
            "add",
            check(&[a.clone(), c.clone()], |t, v| t.add(v[0], v[1])),
        ),
        (
            "sub",
            check(&[a.clone(), c.clone()], |t, v| t.sub(v[0], v[1])),
        ),
        (
            "mul",
            check(&[a.clone(), c.clone()], |t, v| t.mul(v[0], v[1])),
        ),
        (
            "mul_broadcast",
            check(&[a.clone(), s.clone()], |t, v| t.mul(v[0], v[1])),
        ),
        (
            "add_scalar",
            check(std::slice::from_ref(&a), |t, v| t.add_scalar(v[0], 1.3)),
        ),
        (
            "mul_scalar",
            check(std::slice::from_ref(&a), |t, v| t.mul_scalar(v[0], -0.6)),
        ),
        ("neg", check(std::slice::from_ref(&a), |t, v| t.neg(v[0]))),
        (
            "sigmoid",
            check(std::slice::from_ref(&a), |t, v| t.sigmoid(v[0])),
        ),
        (
            "softplus",
            check(std::slice::from_ref(&a), |t, v| t.softplus(v[0])),
        ),
        ("relu", check(&[kinked], |t, v| t.relu(v[0]))),
        ("tanh", check(std::slice::from_ref(&a), |t, v| t.tanh(v[0]))),
        ("ln", check(&[pos], |t, v| t.ln(v[0]))),
        ("exp", check(std::slice::from_ref(&a), |t, v| t.exp(v[0]))),
        ("clamp", check(&[clamped], |t, v| t.clamp(v[0], -0.5, 0.5))),
        (
            "concat",
            check(&[a.clone(), c.clone()], |t, v| t.concat(&[v[0], v[1]])),
        ),
        ("sum", check(std::slice::from_ref(&a), |t, v| t.sum(v[0]))),
        ("mean", check(std::slice::from_ref(&a), |t, v| t.mean(v[0]))),
        (
            "segment_sum",
            check(std::slice::from_ref(&a), |t, v| {
                t.segment_sum(v[0], seg.clone(), 2)
            }),
        ),
        (
            "gather",
            check(std::slice::from_ref(&a), |t, v| {
                t.gather(v[0], rows.clone())
            }),
        ),
        (
            "transpose",
            check(&[a.clone(), c], |t, v| {
                let at = t.transpose(v[0])?;
                t.matmul(at, v[1])
            }),
        ),
        ("reshape", check(&[a], |t, v| t.reshape(v[0], &[2, 6]))),
    ]
}

pub fn small_ba3(graphs_per_class: usize, seed: u64) -> Dataset {
    generate_ba3_dataset(&Ba3Config {
        graphs_per_class,
        seed,
        ..Ba3Config::default()
    })
    .unwrap()
}

/// Fraction of `draws` relaxed samples above 1/2 for logit `w`.
pub fn relaxation_above_half(w: f64, tau: f64, draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = logistic_noise(draws, &mut rng);
    noise
        .iter()
        .filter(|e| sigmoid((w + *e) / tau) > 0.5)
        .count() as f64
        / draws as f64
}

/// Worst relative error between the tape gradient of the full USIB loss on a
/// two-graph batch and central differences, over every generator and critic
/// parameter tensor. Noise and negative pairing are held fixed. Parameters
/// are perturbed away from initialisation so the critic head is not zero.
pub fn usib_end_to_end_gradcheck(seed: u64, entries_per_tensor: usize) -> f64 {
    let ds = small_ba3(1, seed);
    let graphs = &ds.graphs()[..2];
    let encoder = Encoder::new(ds.meta().feature_dim, seed);
    let z = encoder.encode_graphs(graphs, None).unwrap();
    let z = Tensor::from_rows(&z).unwrap();
    let batch = GraphBatch::new(graphs).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ex = Explainer::new(ds.meta().feature_dim, 0.5, seed).unwrap();
    let flat: Vec<f64> = ex
        .params()
        .flatten()
        .iter()
        .map(|v| v + 0.05 * rng.random_range(-1.0..1.0))
        .collect();
    ex.params_mut().load_flat(&flat).unwrap();
    let noise = logistic_noise(batch.num_edges(), &mut rng);
    let negatives = random_derangement(2, &mut rng).unwrap();
    let beta = 0.7;

    let loss_at = |ex: &Explainer| -> f64 {
        let mut tape = Tape::new();
        let p = ex.bind(&mut tape, false);
        let vars = ex
            .objective(&mut tape, &p, &batch, &z, &noise, &negatives, beta)
            .unwrap();
        tape.value(vars.loss).item().unwrap()
    };

    let mut tape = Tape::new();
    let p = ex.bind(&mut tape, true);
    let vars = ex
        .objective(&mut tape, &p, &batch, &z, &noise, &negatives, beta)
        .unwrap();
    let grads = ex
        .params()
        .collect_grads(&p, &tape.backward(vars.loss).unwrap());

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut probe = ex.clone();
    for (t, g) in grads.iter().enumerate() {
        let n = g.numel();
        let picks: Vec<usize> = if n <= entries_per_tensor {
            (0..n).collect()
        } else {
            (0..entries_per_tensor)
                .map(|_| rng.random_range(0..n))
                .collect()
        };
        for i in picks {
            let orig = probe.params().tensors()[t].data()[i];
            probe.params_mut().tensors_mut()[t].data_mut()[i] = orig + h;
            let plus = loss_at(&probe);
            probe.params_mut().tensors_mut()[t].data_mut()[i] = orig - h;
            let minus = loss_at(&probe);
            probe.params_mut().tensors_mut()[t].data_mut()[i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let analytic = g.data()[i];
            let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(err);
        }
    }
    worst
}
