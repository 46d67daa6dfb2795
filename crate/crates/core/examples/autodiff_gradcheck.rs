//! Differentiate a small two-layer network with the tape and compare the
//! gradient against central finite differences.

use usib::autodiff::check::{finite_difference, max_relative_error};
use usib::autodiff::{Tape, Tensor};

fn forward(
    tape: &mut Tape,
    x: &Tensor,
    w1: &Tensor,
    w2: &Tensor,
    grad: bool,
) -> usib::Result<(usib::autodiff::Var, [usib::autodiff::Var; 2])> {
    let xv = tape.constant(x.clone());
    let a = tape.leaf(w1.clone(), grad);
    let b = tape.leaf(w2.clone(), grad);
    let h = tape.matmul(xv, a)?;
    let h = tape.tanh(h)?;
    let y = tape.matmul(h, b)?;
    let y = tape.softplus(y)?;
    Ok((tape.mean(y)?, [a, b]))
}

pub fn run_example() -> usib::Result<f64> {
    let x = Tensor::matrix(3, 2, vec![0.5, -1.0, 1.5, 0.2, -0.3, 0.8])?;
    let w1 = Tensor::matrix(2, 4, vec![0.1, -0.4, 0.3, 0.9, -0.7, 0.2, 0.5, -0.1])?;
    let w2 = Tensor::matrix(4, 1, vec![0.6, -0.2, 0.4, 1.1])?;

    let mut tape = Tape::new();
    let (loss, [a, b]) = forward(&mut tape, &x, &w1, &w2, true)?;
    let grads = tape.backward(loss)?;

    let numeric = finite_difference(&[w1.clone(), w2.clone()], 1e-5, |p| {
        let mut t = Tape::new();
        let (l, _) = forward(&mut t, &x, &p[0], &p[1], false)?;
        t.value(l).item()
    })?;
    let err = max_relative_error(&grads.wrt(a), &numeric[0], 1e-8).max(max_relative_error(
        &grads.wrt(b),
        &numeric[1],
        1e-8,
    ));
    println!("max relative gradient error {err:.2e}");
    Ok(err)
}

fn main() -> usib::Result<()> {
    run_example()?;
    Ok(())
}
