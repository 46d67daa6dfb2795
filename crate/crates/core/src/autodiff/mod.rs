//! Dense `f64` tensors, a define-by-run reverse-mode tape and Adam.

mod adam;
pub mod check;
mod tape;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use tape::{sigmoid, softplus, Gradients, Tape, Var};
pub use tensor::Tensor;

#[cfg(test)]
mod tests {
    use std::rc::Rc;

    use super::*;

    #[test]
    fn softplus_and_sigmoid_at_zero() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(0.0), true);
        let sp = tape.softplus(x).unwrap();
        let sg = tape.sigmoid(x).unwrap();
        assert!((tape.value(sp).item().unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(tape.value(sg).item().unwrap(), 0.5);
        let grads = tape.backward(sp).unwrap();
        assert!((grads.wrt(x).item().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn softplus_is_stable_for_large_inputs() {
        assert!((softplus(50.0) - 50.0).abs() < 1e-9);
        assert!(softplus(-800.0) >= 0.0);
        assert!(softplus(800.0).is_finite());
    }

    #[test]
    fn square_gradient() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(3.0), true);
        let y = tape.mul(x, x).unwrap();
        let g = tape.backward(y).unwrap();
        assert_eq!(g.wrt(x).item().unwrap(), 6.0);
    }

    #[test]
    fn segment_sum_by_definition() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::new(vec![3], vec![1.0, 2.0, 3.0]).unwrap(), false);
        let s = tape.segment_sum(x, Rc::from(vec![0, 0, 1]), 2).unwrap();
        assert_eq!(tape.value(s).data(), &[3.0, 3.0]);
    }

    #[test]
    fn shape_errors_are_reported() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(&[2, 3]));
        let b = tape.constant(Tensor::zeros(&[2, 3]));
        let c = tape.constant(Tensor::zeros(&[3, 2]));
        assert!(tape.matmul(a, b).is_err());
        assert!(tape.add(a, c).is_err());
        assert!(tape.matmul(a, c).is_ok());
    }

    #[test]
    fn ln_rejects_non_positive() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::column(vec![1.0, 0.0]));
        assert!(matches!(tape.ln(x), Err(crate::Error::Domain { .. })));
    }

    #[test]
    fn non_finite_forward_is_an_error() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::scalar(1000.0));
        assert!(matches!(tape.exp(x), Err(crate::Error::NonFinite { .. })));
    }

    #[test]
    fn backward_needs_scalar_loss() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::zeros(&[2]), true);
        let y = tape.relu(x).unwrap();
        assert!(tape.backward(y).is_err());
    }

    #[test]
    fn scalar_broadcast_gradients_reduce() {
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::column(vec![1.0, 2.0, 3.0]), true);
        let s = tape.leaf(Tensor::scalar(2.0), true);
        let p = tape.mul(a, s).unwrap();
        let total = tape.sum(p).unwrap();
        let g = tape.backward(total).unwrap();
        assert_eq!(g.wrt(s).item().unwrap(), 6.0);
        assert_eq!(g.wrt(a).data(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn unused_leaf_gets_zero_gradient() {
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::zeros(&[2, 2]), true);
        let b = tape.leaf(Tensor::scalar(1.0), true);
        let y = tape.mul_scalar(b, 4.0).unwrap();
        let g = tape.backward(y).unwrap();
        assert_eq!(g.wrt(a), Tensor::zeros(&[2, 2]));
        assert!(g.get(a).is_none());
    }
}
