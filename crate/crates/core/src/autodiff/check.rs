//! Central finite differences, used to validate analytic gradients.
//!
//! Only forward evaluations of the closure are used here, so the check stays
//! independent of the reverse sweep it is compared against.

use super::tensor::Tensor;
use crate::error::Result;

/// Numerical gradient of a scalar function of several tensors.
pub fn finite_difference<F>(inputs: &[Tensor], h: f64, mut f: F) -> Result<Vec<Tensor>>
where
    F: FnMut(&[Tensor]) -> Result<f64>,
{
    let mut work = inputs.to_vec();
    let mut out = Vec::with_capacity(inputs.len());
    for t in 0..inputs.len() {
        let mut grad = Tensor::zeros(inputs[t].shape());
        for i in 0..inputs[t].numel() {
            let orig = work[t].data()[i];
            work[t].data_mut()[i] = orig + h;
            let plus = f(&work)?;
            work[t].data_mut()[i] = orig - h;
            let minus = f(&work)?;
            work[t].data_mut()[i] = orig;
            grad.data_mut()[i] = (plus - minus) / (2.0 * h);
        }
        out.push(grad);
    }
    Ok(out)
}

/// Elementwise relative error `|a - n| / max(|a|, |n|, floor)`; returns the max.
pub fn max_relative_error(analytic: &Tensor, numeric: &Tensor, floor: f64) -> f64 {
    analytic
        .data()
        .iter()
        .zip(numeric.data())
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}
