use rand::distr::Open01;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::autodiff::{sigmoid, Tape, Var};
use crate::error::{Error, Result};

/// Bernoulli means are clamped to `[L2_CLAMP, 1 - L2_CLAMP]` before taking logs.
pub const L2_CLAMP: f64 = 1e-7;

/// `n` samples of `log(eps) - log(1 - eps)` with `eps ~ U(0, 1)`.
pub fn logistic_noise<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let eps: f64 = rng.sample(Open01);
            eps.ln() - (-eps).ln_1p()
        })
        .collect()
}

/// Binary concrete relaxation `sigma((log(eps) - log(1 - eps) + w) / tau)`.
///
/// Values lie in `[0, 1]`; they are strictly inside unless the sigmoid
/// saturates in floating point.
pub fn concrete_relaxation<R: Rng + ?Sized>(
    logits: &[f64],
    tau: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::invalid(format!(
            "temperature must be positive, got {tau}"
        )));
    }
    let noise = logistic_noise(logits.len(), rng);
    Ok(logits
        .iter()
        .zip(noise)
        .map(|(w, e)| sigmoid((w + e) / tau))
        .collect())
}

/// A uniformly random permutation of `0..k` with no fixed point.
pub fn random_derangement<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid("a derangement needs at least two elements"));
    }
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        perm.shuffle(rng);
        if perm.iter().enumerate().all(|(i, &p)| i != p) {
            return Ok(perm);
        }
    }
}

/// Jensen–Shannon bound `mean(-sp(-pos)) - mean(sp(neg))` on `[K x 1]` scores.
pub fn loss_l1(tape: &mut Tape, pos: Var, neg: Var) -> Result<Var> {
    let k = tape.value(pos).numel();
    if k < 2 || tape.value(neg).numel() != k {
        return Err(Error::invalid(format!(
            "L1 needs K >= 2 positive and as many negative scores, got {k} and {}",
            tape.value(neg).numel()
        )));
    }
    let minus_pos = tape.neg(pos)?;
    let sp_pos = tape.softplus(minus_pos)?;
    let pos_term = tape.mean(sp_pos)?;
    let sp_neg = tape.softplus(neg)?;
    let neg_term = tape.mean(sp_neg)?;
    let total = tape.add(pos_term, neg_term)?;
    tape.neg(total)
}

/// `-(1/K) sum_e [e ln mu + (1 - e) ln(1 - mu)]` with `mu = sigma(w)` clamped.
pub fn loss_l2(tape: &mut Tape, logits: Var, relaxed: Var, num_graphs: usize) -> Result<Var> {
    if num_graphs == 0 {
        return Err(Error::invalid("L2 needs at least one graph"));
    }
    let mu = tape.sigmoid(logits)?;
    let mu = tape.clamp(mu, L2_CLAMP, 1.0 - L2_CLAMP)?;
    let ln_mu = tape.ln(mu)?;
    let neg_mu = tape.neg(mu)?;
    let one_minus_mu = tape.add_scalar(neg_mu, 1.0)?;
    let ln_one_minus = tape.ln(one_minus_mu)?;
    let keep = tape.mul(relaxed, ln_mu)?;
    let neg_e = tape.neg(relaxed)?;
    let one_minus_e = tape.add_scalar(neg_e, 1.0)?;
    let drop = tape.mul(one_minus_e, ln_one_minus)?;
    let both = tape.add(keep, drop)?;
    let total = tape.sum(both)?;
    tape.mul_scalar(total, -1.0 / num_graphs as f64)
}
