use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multinomial logistic regression trained by full-batch gradient descent.
///
/// Inputs are standardised with the training set's per-feature mean and
/// standard deviation before fitting, so one learning rate works for raw
/// sum-pooled representations of any scale.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticProbe {
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// `[dim x classes]`, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
    classes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub lr: f64,
    pub iterations: usize,
    pub l2: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            lr: 0.1,
            iterations: 500,
            l2: 1e-4,
        }
    }
}

fn softmax_in_place(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        total += *l;
    }
    for l in logits.iter_mut() {
        *l /= total;
    }
}

impl LogisticProbe {
    pub fn fit(x: &[Vec<f64>], y: &[usize], classes: usize, config: &ProbeConfig) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::invalid(format!(
                "probe needs matching non-empty inputs, got {} rows and {} labels",
                x.len(),
                y.len()
            )));
        }
        let dim = x[0].len();
        if x.iter().any(|r| r.len() != dim) {
            return Err(Error::shape(
                "LogisticProbe::fit",
                "rows have different lengths",
            ));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= classes) {
            return Err(Error::invalid(format!(
                "label {bad} out of range for {classes} classes"
            )));
        }
        let n = x.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; dim];
        for row in x {
            for ((s, v), m) in scale.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        let xs: Vec<Vec<f64>> = x
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&mean)
                    .zip(&scale)
                    .map(|((v, m), s)| (v - m) / s)
                    .collect()
            })
            .collect();

        let mut w = vec![0.0; dim * classes];
        let mut b = vec![0.0; classes];
        let mut gw = vec![0.0; dim * classes];
        let mut gb = vec![0.0; classes];
        let mut p = vec![0.0; classes];
        for _ in 0..config.iterations {
            gw.fill(0.0);
            gb.fill(0.0);
            for (row, &label) in xs.iter().zip(y) {
                p.copy_from_slice(&b);
                for (f, &v) in row.iter().enumerate() {
                    if v != 0.0 {
                        for (pc, wc) in p.iter_mut().zip(&w[f * classes..(f + 1) * classes]) {
                            *pc += v * wc;
                        }
                    }
                }
                softmax_in_place(&mut p);
                p[label] -= 1.0;
                for (f, &v) in row.iter().enumerate() {
                    if v != 0.0 {
                        for (g, pc) in gw[f * classes..(f + 1) * classes].iter_mut().zip(&p) {
                            *g += v * pc;
                        }
                    }
                }
                for (g, pc) in gb.iter_mut().zip(&p) {
                    *g += pc;
                }
            }
            for (wv, g) in w.iter_mut().zip(&gw) {
                *wv -= config.lr * (g / n + config.l2 * *wv);
            }
            for (bv, g) in b.iter_mut().zip(&gb) {
                *bv -= config.lr * g / n;
            }
        }
        Ok(LogisticProbe {
            mean,
            scale,
            weights: w,
            bias: b,
            classes,
        })
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let mut logits = self.bias.clone();
        for (f, ((v, m), s)) in row.iter().zip(&self.mean).zip(&self.scale).enumerate() {
            let z = (v - m) / s;
            for (l, wc) in logits
                .iter_mut()
                .zip(&self.weights[f * self.classes..(f + 1) * self.classes])
            {
                *l += z * wc;
            }
        }
        // first maximum wins ties
        let mut best = 0;
        for (c, &l) in logits.iter().enumerate() {
            if l > logits[best] {
                best = c;
            }
        }
        best
    }

    pub fn accuracy(&self, x: &[Vec<f64>], y: &[usize]) -> f64 {
        let hits = x
            .iter()
            .zip(y)
            .filter(|(row, &label)| self.predict(row) == label)
            .count();
        hits as f64 / x.len().max(1) as f64
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}

/// Assigns each sample to one of `folds` folds, spreading every class evenly.
pub fn stratified_folds<R: Rng + ?Sized>(
    labels: &[usize],
    folds: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    if labels.len() < folds {
        return Err(Error::invalid(format!(
            "{} samples cannot fill {folds} folds",
            labels.len()
        )));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    if by_class.iter().filter(|v| !v.is_empty()).count() < 2 {
        return Err(Error::invalid(
            "cross-validation needs at least two classes present",
        ));
    }
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(rng);
        for &i in members.iter() {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub mean: f64,
    pub std: f64,
    pub fold_accuracies: Vec<f64>,
}

/// Stratified k-fold accuracy of a freshly trained probe per fold.
pub fn train_logistic_cv<R: Rng + ?Sized>(
    reps: &[Vec<f64>],
    labels: &[usize],
    folds: usize,
    config: &ProbeConfig,
    rng: &mut R,
) -> Result<CvResult> {
    if reps.len() != labels.len() {
        return Err(Error::invalid(
            "representations and labels differ in length",
        ));
    }
    let assignment = stratified_folds(labels, folds, rng)?;
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut accs = Vec::with_capacity(folds);
    for f in 0..folds {
        let (mut xtr, mut ytr, mut xte, mut yte) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (i, &a) in assignment.iter().enumerate() {
            if a == f {
                xte.push(reps[i].clone());
                yte.push(labels[i]);
            } else {
                xtr.push(reps[i].clone());
                ytr.push(labels[i]);
            }
        }
        let probe = LogisticProbe::fit(&xtr, &ytr, classes, config)?;
        accs.push(probe.accuracy(&xte, &yte));
    }
    let mean = accs.iter().sum::<f64>() / folds as f64;
    let var = accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / folds as f64;
    Ok(CvResult {
        mean,
        std: var.sqrt(),
        fold_accuracies: accs,
    })
}
