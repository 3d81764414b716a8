// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{AttackError, LinkFeatures, Result, FEATURE_DIM};
use crate::scalar::Real;

/// Anything that scores a candidate link; higher means more likely real.
pub trait LinkScorer<T: Real> {
    fn score(&self, x: &LinkFeatures<T>) -> T;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<T> {
    pub learning_rate: T,
    pub epochs: usize,
    pub l2: T,
}

impl<T: Real> Default for TrainConfig<T> {
    fn default() -> Self {
        TrainConfig {
            learning_rate: T::lit(0.1),
            epochs: 200,
            l2: T::lit(1e-4),
        }
    }
}

/// Logistic regression over standardised link features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkClassifier<T> {
    pub weights: Vec<T>,
    pub bias: T,
    /// Per-feature mean and standard deviation of the training set.
    pub mean: Vec<T>,
    pub scale: Vec<T>,
    pub epochs: usize,
    pub learning_rate: T,
    pub final_loss: T,
}

fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus<T: Real>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot<T: Real>(w: &[T], x: &[T]) -> T {
    w.iter().zip(x).map(|(&a, &b)| a * b).sum()
}

/// Mean cross-entropy plus `l2/2 · |w|²` (bias unpenalised), and its
/// gradient with respect to `(w, b)`.
pub fn loss_and_gradient<T: Real>(
    w: &[T],
    b: T,
    xs: &[Vec<T>],
    ys: &[bool],
    l2: T,
) -> (T, Vec<T>, T) {
    let n = T::from_count(xs.len());
    let mut loss = T::zero();
    let mut gw = vec![T::zero(); w.len()];
    let mut gb = T::zero();
    for (x, &y) in xs.iter().zip(ys) {
        let z = dot(w, x) + b;
        let yf = if y { T::one() } else { T::zero() };
        loss = loss + softplus(z) - yf * z;
        let r = sigmoid(z) - yf;
        for (g, &xi) in gw.iter_mut().zip(x) {
            *g = *g + r * xi;
        }
        gb = gb + r;
    }
    let half = T::lit(0.5);
    loss = loss / n + half * l2 * dot(w, w);
    for (g, &wi) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wi;
    }
    (loss, gw, gb / n)
}

/// Per-feature mean and standard deviation; constant features get scale 1.
pub fn standardisation<T: Real>(xs: &[LinkFeatures<T>]) -> (Vec<T>, Vec<T>) {
    let n = T::from_count(xs.len());
    let mut mean = vec![T::zero(); FEATURE_DIM];
    for x in xs {
        for (m, &v) in mean.iter_mut().zip(x.0.iter()) {
            *m = *m + v;
        }
    }
    mean.iter_mut().for_each(|m| *m = *m / n);
    let mut var = vec![T::zero(); FEATURE_DIM];
    for x in xs {
        for ((s, &v), &m) in var.iter_mut().zip(x.0.iter()).zip(&mean) {
            *s = *s + (v - m) * (v - m);
        }
    }
    let tiny = T::lit(1e-12);
    let scale = var
        .into_iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd > tiny {
                sd
            } else {
                T::one()
            }
        })
        .collect();
    (mean, scale)
}

impl<T: Real> LinkClassifier<T> {
    /// Full-batch gradient descent from zero-initialised parameters.
    pub fn train(
        data: &[(LinkFeatures<T>, bool)],
        cfg: &TrainConfig<T>,
    ) -> Result<LinkClassifier<T>> {
        if data.len() < 2 {
            return Err(AttackError::Training("need at least two examples".into()));
        }
        let positives = data.iter().filter(|(_, y)| *y).count();
        if positives == 0 || positives == data.len() {
            return Err(AttackError::Training(
                "training data has a single class".into(),
            ));
        }
        let feats: Vec<LinkFeatures<T>> = data.iter().map(|(x, _)| *x).collect();
        let (mean, scale) = standardisation(&feats);
        let xs: Vec<Vec<T>> = feats
            .iter()
            .map(|x| standardise(x, &mean, &scale))
            .collect();
        let ys: Vec<bool> = data.iter().map(|(_, y)| *y).collect();

        let mut w = vec![T::zero(); FEATURE_DIM];
        let mut b = T::zero();
        for _ in 0..cfg.epochs {
            let (_, gw, gb) = loss_and_gradient(&w, b, &xs, &ys, cfg.l2);
            for (wi, gi) in w.iter_mut().zip(gw) {
                *wi = *wi - cfg.learning_rate * gi;
            }
            b = b - cfg.learning_rate * gb;
        }
        let (final_loss, _, _) = loss_and_gradient(&w, b, &xs, &ys, cfg.l2);
        Ok(LinkClassifier {
            weights: w,
            bias: b,
            mean,
            scale,
            epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
            final_loss,
        })
    }

    pub fn probability(&self, x: &LinkFeatures<T>) -> T {
        let z = standardise(x, &self.mean, &self.scale);
        sigmoid(dot(&self.weights, &z) + self.bias)
    }
}

fn standardise<T: Real>(x: &LinkFeatures<T>, mean: &[T], scale: &[T]) -> Vec<T> {
    x.0.iter()
        .zip(mean)
        .zip(scale)
        .map(|((&v, &m), &s)| (v - m) / s)
        .collect()
}

impl<T: Real> LinkScorer<T> for LinkClassifier<T> {
    fn score(&self, x: &LinkFeatures<T>) -> T {
        self.probability(x)
    }
}
