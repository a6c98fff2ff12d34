use serde::{Deserialize, Serialize};

use super::{dot, expect_binary, sign, snapshot_of, Boundary, Label, Learner, UpdateReport};
use crate::error::Result;

/// Additive-update perceptron; never errors on non-realizable streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perceptron {
    w: Vec<f64>,
    /// Appends a constant 1 to every context, for affine thresholds.
    bias: bool,
    mistakes: u64,
}

impl Perceptron {
    /// Starts from `e₁` (in the augmented space when `bias` is set).
    pub fn new(dim: usize, bias: bool) -> Self {
        let mut w = vec![0.0; dim + bias as usize];
        w[0] = 1.0;
        Self { w, bias, mistakes: 0 }
    }

    pub fn with_weights(w: Vec<f64>) -> Self {
        Self {
            w,
            bias: false,
            mistakes: 0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    fn augment(&self, x: &[f64]) -> Vec<f64> {
        let mut v = x.to_vec();
        if self.bias {
            v.push(1.0);
        }
        v
    }

    /// `(ŷ, mistake)` for one round.
    pub fn step(&mut self, x: &[f64], y: i8) -> (i8, bool) {
        let v = self.augment(x);
        let yhat = sign(dot(&self.w, &v));
        let mistake = yhat != y;
        if mistake {
            self.mistakes += 1;
            for (wi, xi) in self.w.iter_mut().zip(&v) {
                *wi += y as f64 * xi;
            }
        }
        (yhat, mistake)
    }
}

impl Learner for Perceptron {
    fn name(&self) -> &'static str {
        "perceptron"
    }

    fn input_dim(&self) -> usize {
        self.w.len() - self.bias as usize
    }

    fn predict(&self, x: &[f64]) -> Label {
        Label::Binary(sign(dot(&self.w, &self.augment(x))))
    }

    fn update(&mut self, x: &[f64], y: Label) -> Result<UpdateReport> {
        let (yhat, mistake) = self.step(x, expect_binary(y));
        Ok(UpdateReport::new(Label::Binary(yhat), mistake))
    }

    fn boundary(&self) -> Option<Boundary> {
        let d = self.input_dim();
        Some(Boundary {
            normal: self.w[..d].to_vec(),
            offset: if self.bias { self.w[d] } else { 0.0 },
        })
    }

    fn mistakes(&self) -> u64 {
        self.mistakes
    }

    fn snapshot(&self) -> serde_json::Value {
        snapshot_of(self.name(), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_mistake_updates() {
        let mut p = Perceptron::with_weights(vec![0.0, 1.0]);
        assert_eq!(p.step(&[1.0, 0.0], -1), (1, true));
        assert_eq!(p.weights(), &[-1.0, 1.0]);
    }

    #[test]
    fn correct_round_is_noop() {
        let mut p = Perceptron::with_weights(vec![1.0, 0.0]);
        assert_eq!(p.step(&[0.5, 0.0], 1), (1, false));
        assert_eq!(p.weights(), &[1.0, 0.0]);
    }

    #[test]
    fn bias_augmentation() {
        let mut p = Perceptron::new(1, true);
        assert_eq!(p.weights(), &[1.0, 0.0]);
        p.step(&[0.2], -1);
        assert_eq!(p.weights(), &[0.8, -1.0]);
    }
}
