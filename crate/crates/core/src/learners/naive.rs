//! A consistent but naive threshold learner on `[-1, 1]`.

use serde::{Deserialize, Serialize};

use super::{expect_binary, sign, snapshot_of, Boundary, Label, Learner, UpdateReport};
use crate::error::Result;

/// Places its threshold `η` to the right of the largest negative example
/// whenever that stays below the smallest positive one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveThreshold {
    eta: f64,
    /// Largest negative point seen (or -1).
    lo: f64,
    /// Smallest positive point seen (or 1).
    hi: f64,
    mistakes: u64,
}

impl NaiveThreshold {
    pub fn new(eta: f64) -> Self {
        assert!(eta > 0.0, "η must be positive");
        Self {
            eta,
            lo: -1.0,
            hi: 1.0,
            mistakes: 0,
        }
    }

    pub fn threshold(&self) -> f64 {
        if self.lo + self.eta < self.hi {
            self.lo + self.eta
        } else {
            0.5 * (self.lo + self.hi)
        }
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn predict_binary(&self, x: f64) -> i8 {
        sign(x - self.threshold())
    }
}

impl Learner for NaiveThreshold {
    fn name(&self) -> &'static str {
        "naive_threshold"
    }

    fn input_dim(&self) -> usize {
        1
    }

    fn predict(&self, x: &[f64]) -> Label {
        Label::Binary(self.predict_binary(x[0]))
    }

    fn update(&mut self, x: &[f64], y: Label) -> Result<UpdateReport> {
        let y = expect_binary(y);
        let yhat = self.predict_binary(x[0]);
        let mistake = yhat != y;
        if mistake {
            self.mistakes += 1;
        }
        if y < 0 {
            self.lo = self.lo.max(x[0]);
        } else {
            self.hi = self.hi.min(x[0]);
        }
        Ok(UpdateReport::new(Label::Binary(yhat), mistake))
    }

    fn boundary(&self) -> Option<Boundary> {
        Some(Boundary {
            normal: vec![1.0],
            offset: -self.threshold(),
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
    fn threshold_follows_negatives() {
        let mut l = NaiveThreshold::new(0.01);
        assert!((l.threshold() + 0.99).abs() < 1e-15);
        assert_eq!(l.predict_binary(-0.985), 1);
        l.update(&[-0.985], Label::Binary(-1)).unwrap();
        assert!((l.threshold() + 0.975).abs() < 1e-12);
        assert_eq!(l.mistakes(), 1);
    }

    #[test]
    fn midpoint_when_gap_is_small() {
        let mut l = NaiveThreshold::new(0.5);
        l.update(&[0.1], Label::Binary(-1)).unwrap();
        l.update(&[0.3], Label::Binary(1)).unwrap();
        assert!((l.threshold() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn stays_consistent() {
        let mut l = NaiveThreshold::new(0.05);
        let pts = [(-0.4, -1), (0.6, 1), (0.1, -1), (0.15, 1)];
        for (x, y) in pts {
            l.update(&[x], Label::Binary(y)).unwrap();
        }
        for (x, y) in pts {
            assert_eq!(l.predict_binary(x), y);
        }
    }
}
