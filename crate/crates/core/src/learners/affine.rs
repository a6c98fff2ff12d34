//! Affine halfspaces through the lift `x ↦ z (x, 1) / 4`, `z ~ Unif(1, 2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{expect_binary, snapshot_of, Boundary, JohnLinear, Label, Learner, PrunePolicy, UpdateReport};
use crate::error::Result;
use crate::geometry::JohnOptions;

/// `z (x, 1) / 4`. Norm at most `z √2 / 4 ≤ 1` for `‖x‖ ≤ 1`.
pub fn affine_lift(x: &[f64], z: f64) -> Vec<f64> {
    let mut out: Vec<f64> = x.iter().map(|v| z * v / 4.0).collect();
    out.push(z / 4.0);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineLift {
    inner: JohnLinear,
    rng: ChaCha8Rng,
}

impl AffineLift {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self::with_options(dim, seed, JohnOptions::default(), PrunePolicy::default())
    }

    pub fn with_options(dim: usize, seed: u64, opts: JohnOptions, prune: PrunePolicy) -> Self {
        Self {
            inner: JohnLinear::with_options(dim + 1, opts, prune),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Draws `z` and lifts `x`.
    pub fn wrap(&mut self, x: &[f64]) -> Vec<f64> {
        let z = self.rng.gen_range(1.0..2.0);
        affine_lift(x, z)
    }

    pub fn inner(&self) -> &JohnLinear {
        &self.inner
    }
}

impl Learner for AffineLift {
    fn name(&self) -> &'static str {
        "affine_lift"
    }

    fn input_dim(&self) -> usize {
        self.inner.dim() - 1
    }

    fn predict(&self, x: &[f64]) -> Label {
        // The sign is the same for every z > 0.
        self.inner.predict(&affine_lift(x, 1.0))
    }

    fn update(&mut self, x: &[f64], y: Label) -> Result<UpdateReport> {
        let lifted = self.wrap(x);
        self.inner.update_binary(&lifted, expect_binary(y))
    }

    fn log_volume(&self) -> Option<f64> {
        self.inner.log_volume()
    }

    fn boundary(&self) -> Option<Boundary> {
        let w = self.inner.weights();
        let d = w.len() - 1;
        Some(Boundary {
            normal: w[..d].to_vec(),
            offset: w[d],
        })
    }

    fn mistakes(&self) -> u64 {
        self.inner.mistakes()
    }

    fn snapshot(&self) -> serde_json::Value {
        snapshot_of(self.name(), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{dot, sign};

    #[test]
    fn lift_arithmetic() {
        let v = affine_lift(&[0.6, 0.0], 1.5);
        assert!((v[0] - 0.225).abs() < 1e-15 && v[1] == 0.0 && (v[2] - 0.375).abs() < 1e-15);
        assert!((dot(&v, &v).sqrt() - 0.4373).abs() < 1e-4);
        assert_eq!(affine_lift(&[0.0, 0.0], 1.0), vec![0.0, 0.0, 0.25]);
    }

    #[test]
    fn lift_preserves_sign() {
        let (w, b) = ([1.0, 0.0], -0.5);
        let x = [0.6, 0.0];
        let lifted = affine_lift(&x, 1.5);
        assert!(dot(&w, &x) + b > 0.0);
        assert!((dot(&[1.0, 0.0, -0.5], &lifted) - 0.0375).abs() < 1e-12);
        for z in [1.0, 1.3, 1.99] {
            assert_eq!(sign(dot(&[1.0, 0.0, -0.5], &affine_lift(&x, z))), 1);
        }
    }

    #[test]
    fn lifted_norm_at_most_one() {
        let mut l = AffineLift::new(3, 7);
        for x in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.0, 0.0, 0.0]] {
            let v = l.wrap(&x);
            assert!(dot(&v, &v).sqrt() <= 1.0);
        }
    }
}
