//! Halfspaces in a coordinatewise monotone feature space.

use serde::{Deserialize, Serialize};

use super::{dot, expect_binary, snapshot_of, JohnLinear, Label, Learner, PrunePolicy, UpdateReport};
use crate::error::{Error, Result};
use crate::geometry::JohnOptions;

/// Increasing map of `[-1, 1]` into itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureMap {
    Identity,
    /// `tanh(k u) / tanh(k)`; derivative at least `k (1 - tanh² k) / tanh k`.
    ScaledTanh {
        k: f64,
    },
    /// `a u + (1 - a) u³`, `0 < a ≤ 1`; derivative at least `a`.
    Cubic {
        a: f64,
    },
}

impl FeatureMap {
    pub fn apply(&self, u: f64) -> f64 {
        match *self {
            FeatureMap::Identity => u,
            FeatureMap::ScaledTanh { k } => (k * u).tanh() / k.tanh(),
            FeatureMap::Cubic { a } => a * u + (1.0 - a) * u * u * u,
        }
    }

    /// Smallest derivative over `[-1, 1]`, in closed form.
    pub fn min_derivative(&self) -> f64 {
        match *self {
            FeatureMap::Identity => 1.0,
            FeatureMap::ScaledTanh { k } => {
                let t = k.tanh();
                k * (1.0 - t * t) / t
            }
            FeatureMap::Cubic { a } => a,
        }
    }

    /// Finite-difference probe on a 1000-point grid: derivative `≥ alpha`
    /// and values inside `[-1, 1]`.
    pub fn probe(&self, alpha: f64) -> Result<()> {
        const N: usize = 1000;
        let h = 2.0 / (N - 1) as f64;
        let mut prev = self.apply(-1.0);
        for i in 0..N {
            let u = -1.0 + i as f64 * h;
            let v = self.apply(u);
            if !(v.abs() <= 1.0 + 1e-12) {
                return Err(Error::SpecViolation(format!("{self:?}({u}) = {v} leaves [-1, 1]")));
            }
            if i > 0 {
                // secant over the cell and a central difference at the grid point
                let slope = (v - prev) / h;
                let eps = 1e-6;
                let d_here = (self.apply((u + eps).min(1.0)) - self.apply((u - eps).max(-1.0)))
                    / ((u + eps).min(1.0) - (u - eps).max(-1.0));
                if slope < alpha * (1.0 - 1e-9) || d_here < alpha * (1.0 - 1e-6) {
                    return Err(Error::SpecViolation(format!(
                        "{self:?} has slope {:.6} < α = {alpha} near u = {u:.4}",
                        slope.min(d_here)
                    )));
                }
            }
            prev = v;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateFeature {
    maps: Vec<FeatureMap>,
    alpha: f64,
    inner: JohnLinear,
}

impl CoordinateFeature {
    /// One map per coordinate, each probed against the declared `alpha`.
    pub fn new(maps: Vec<FeatureMap>, alpha: f64) -> Result<Self> {
        Self::with_options(maps, alpha, JohnOptions::default(), PrunePolicy::default())
    }

    pub fn with_options(maps: Vec<FeatureMap>, alpha: f64, opts: JohnOptions, prune: PrunePolicy) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::SpecViolation(format!("α = {alpha} must be positive")));
        }
        for m in &maps {
            m.probe(alpha)?;
        }
        let dim = maps.len();
        Ok(Self {
            maps,
            alpha,
            inner: JohnLinear::with_options(dim, opts, prune),
        })
    }

    /// `(φ₁(x₁), …, φ_d(x_d))`, shrunk onto the unit ball if needed.
    /// Positive scaling leaves every sign and cut unchanged.
    pub fn wrap(&self, x: &[f64]) -> Vec<f64> {
        let v: Vec<f64> = self.maps.iter().zip(x).map(|(m, u)| m.apply(*u)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1.0 {
            v.into_iter().map(|c| c / n).collect()
        } else {
            v
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn inner(&self) -> &JohnLinear {
        &self.inner
    }
}

impl Learner for CoordinateFeature {
    fn name(&self) -> &'static str {
        "coordinate_feature"
    }

    fn input_dim(&self) -> usize {
        self.maps.len()
    }

    fn predict(&self, x: &[f64]) -> Label {
        self.inner.predict(&self.wrap(x))
    }

    fn update(&mut self, x: &[f64], y: Label) -> Result<UpdateReport> {
        let v = self.wrap(x);
        self.inner.update_binary(&v, expect_binary(y))
    }

    fn log_volume(&self) -> Option<f64> {
        self.inner.log_volume()
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

    #[test]
    fn identity_is_unchanged() {
        let f = CoordinateFeature::new(vec![FeatureMap::Identity; 2], 1.0).unwrap();
        assert_eq!(f.wrap(&[0.3, -0.4]), vec![0.3, -0.4]);
    }

    #[test]
    fn tanh_probe_passes_at_declared_bound() {
        let m = FeatureMap::ScaledTanh { k: 1.5 };
        let alpha = m.min_derivative();
        m.probe(alpha * 0.999).unwrap();
        for i in 0..=100 {
            let u = -1.0 + 0.02 * i as f64;
            assert!(m.apply(u).abs() <= 1.0 + 1e-12);
            if i > 0 {
                assert!(m.apply(u) > m.apply(u - 0.02));
            }
        }
    }

    #[test]
    fn alpha_too_large_is_rejected() {
        let err = CoordinateFeature::new(vec![FeatureMap::Cubic { a: 0.5 }], 0.9).unwrap_err();
        assert!(matches!(err, Error::SpecViolation(_)));
        assert!(CoordinateFeature::new(vec![FeatureMap::Cubic { a: 0.5 }], 0.5).is_ok());
    }

    #[test]
    fn flat_end_is_rejected() {
        // 1.5 u - 0.5 u³ has zero slope at u = ±1
        let err = FeatureMap::Cubic { a: 1.5 }.probe(0.1).unwrap_err();
        assert!(matches!(err, Error::SpecViolation(_)));
    }
}
