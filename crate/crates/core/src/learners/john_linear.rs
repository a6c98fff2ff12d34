//! Halfspace learner that plays the John center of the version space.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{dot, expect_binary, sign, snapshot_of, Boundary, Label, Learner, UpdateReport};
use crate::error::{Error, Result};
use crate::geometry::{john_ellipsoid, Ellipsoid, HalfspacePolytope, JohnOptions, Provenance};

/// When redundant cuts are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrunePolicy {
    /// Full prune once the constraint count exceeds `factor · d`
    /// and twice the count left by the previous prune.
    pub factor: usize,
    /// Drop each new cut right away if one LP shows it is implied.
    pub check_new_cut: bool,
    pub enabled: bool,
}

impl Default for PrunePolicy {
    fn default() -> Self {
        Self {
            factor: 8,
            check_new_cut: true,
            enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JohnLinear {
    dim: usize,
    poly: HalfspacePolytope,
    w: Vec<f64>,
    ellipsoid: Ellipsoid,
    opts: JohnOptions,
    prune: PrunePolicy,
    last_prune_len: usize,
    round: u64,
    mistakes: u64,
    recomputes: u64,
}

impl JohnLinear {
    /// Version space `[-1, 1]^d`, classifier `w₁ = e₁`.
    pub fn new(dim: usize) -> Self {
        Self::with_options(dim, JohnOptions::default(), PrunePolicy::default())
    }

    pub fn with_options(dim: usize, opts: JohnOptions, prune: PrunePolicy) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let mut w = vec![0.0; dim];
        w[0] = 1.0;
        let poly = HalfspacePolytope::unit_box(dim);
        Self {
            dim,
            last_prune_len: poly.len(),
            poly,
            w,
            ellipsoid: Ellipsoid::ball(DVector::zeros(dim), 1.0),
            opts,
            prune,
            round: 0,
            mistakes: 0,
            recomputes: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn version_space(&self) -> &HalfspacePolytope {
        &self.poly
    }

    pub fn ellipsoid(&self) -> &Ellipsoid {
        &self.ellipsoid
    }

    pub fn recomputes(&self) -> u64 {
        self.recomputes
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn predict_binary(&self, x: &[f64]) -> i8 {
        sign(dot(&self.w, x))
    }

    /// Adds `⟨w, y x⟩ ≥ 0` to the version space without moving `w`.
    pub fn apply_cut(&mut self, x: &[f64], y: i8) -> Result<()> {
        assert_eq!(x.len(), self.dim, "context has wrong dimension");
        self.round += 1;
        let normal: Vec<f64> = x.iter().map(|v| -(y as f64) * v).collect();
        if normal.iter().all(|v| *v == 0.0) {
            // Zero context: the constraint is 0 ≥ 0, but only y = +1 is consistent with sign(0) = +1.
            if y < 0 {
                return Err(Error::NonRealizable {
                    round: self.round,
                    reason: "negative label on the zero context".into(),
                });
            }
            return Ok(());
        }
        self.poly
            .push_cut(normal, 0.0, Provenance::DataCut { round: self.round });
        if self.prune.enabled {
            if self.prune.check_new_cut {
                let last = self.poly.len() - 1;
                if self.poly.is_redundant(last, crate::geometry::PRUNE_EPS)? {
                    self.poly.remove(last);
                }
            }
            let threshold = (self.prune.factor * self.dim).max(2 * self.last_prune_len);
            if self.poly.len() > threshold {
                self.poly.prune_in_place()?;
                self.last_prune_len = self.poly.len();
            }
        }
        Ok(())
    }

    /// Replaces `w` by the John center of the current version space.
    pub fn recompute(&mut self) -> Result<()> {
        let sol = john_ellipsoid(&self.poly, &self.opts, Some(&self.ellipsoid)).map_err(|e| match e {
            Error::InfeasibleOrDegenerate(reason) => Error::NonRealizable {
                round: self.round,
                reason,
            },
            other => other,
        })?;
        self.ellipsoid = sol.ellipsoid;
        self.w = self.ellipsoid.center_vec();
        self.recomputes += 1;
        Ok(())
    }

    /// One round: cut always, recompute on a mistake.
    pub fn update_binary(&mut self, x: &[f64], y: i8) -> Result<UpdateReport> {
        let yhat = self.predict_binary(x);
        let mistake = yhat != y;
        self.apply_cut(x, y)?;
        let mut report = UpdateReport::new(Label::Binary(yhat), mistake);
        if mistake {
            self.mistakes += 1;
            self.recompute()?;
            report.recomputed = true;
        }
        report.log_volume = self.ellipsoid.log_volume();
        Ok(report)
    }

    #[cfg(test)]
    pub(crate) fn set_weights(&mut self, w: Vec<f64>) {
        self.w = w;
    }

    /// Whether `w` lies in the version space within `slack`.
    pub fn is_consistent(&self, w: &[f64], slack: f64) -> bool {
        self.poly.contains(w, slack)
    }
}

impl Learner for JohnLinear {
    fn name(&self) -> &'static str {
        "john_linear"
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> Label {
        Label::Binary(self.predict_binary(x))
    }

    fn update(&mut self, x: &[f64], y: Label) -> Result<UpdateReport> {
        self.update_binary(x, expect_binary(y))
    }

    fn log_volume(&self) -> Option<f64> {
        Some(self.ellipsoid.log_volume())
    }

    fn boundary(&self) -> Option<Boundary> {
        Some(Boundary {
            normal: self.w.clone(),
            offset: 0.0,
        })
    }

    fn mistakes(&self) -> u64 {
        self.mistakes
    }

    fn snapshot(&self) -> serde_json::Value {
        snapshot_of(self.name(), self)
    }
}
