//! K-class linear classification by pairwise John-center learners.
//!
//! Pair `(i, j)`, `i < j`, predicts `+1` when class `i` should beat class `j`.
//! The prediction is the smallest `i` that beats every `j > i` (among the
//! first `M` classes when supervised). A mistake sends exactly one error
//! update to one pair.

use serde::{Deserialize, Serialize};

use super::{snapshot_of, JohnLinear, Label, Learner, PrunePolicy, UpdateReport};
use crate::error::{Error, Result};
use crate::geometry::JohnOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Pair {
    learner: JohnLinear,
    /// Dormant pairs predict +1 and have never been selected.
    active: bool,
    error_updates: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KClassLinear {
    k: usize,
    dim: usize,
    /// When set, a pair stays dormant until first selected, then restarts from `e₁`.
    dormant: bool,
    opts: JohnOptions,
    prune: PrunePolicy,
    pairs: Vec<Pair>,
    mistakes: u64,
    round: u64,
}

impl KClassLinear {
    pub fn new(k: usize, dim: usize, dormant: bool) -> Self {
        Self::with_options(k, dim, dormant, JohnOptions::default(), PrunePolicy::default())
    }

    pub fn with_options(k: usize, dim: usize, dormant: bool, opts: JohnOptions, prune: PrunePolicy) -> Self {
        assert!(k >= 1, "need at least one class");
        let pairs = (0..k * (k - 1) / 2)
            .map(|_| Pair {
                learner: JohnLinear::with_options(dim, opts, prune),
                active: !dormant,
                error_updates: 0,
            })
            .collect();
        Self {
            k,
            dim,
            dormant,
            opts,
            prune,
            pairs,
            mistakes: 0,
            round: 0,
        }
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.k);
        // pairs (0,1), (0,2), …, (0,k-1), (1,2), …
        i * (2 * self.k - i - 1) / 2 + (j - i - 1)
    }

    /// Prediction of pair `(i, j)`.
    pub fn pair_prediction(&self, i: usize, j: usize, x: &[f64]) -> i8 {
        let p = &self.pairs[self.index(i, j)];
        if p.active {
            p.learner.predict_binary(x)
        } else {
            1
        }
    }

    /// Smallest `i < m` whose pairs against every `j ∈ (i, m)` predict +1.
    pub fn classify(&self, x: &[f64], m: usize) -> usize {
        assert!(m >= 1 && m <= self.k, "class limit {m} outside 1..={}", self.k);
        (0..m)
            .find(|&i| (i + 1..m).all(|j| self.pair_prediction(i, j, x) == 1))
            .unwrap_or(m - 1)
    }

    /// Error update after predicting `yhat ≠ y` with class limit `m`.
    /// Returns the selected pair.
    pub fn error_update(&mut self, x: &[f64], y: usize, yhat: usize, m: usize) -> Result<(usize, usize)> {
        assert!(y < m && yhat < m && y != yhat);
        let (i, j) = if y < yhat {
            let j = (y + 1..m)
                .find(|&j| self.pair_prediction(y, j, x) == -1)
                .expect("a losing pair exists when y < ŷ");
            (y, j)
        } else {
            (yhat, y)
        };
        // the class ordered first should win; here y < ŷ ⇔ i = y
        let label: i8 = if y < yhat { 1 } else { -1 };
        let idx = self.index(i, j);
        let (opts, prune) = (self.opts, self.prune);
        let pair = &mut self.pairs[idx];
        if !pair.active {
            pair.learner = JohnLinear::with_options(self.dim, opts, prune);
            pair.active = true;
        }
        pair.error_updates += 1;
        pair.learner
            .update_binary(x, label)
            .map_err(|e| annotate(e, self.round, i, j))?;
        Ok((i, j))
    }

    /// One supervised round with class limit `m`; returns the report.
    pub fn step(&mut self, x: &[f64], y: usize, m: usize) -> Result<UpdateReport> {
        self.round += 1;
        let yhat = self.classify(x, m);
        let mistake = yhat != y;
        let mut report = UpdateReport::new(Label::Class(yhat), mistake);
        if mistake {
            self.mistakes += 1;
            let before = self.recomputes();
            self.error_update(x, y, yhat, m)?;
            report.binary_updates = 1;
            report.recomputed = self.recomputes() > before;
        }
        report.log_volume = self.total_log_volume();
        Ok(report)
    }

    /// Sum over pairs of the John log-volumes.
    pub fn total_log_volume(&self) -> f64 {
        self.pairs.iter().map(|p| p.learner.ellipsoid().log_volume()).sum()
    }

    pub fn recomputes(&self) -> u64 {
        self.pairs.iter().map(|p| p.learner.recomputes()).sum()
    }

    /// Error updates received by pair `(i, j)`.
    pub fn pair_error_updates(&self, i: usize, j: usize) -> u64 {
        self.pairs[self.index(i, j)].error_updates
    }

    pub fn total_error_updates(&self) -> u64 {
        self.pairs.iter().map(|p| p.error_updates).sum()
    }

    pub fn pair_learner(&self, i: usize, j: usize) -> &JohnLinear {
        &self.pairs[self.index(i, j)].learner
    }

    pub fn is_active(&self, i: usize, j: usize) -> bool {
        self.pairs[self.index(i, j)].active
    }

    pub fn is_dormant_mode(&self) -> bool {
        self.dormant
    }
}

fn annotate(e: Error, round: u64, i: usize, j: usize) -> Error {
    match e {
        Error::NonRealizable { reason, .. } => Error::NonRealizable {
            round,
            reason: format!("pair ({i}, {j}): {reason}"),
        },
        other => other,
    }
}

impl Learner for KClassLinear {
    fn name(&self) -> &'static str {
        "k_class"
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> Label {
        Label::Class(self.classify(x, self.k))
    }

    fn update(&mut self, x: &[f64], y: Label) -> Result<UpdateReport> {
        let y = y.class().expect("k-class learner needs class labels");
        assert!(y < self.k, "class {y} out of range");
        self.step(x, y, self.k)
    }

    fn log_volume(&self) -> Option<f64> {
        Some(self.total_log_volume())
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

    /// Forces pair predictions by giving each pair a sign-fixed weight.
    fn with_pairs(preds: &[((usize, usize), i8)]) -> (KClassLinear, Vec<f64>) {
        let mut kc = KClassLinear::new(3, 2, false);
        let x = vec![0.5, 0.0];
        for &((i, j), s) in preds {
            if s < 0 {
                let idx = kc.index(i, j);
                kc.pairs[idx].learner.set_weights(vec![-1.0, 0.0]);
                assert_eq!(kc.pair_prediction(i, j, &x), -1);
            }
        }
        (kc, x)
    }

    #[test]
    fn pair_index_layout() {
        let kc = KClassLinear::new(4, 2, false);
        let mut seen = vec![];
        for i in 0..4 {
            for j in i + 1..4 {
                seen.push(kc.index(i, j));
            }
        }
        assert_eq!(seen, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn prediction_rule() {
        let (kc, x) = with_pairs(&[((0, 1), 1), ((0, 2), -1), ((1, 2), 1)]);
        assert_eq!(kc.classify(&x, 3), 1);
        let (kc, x) = with_pairs(&[]);
        assert_eq!(kc.classify(&x, 3), 0);
        let (kc, x) = with_pairs(&[((0, 1), -1), ((0, 2), -1), ((1, 2), -1)]);
        assert_eq!(kc.classify(&x, 3), 2);
    }

    #[test]
    fn error_update_when_truth_is_lower() {
        // ŷ = 1, y = 0: pair (0, j) with smallest j predicting -1, binary label +1
        let (mut kc, x) = with_pairs(&[((0, 1), -1), ((1, 2), 1)]);
        assert_eq!(kc.classify(&x, 3), 1);
        let before: Vec<u64> = (0..3).map(|p| kc.pairs[p].error_updates).collect();
        assert_eq!(kc.error_update(&x, 0, 1, 3).unwrap(), (0, 1));
        assert_eq!(kc.pair_error_updates(0, 1), before[0] + 1);
        assert_eq!(kc.pair_error_updates(0, 2), before[1]);
        assert_eq!(kc.pair_error_updates(1, 2), before[2]);
        assert_eq!(kc.pair_learner(0, 1).mistakes(), 1);
    }

    #[test]
    fn error_update_when_truth_is_higher() {
        let (mut kc, x) = with_pairs(&[]);
        assert_eq!(kc.classify(&x, 3), 0);
        assert_eq!(kc.error_update(&x, 2, 0, 3).unwrap(), (0, 2));
        assert_eq!(kc.total_error_updates(), 1);
        assert_eq!(kc.pair_prediction(0, 2, &x), -1);
    }

    #[test]
    fn correct_round_touches_nothing() {
        let mut kc = KClassLinear::new(3, 2, false);
        let r = kc.step(&[0.5, 0.1], 0, 3).unwrap();
        assert!(!r.mistake);
        assert_eq!(kc.total_error_updates(), 0);
        assert_eq!(r.binary_updates, 0);
    }

    #[test]
    fn supervised_limits() {
        let kc = KClassLinear::new(3, 2, true);
        assert_eq!(kc.classify(&[-0.5, 0.3], 1), 0);
        let (kc3, x) = with_pairs(&[((0, 1), 1), ((0, 2), -1), ((1, 2), 1)]);
        assert_eq!(kc3.classify(&x, 3), kc3.predict(&x).class().unwrap());
    }

    #[test]
    fn dormant_pair_activates_fresh() {
        let mut kc = KClassLinear::new(3, 2, true);
        let x = [-0.5, 0.3];
        // dormant pairs all predict +1 even though e₁ would say -1
        assert_eq!(kc.pair_prediction(0, 1, &x), 1);
        assert!(!kc.is_active(0, 1));
        kc.error_update(&x, 1, 0, 3).unwrap();
        assert!(kc.is_active(0, 1));
        // the fresh learner saw (x, -1) with w = e₁, which it already predicts
        assert_eq!(kc.pair_learner(0, 1).weights(), &[1.0, 0.0]);
        assert_eq!(kc.pair_learner(0, 1).version_space().data_cut_count(), 1);
        assert_eq!(kc.pair_prediction(0, 1, &x), -1);
    }
}
