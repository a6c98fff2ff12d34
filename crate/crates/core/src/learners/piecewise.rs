//! Piecewise-linear regression by sequential piece discovery.
//!
//! A piece becomes known once the ERM oracle assigns it at least `ℓ + 1`
//! unexplained points. Known pieces never change; a supervised K-class
//! learner, restricted to the known pieces, picks which one to play.

use serde::{Deserialize, Serialize};

use super::{snapshot_of, KClassLinear, Label, Learner, PrunePolicy, UpdateReport};
use crate::erm::{erm_partition, fits, ErmProblem, DEFAULT_FIT_TOL};
use crate::error::{Error, Result};
use crate::geometry::JohnOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseRegressor {
    k: usize,
    dim: usize,
    ell: usize,
    fit_tol: f64,
    /// Known pieces `ĝ_1..ĝ_N`, in discovery order.
    pieces: Vec<Vec<f64>>,
    /// Points no known piece explains.
    uncertain: Vec<(Vec<f64>, f64)>,
    classifier: KClassLinear,
    mistakes: u64,
    round: u64,
    erm_calls: u64,
    max_erm_input: usize,
}

impl PiecewiseRegressor {
    /// Linear pieces through the origin, so `ℓ = d`.
    pub fn new(k: usize, dim: usize) -> Self {
        Self::with_options(k, dim, DEFAULT_FIT_TOL, JohnOptions::default(), PrunePolicy::default())
    }

    pub fn with_options(k: usize, dim: usize, fit_tol: f64, opts: JohnOptions, prune: PrunePolicy) -> Self {
        Self {
            k,
            dim,
            ell: dim,
            fit_tol,
            pieces: Vec::new(),
            uncertain: Vec::new(),
            classifier: KClassLinear::with_options(k, dim, true, opts, prune),
            mistakes: 0,
            round: 0,
            erm_calls: 0,
            max_erm_input: 0,
        }
    }

    pub fn known(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    pub fn uncertain(&self) -> &[(Vec<f64>, f64)] {
        &self.uncertain
    }

    pub fn classifier(&self) -> &KClassLinear {
        &self.classifier
    }

    pub fn erm_calls(&self) -> u64 {
        self.erm_calls
    }

    pub fn max_erm_input(&self) -> usize {
        self.max_erm_input
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    fn eval(a: &[f64], x: &[f64]) -> f64 {
        a.iter().zip(x).map(|(p, q)| p * q).sum()
    }

    pub fn predict_value(&self, x: &[f64]) -> f64 {
        if self.pieces.is_empty() {
            return 0.0;
        }
        let kh = self.classifier.classify(x, self.pieces.len());
        Self::eval(&self.pieces[kh], x)
    }

    /// Checks the bookkeeping invariants; `Err` names the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (x, y) in &self.uncertain {
            if let Some(i) = self.pieces.iter().position(|g| fits(g, x, *y, self.fit_tol)) {
                return Err(format!("uncertain point explained by piece {i}"));
            }
        }
        for i in 0..self.pieces.len() {
            for j in 0..i {
                if !distinct(&self.pieces[i], &self.pieces[j], self.fit_tol) {
                    return Err(format!("pieces {j} and {i} coincide"));
                }
            }
        }
        if self.max_erm_input > self.k * (self.ell + 1) {
            return Err(format!("ERM input {} exceeds K(ℓ+1)", self.max_erm_input));
        }
        Ok(())
    }

    pub fn step(&mut self, x: &[f64], y: f64) -> Result<UpdateReport> {
        assert_eq!(x.len(), self.dim, "context has wrong dimension");
        self.round += 1;
        let n = self.pieces.len();
        let kh = (n > 0).then(|| self.classifier.classify(x, n));
        let yhat = kh.map_or(0.0, |k| Self::eval(&self.pieces[k], x));
        let mistake = (yhat - y).abs() > self.fit_tol * y.abs().max(1.0);
        if mistake {
            self.mistakes += 1;
        }
        let mut report = UpdateReport::new(Label::Real(yhat), mistake);

        let star = self.pieces.iter().position(|g| fits(g, x, y, self.fit_tol));
        if let (Some(ks), Some(kh)) = (star, kh) {
            if ks != kh {
                let before = self.classifier.recomputes();
                self.classifier
                    .error_update(x, ks, kh, n)
                    .map_err(|e| e.at_round(self.round))?;
                report.binary_updates = 1;
                report.recomputed = self.classifier.recomputes() > before;
            }
        } else {
            report.unknown_piece = true;
            self.uncertain.push((x.to_vec(), y));
            let m = self.uncertain.len();
            self.max_erm_input = self.max_erm_input.max(m);
            report.erm_input = Some(m);
            if m > self.k * (self.ell + 1) {
                return Err(Error::ErmInfeasible { k: self.k, m }.at_round(self.round));
            }
            self.erm_calls += 1;
            let sol = erm_partition(&ErmProblem {
                points: self.uncertain.clone(),
                k: self.k,
                ell: self.ell,
                fit_tol: self.fit_tol,
            })
            .map_err(|e| e.at_round(self.round))?;
            let mut promoted = Vec::new();
            for (g, c) in sol.functions.iter().zip(&sol.clusters) {
                if c.len() >= self.ell + 1
                    && self.pieces.len() < self.k
                    && self.pieces.iter().all(|h| distinct(g, h, self.fit_tol))
                {
                    self.pieces.push(g.clone());
                    promoted.push(g.clone());
                }
            }
            if !promoted.is_empty() {
                let tol = self.fit_tol;
                self.uncertain
                    .retain(|(px, py)| !promoted.iter().any(|g| fits(g, px, *py, tol)));
            }
        }
        report.log_volume = self.classifier.total_log_volume();
        Ok(report)
    }
}

fn distinct(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).any(|(p, q)| (p - q).abs() > tol * scale)
}

impl Learner for PiecewiseRegressor {
    fn name(&self) -> &'static str {
        "piecewise_regression"
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> Label {
        Label::Real(self.predict_value(x))
    }

    fn update(&mut self, x: &[f64], y: Label) -> Result<UpdateReport> {
        let y = y.real().expect("regression learner needs real labels");
        self.step(x, y)
    }

    fn log_volume(&self) -> Option<f64> {
        Some(self.classifier.total_log_volume())
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

    fn truth(x: &[f64]) -> f64 {
        // piece 0 on x₁ ≥ 0: 2x₁ - x₂; piece 1 otherwise: -x₁ + 3x₂
        if x[0] >= 0.0 {
            2.0 * x[0] - x[1]
        } else {
            -x[0] + 3.0 * x[1]
        }
    }

    #[test]
    fn first_round_predicts_zero() {
        let mut r = PiecewiseRegressor::new(2, 2);
        let rep = r.step(&[0.3, 0.1], truth(&[0.3, 0.1])).unwrap();
        assert_eq!(rep.prediction, Label::Real(0.0));
        assert!(rep.unknown_piece);
        assert_eq!(r.known(), 0);
        assert_eq!(r.uncertain().len(), 1);
    }

    #[test]
    fn piece_promoted_after_ell_plus_one_points() {
        let mut r = PiecewiseRegressor::new(2, 2);
        let xs = [[0.3, 0.1], [0.5, -0.4], [0.2, 0.6]];
        for x in &xs[..2] {
            r.step(x, truth(x)).unwrap();
        }
        assert_eq!(r.known(), 0);
        r.step(&xs[2], truth(&xs[2])).unwrap();
        assert_eq!(r.known(), 1);
        assert!(r.uncertain().is_empty());
        let g = &r.pieces()[0];
        assert!((g[0] - 2.0).abs() < 1e-9 && (g[1] + 1.0).abs() < 1e-9);
        let x = [0.7, 0.05];
        assert!((r.predict_value(&x) - truth(&x)).abs() < 1e-9);
        r.check_invariants().unwrap();
    }

    #[test]
    fn explained_points_leave_the_uncertain_set() {
        let mut r = PiecewiseRegressor::new(2, 2);
        let xs = [[-0.3, 0.1], [0.3, 0.1], [0.5, -0.4], [0.2, 0.6]];
        for x in &xs {
            r.step(x, truth(x)).unwrap();
        }
        assert_eq!(r.known(), 1);
        assert_eq!(r.uncertain().len(), 1);
        assert_eq!(r.uncertain()[0].0, vec![-0.3, 0.1]);
        r.check_invariants().unwrap();
    }

    #[test]
    fn both_pieces_learned() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut r = PiecewiseRegressor::new(2, 2);
        for _ in 0..300 {
            let x = crate::geometry::sample_uniform_ball(2, &mut rng);
            let _: f64 = rng.gen();
            r.step(&x, truth(&x)).unwrap();
            r.check_invariants().unwrap();
        }
        assert_eq!(r.known(), 2);
        assert!(r.max_erm_input() <= 6);
    }

    #[test]
    fn too_many_pieces_is_reported() {
        let mut r = PiecewiseRegressor::new(1, 1);
        r.step(&[0.5], 0.5).unwrap();
        let err = r.step(&[0.5], -0.5).unwrap_err();
        assert!(matches!(err.root(), Error::ErmInfeasible { .. }), "{err:?}");
    }
}
