//! Contextual bandit by inverse gap weighting over per-action piecewise regressors.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PiecewiseRegressor, UpdateReport};
use crate::error::{Error, Result};

/// `γ_t` as a function of the round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaSchedule {
    Constant {
        gamma: f64,
    },
    /// `γ₀ √t`.
    Sqrt {
        gamma0: f64,
    },
}

impl GammaSchedule {
    pub fn at(&self, t: u64) -> f64 {
        match *self {
            GammaSchedule::Constant { gamma } => gamma,
            GammaSchedule::Sqrt { gamma0 } => gamma0 * (t.max(1) as f64).sqrt(),
        }
    }
}

/// Action probabilities `1 / (μ + γ (ŷ_a - ŷ_b))` off the greedy action `b`,
/// with the remaining mass on `b`. Ties for `b` go to the lowest index.
pub fn igw_distribution(preds: &[f64], gamma: f64, mu: f64) -> Result<(usize, Vec<f64>)> {
    if preds.is_empty() {
        return Err(Error::InvalidDistribution("no actions".into()));
    }
    let b = preds
        .iter()
        .enumerate()
        .fold(0, |best, (a, v)| if *v < preds[best] { a } else { best });
    let mut p = vec![0.0; preds.len()];
    let mut rest = 0.0;
    for (a, v) in preds.iter().enumerate() {
        if a != b {
            p[a] = 1.0 / (mu + gamma * (v - preds[b]));
            rest += p[a];
        }
    }
    p[b] = 1.0 - rest;
    if !(p[b] >= 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "greedy action gets mass {} (μ = {mu} below the action count?)",
            p[b]
        )));
    }
    Ok((b, p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgwDecision {
    pub action: usize,
    pub greedy: usize,
    pub probs: Vec<f64>,
    pub predictions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgwBandit {
    regressors: Vec<PiecewiseRegressor>,
    schedule: GammaSchedule,
    mu: f64,
    round: u64,
}

impl IgwBandit {
    /// `mu = None` uses `μ = A`.
    pub fn new(actions: usize, k: usize, dim: usize, schedule: GammaSchedule, mu: Option<f64>) -> Self {
        assert!(actions >= 1, "need at least one action");
        Self {
            regressors: (0..actions).map(|_| PiecewiseRegressor::new(k, dim)).collect(),
            schedule,
            mu: mu.unwrap_or(actions as f64),
            round: 0,
        }
    }

    pub fn actions(&self) -> usize {
        self.regressors.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn regressor(&self, a: usize) -> &PiecewiseRegressor {
        &self.regressors[a]
    }

    pub fn predictions(&self, x: &[f64]) -> Vec<f64> {
        self.regressors.iter().map(|r| r.predict_value(x)).collect()
    }

    /// Starts a round: predicts every action's loss and samples an action.
    pub fn decide<R: Rng + ?Sized>(&mut self, x: &[f64], rng: &mut R) -> Result<IgwDecision> {
        self.round += 1;
        let predictions = self.predictions(x);
        let gamma = self.schedule.at(self.round);
        let (greedy, probs) = igw_distribution(&predictions, gamma, self.mu).map_err(|e| e.at_round(self.round))?;
        let dist = WeightedIndex::new(&probs).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(IgwDecision {
            action: dist.sample(rng),
            greedy,
            probs,
            predictions,
        })
    }

    /// Feeds the observed loss of the played action to its regressor only.
    pub fn reward(&mut self, x: &[f64], action: usize, loss: f64) -> Result<UpdateReport> {
        self.regressors[action]
            .step(x, loss)
            .map_err(|e| e.at_round(self.round))
    }
}
