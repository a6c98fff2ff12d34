//! Closed-form mistake and regret bounds, evaluated with natural logarithms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Observed must not exceed the value.
    Upper,
    /// Observed (in expectation) must reach the value.
    Lower,
    /// Rate with unspecified constants; reported, never gated.
    Order,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub kind: BoundKind,
    pub value: f64,
    pub observed: f64,
    pub satisfied: bool,
    pub params: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new(name: &str, kind: BoundKind, value: f64, observed: f64, params: &[(&str, f64)]) -> Self {
        let satisfied = match kind {
            BoundKind::Upper => observed <= value,
            BoundKind::Lower => observed >= value,
            BoundKind::Order => true,
        };
        Self {
            name: name.to_string(),
            kind,
            value,
            observed,
            satisfied,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

fn dlnd(d: f64) -> f64 {
    d * d.ln()
}

/// `136 d ln d + 34 ln(T/(σδ)) + 56`.
pub fn warmup_bound(d: usize, horizon: u64, sigma: f64, delta: f64) -> f64 {
    136.0 * dlnd(d as f64) + 34.0 * (horizon as f64 / (sigma * delta)).ln() + 56.0
}

/// Affine lift: the warmup bound in dimension `d + 1` at smoothness `σ / 4^{d+2}`.
pub fn affine_bound(d: usize, horizon: u64, sigma: f64, delta: f64) -> f64 {
    warmup_bound(d + 1, horizon, affine_sigma(d, sigma), delta)
}

/// Smoothness of the lifted contexts.
pub fn affine_sigma(d: usize, sigma: f64) -> f64 {
    sigma / 4f64.powi(d as i32 + 2)
}

/// The cruder closed form `268 d ln d + 34 ln(T/(σδ)) + 56`.
pub fn affine_corollary_bound(d: usize, horizon: u64, sigma: f64, delta: f64) -> f64 {
    268.0 * dlnd(d as f64) + 34.0 * (horizon as f64 / (sigma * delta)).ln() + 56.0
}

/// `136 d ln(d/α) + 34 ln(T/(σδ)) + 56`.
pub fn coordinate_bound(d: usize, alpha: f64, horizon: u64, sigma: f64, delta: f64) -> f64 {
    let d = d as f64;
    136.0 * d * (d / alpha).ln() + 34.0 * (horizon as f64 / (sigma * delta)).ln() + 56.0
}

/// `m ln m + ln(1/α) + ℓ² m² d ln²(d ℓ T L/(σδ))` with unit constants.
pub fn polynomial_rate(m: usize, d: usize, degree: usize, lipschitz: f64, horizon: u64, sigma: f64, delta: f64) -> f64 {
    let (m, d, l) = (m as f64, d as f64, degree as f64);
    let log = (d * l * horizon as f64 * lipschitz / (sigma * delta)).ln();
    dlnd(m) + l * l * m * m * d * log * log
}

/// `136 K² d ln d + 91 K² ln(T K²/(σδ))`.
pub fn k_class_bound(k: usize, d: usize, horizon: u64, sigma: f64, delta: f64) -> f64 {
    let k2 = (k * k) as f64;
    136.0 * k2 * dlnd(d as f64) + 91.0 * k2 * (horizon as f64 * k2 / (sigma * delta)).ln()
}

/// Mistakes spent before every piece is known: `K²(ℓ + 1)`.
pub fn undiscovered_bound(k: usize, ell: usize) -> f64 {
    (k * k * (ell + 1)) as f64
}

/// K-class bound plus `K²(ℓ + 1)`.
pub fn piecewise_bound(k: usize, d: usize, ell: usize, horizon: u64, sigma: f64, delta: f64) -> f64 {
    k_class_bound(k, d, horizon, sigma, delta) + undiscovered_bound(k, ell)
}

/// Total prediction errors over `A` regressors:
/// `A (136 K² d ln d + 91 K² ln(4 A T² K²/(σδ)) + K²(ℓ+1))`.
pub fn igw_error_bound(actions: usize, k: usize, d: usize, ell: usize, horizon: u64, sigma: f64, delta: f64) -> f64 {
    let (a, k2, t) = (actions as f64, (k * k) as f64, horizon as f64);
    a * (136.0 * k2 * dlnd(d as f64)
        + 91.0 * k2 * (4.0 * a * t * t * k2 / (sigma * delta)).ln()
        + undiscovered_bound(k, ell))
}

/// `(T/σ_dir)^{2/3} N_err^{1/3}`.
pub fn perceptron_bound(horizon: u64, sigma_dir: f64, n_err: u64) -> f64 {
    (horizon as f64 / sigma_dir).powf(2.0 / 3.0) * (n_err as f64).cbrt()
}

/// Expected mistakes forced on the naive threshold: `⌊1/σ⌋ (1 - η/(2σ))`.
pub fn naive_lower_bound(sigma: f64, eta: f64) -> f64 {
    (1.0 / sigma).floor() * (1.0 - eta / (2.0 * sigma))
}
