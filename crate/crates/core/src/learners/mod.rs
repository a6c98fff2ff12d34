//! Online learners behind a common predict/update contract.
//!
//! Classes are 0-based (`0..K`). `sign(0) = +1` throughout.

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub mod affine;
pub mod coordinate;
pub mod igw;
pub mod john_linear;
pub mod k_class;
pub mod naive;
pub mod perceptron;
pub mod piecewise;
pub mod poly_meta;

pub use affine::{affine_lift, AffineLift};
pub use coordinate::{CoordinateFeature, FeatureMap};
pub use igw::{igw_distribution, GammaSchedule, IgwBandit, IgwDecision};
pub use john_linear::{JohnLinear, PrunePolicy};
pub use k_class::KClassLinear;
pub use naive::NaiveThreshold;
pub use perceptron::Perceptron;
pub use piecewise::PiecewiseRegressor;
pub use poly_meta::PolyMetaPoint;

/// Version tag written into every learner snapshot.
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Binary(i8),
    Class(usize),
    Real(f64),
}

impl Label {
    pub fn binary(self) -> Option<i8> {
        match self {
            Label::Binary(y) => Some(y),
            _ => None,
        }
    }

    pub fn class(self) -> Option<usize> {
        match self {
            Label::Class(k) => Some(k),
            _ => None,
        }
    }

    pub fn real(self) -> Option<f64> {
        match self {
            Label::Real(v) => Some(v),
            _ => None,
        }
    }

    /// Scalar form used in traces: ±1, class index, or the value.
    pub fn as_f64(self) -> f64 {
        match self {
            Label::Binary(y) => y as f64,
            Label::Class(k) => k as f64,
            Label::Real(v) => v,
        }
    }
}

pub fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub prediction: Label,
    pub mistake: bool,
    /// Whether the classifier was recomputed this round.
    pub recomputed: bool,
    /// Volume surrogate after the update; NaN for learners without one.
    pub log_volume: f64,
    /// Binary instances that received an error update (K-class reductions).
    pub binary_updates: u32,
    /// Size of the ERM input, if the oracle was called.
    pub erm_input: Option<usize>,
    /// Regression rounds whose label no known piece explained.
    pub unknown_piece: bool,
}

impl UpdateReport {
    pub fn new(prediction: Label, mistake: bool) -> Self {
        Self {
            prediction,
            mistake,
            recomputed: false,
            log_volume: f64::NAN,
            binary_updates: 0,
            erm_input: None,
            unknown_piece: false,
        }
    }
}

/// Decision boundary `{x : ⟨normal, x⟩ + offset = 0}` in context space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub normal: Vec<f64>,
    pub offset: f64,
}

pub trait Learner: Send {
    fn name(&self) -> &'static str;
    /// Dimension of the contexts the learner accepts.
    fn input_dim(&self) -> usize;
    fn predict(&self, x: &[f64]) -> Label;
    fn update(&mut self, x: &[f64], y: Label) -> Result<UpdateReport>;
    /// John-volume surrogate, for cutting-plane learners.
    fn log_volume(&self) -> Option<f64> {
        None
    }
    /// Current boundary, for learners whose decision rule is a hyperplane in context space.
    fn boundary(&self) -> Option<Boundary> {
        None
    }
    fn mistakes(&self) -> u64;
    /// Versioned JSON dump of the full state.
    fn snapshot(&self) -> serde_json::Value;
}

pub(crate) fn snapshot_of<T: Serialize>(name: &str, state: &T) -> serde_json::Value {
    serde_json::json!({
        "format": "smoothcut-learner",
        "version": SNAPSHOT_VERSION,
        "learner": name,
        "state": serde_json::to_value(state).expect("learner state serializes"),
    })
}

/// Inverse of [`Learner::snapshot`] for a concrete learner type.
pub fn restore<T: serde::de::DeserializeOwned>(snapshot: &serde_json::Value) -> Result<T> {
    let version = snapshot.get("version").and_then(|v| v.as_u64());
    if version != Some(SNAPSHOT_VERSION as u64) {
        return Err(crate::Error::Config(format!(
            "unsupported snapshot version {version:?}"
        )));
    }
    let state = snapshot
        .get("state")
        .ok_or_else(|| crate::Error::Config("snapshot has no state".into()))?;
    serde_json::from_value(state.clone()).map_err(|e| crate::Error::Config(e.to_string()))
}

pub(crate) fn expect_binary(y: Label) -> i8 {
    match y {
        Label::Binary(v) if v == 1 || v == -1 => v,
        other => panic!("binary learner received label {other:?}"),
    }
}
