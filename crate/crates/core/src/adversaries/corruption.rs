use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::learners::Label;

/// Config form: explicit rounds plus a number of extra rounds drawn at random.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CorruptionSpec {
    pub flip_times: Vec<u64>,
    pub random: usize,
}

/// Rounds whose binary label is negated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CorruptionSchedule {
    flip_times: BTreeSet<u64>,
}

impl CorruptionSchedule {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_times(times: impl IntoIterator<Item = u64>) -> Self {
        Self {
            flip_times: times.into_iter().collect(),
        }
    }

    /// The explicit rounds plus `spec.random` distinct rounds from `1..=horizon`.
    pub fn resolve<R: Rng + ?Sized>(spec: &CorruptionSpec, horizon: u64, rng: &mut R) -> Self {
        let mut s = Self::from_times(spec.flip_times.iter().copied());
        let free: Vec<u64> = (1..=horizon).filter(|t| !s.flip_times.contains(t)).collect();
        let n = spec.random.min(free.len());
        for i in sample(rng, free.len(), n) {
            s.flip_times.insert(free[i]);
        }
        s
    }

    pub fn flip_times(&self) -> impl Iterator<Item = u64> + '_ {
        self.flip_times.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.flip_times.is_empty()
    }

    /// `1 + #flips`.
    pub fn n_err(&self) -> u64 {
        1 + self.flip_times.len() as u64
    }

    pub fn corrupt(&self, t: u64, y: Label) -> Label {
        match y {
            Label::Binary(v) if self.flip_times.contains(&t) => Label::Binary(-v),
            other => other,
        }
    }
}
