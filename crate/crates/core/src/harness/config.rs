//! Experiment configuration, read from TOML. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversaries::{AdversarySpec, CorruptionSpec, OracleSpec};
use crate::error::{Error, Result};
use crate::geometry::JohnOptions;
use crate::learners::{FeatureMap, GammaSchedule, PrunePolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    JohnLinear,
    AffineLift,
    CoordinateFeature {
        maps: Vec<FeatureMap>,
        alpha: f64,
    },
    PolyMetaPoint {
        degree: usize,
        /// Explicit bucket size; otherwise `ceil(c · m · ℓ · ln(L ℓ T / δ))`.
        #[serde(default)]
        bucket_size: Option<usize>,
        #[serde(default = "default_bucket_c")]
        bucket_c: f64,
        /// Declared Lipschitz constant of the monomial map; defaults to the degree.
        #[serde(default)]
        lipschitz: Option<f64>,
    },
    Perceptron {
        #[serde(default)]
        bias: bool,
    },
    NaiveThreshold {
        eta: f64,
    },
    KClass {
        k: usize,
        #[serde(default)]
        dormant: bool,
    },
    Piecewise {
        k: usize,
    },
    /// Contextual bandit over `actions` piecewise-linear loss functions.
    Igw {
        actions: usize,
        k: usize,
        gamma: GammaSchedule,
        #[serde(default)]
        mu: Option<f64>,
    },
}

fn default_bucket_c() -> f64 {
    2.0
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::JohnLinear => "john_linear",
            LearnerSpec::AffineLift => "affine_lift",
            LearnerSpec::CoordinateFeature { .. } => "coordinate_feature",
            LearnerSpec::PolyMetaPoint { .. } => "poly_meta_point",
            LearnerSpec::Perceptron { .. } => "perceptron",
            LearnerSpec::NaiveThreshold { .. } => "naive_threshold",
            LearnerSpec::KClass { .. } => "k_class",
            LearnerSpec::Piecewise { .. } => "piecewise_regression",
            LearnerSpec::Igw { .. } => "igw",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    /// Samples per disagreement-mass estimate; 0 turns the estimate off.
    pub disagreement_samples: usize,
    /// Estimates are taken after each of the first this many mistakes.
    pub disagreement_max_mistakes: u64,
    pub tau: f64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            disagreement_samples: 0,
            disagreement_max_mistakes: 30,
            tau: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Fill the `wallclock_us` column (otherwise 0, keeping traces byte-stable).
    pub record_wallclock: bool,
    /// Keep contexts in memory for replay when `d` is at most this.
    pub keep_contexts_up_to_dim: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            record_wallclock: false,
            keep_contexts_up_to_dim: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub horizon: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    pub learner: LearnerSpec,
    pub adversary: AdversarySpec,
    /// Not needed when the adversary fixes the labels itself.
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
    #[serde(default)]
    pub corruption: CorruptionSpec,
    #[serde(default)]
    pub solver: JohnOptions,
    #[serde(default)]
    pub prune: PrunePolicy,
    #[serde(default)]
    pub mc: MonteCarloConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_delta() -> f64 {
    0.05
}

fn default_trials() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        let forced = matches!(
            self.adversary,
            AdversarySpec::LowerBound1d { .. } | AdversarySpec::NaivePunisher { .. } | AdversarySpec::RademacherPrefix
        );
        if matches!(
            self.adversary,
            AdversarySpec::LowerBound1d { .. } | AdversarySpec::NaivePunisher { .. }
        ) && self.dim != 1
        {
            return bad("one-dimensional adversaries need dim = 1");
        }
        let label = label_kind(&self.learner);
        match (&self.oracle, forced) {
            (Some(_), true) => return bad("this adversary fixes the labels; remove [oracle]"),
            (None, false) => return bad("missing [oracle]"),
            (None, true) => {
                if label != LabelKind::Binary {
                    return bad("this adversary only produces binary labels");
                }
            }
            (Some(o), false) => {
                let ok = match o {
                    OracleSpec::KClass { .. } => label == LabelKind::Class,
                    OracleSpec::Piecewise { .. } => matches!(label, LabelKind::Real | LabelKind::Bandit),
                    _ => label == LabelKind::Binary,
                };
                if !ok {
                    return Err(Error::Config(format!(
                        "oracle {o:?} does not produce labels for learner {}",
                        self.learner.name()
                    )));
                }
            }
        }
        if let LearnerSpec::NaiveThreshold { .. } = self.learner {
            if self.dim != 1 {
                return bad("naive_threshold needs dim = 1");
            }
        }
        let corrupts = !self.corruption.flip_times.is_empty() || self.corruption.random > 0;
        if corrupts && label != LabelKind::Binary {
            return bad("corruption applies to binary labels only");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    Binary,
    Class,
    Real,
    Bandit,
}

pub fn label_kind(spec: &LearnerSpec) -> LabelKind {
    match spec {
        LearnerSpec::KClass { .. } => LabelKind::Class,
        LearnerSpec::Piecewise { .. } => LabelKind::Real,
        LearnerSpec::Igw { .. } => LabelKind::Bandit,
        _ => LabelKind::Binary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
dim = 2
horizon = 100
seed = 3

[learner]
kind = "john_linear"

[adversary]
kind = "eps_ball"
eps = 0.1

[oracle]
kind = "linear"
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(c.delta, 0.05);
        assert_eq!(c.trials, 1);
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let s = BASIC.replace("eps = 0.1", "eps = 0.1\nepsilon = 0.2");
        assert!(matches!(ExperimentConfig::from_toml_str(&s), Err(Error::Config(_))));
        let s = format!("{BASIC}\nhorizn = 5\n");
        assert!(matches!(ExperimentConfig::from_toml_str(&s), Err(Error::Config(_))));
    }

    #[test]
    fn mismatched_oracle_is_rejected() {
        let s = BASIC.replace("kind = \"linear\"", "kind = \"k_class\"\nk = 3");
        assert!(matches!(ExperimentConfig::from_toml_str(&s), Err(Error::Config(_))));
    }
}
