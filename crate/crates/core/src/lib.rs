pub mod adversaries;
pub mod erm;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod learners;

pub use adversaries::{Adversary, AdversarySpec, LabelOracle, OracleSpec};
pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentConfig, RunOutput, Summary, Trace};
pub use learners::{Label, Learner, UpdateReport};
