//! Experiment runner, traces, checks and bound evaluation.

pub mod bounds;
pub mod config;
pub mod decay;
pub mod disagreement;
pub mod runner;
pub mod seeds;
pub mod sweep;
pub mod trace;
pub mod verify;

pub use bounds::{BoundKind, BoundReport};
pub use config::{ExperimentConfig, LabelKind, LearnerSpec, MonteCarloConfig, OutputConfig};
pub use decay::{decay_check, trace_decay, DecayReport, DecayViolation};
pub use disagreement::{disagreement_mass, MassEstimate};
pub use runner::{bound_report, build_learner, run_experiment, run_trial, AnyLearner, RunOutput, SeedReport, Summary};
pub use seeds::{derive_seed, splitmix64, Stream};
pub use sweep::{ls_slope, read_sweep_csv, sweep, SweepConfig, SweepCsvRow, SweepPoint, SweepResult};
pub use trace::{read_csv, CsvRow, RoundRecord, Trace, CSV_HEADER};
pub use verify::{exhaustive_min_pieces, run_verify, CheckResult, VerifyOptions, VerifyReport};
