//! The T-round protocol loop and per-run summaries.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bounds::{self, BoundKind, BoundReport};
use super::config::{ExperimentConfig, LearnerSpec};
use super::decay::{trace_decay, DecayReport};
use super::disagreement::{disagreement_mass, MassEstimate};
use super::seeds::{derive_seed, Stream};
use super::trace::{RoundRecord, Trace};
use crate::adversaries::{Adversary, AdversarySpec, CorruptionSchedule, LabelOracle};
use crate::error::{Error, Result};
use crate::learners::poly_meta::{default_bucket_size, monomial_exponents};
use crate::learners::{
    AffineLift, CoordinateFeature, IgwBandit, JohnLinear, KClassLinear, Label, Learner, NaiveThreshold, Perceptron,
    PiecewiseRegressor, PolyMetaPoint,
};

/// Decay factor and slack used for every summary's decay verdict.
pub const DECAY_C: f64 = 8.0 / 9.0;
pub const DECAY_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedReport {
    pub master: u64,
    pub trial: u64,
    pub context: u64,
    pub oracle: u64,
    pub adversary: u64,
    pub learner: u64,
    pub corruption: u64,
    pub policy: u64,
    pub monte_carlo: u64,
}

impl SeedReport {
    pub fn derive(master: u64, trial: u64) -> Self {
        let s = |k| derive_seed(master, trial, k);
        Self {
            master,
            trial,
            context: s(Stream::Context),
            oracle: s(Stream::Oracle),
            adversary: s(Stream::Adversary),
            learner: s(Stream::Learner),
            corruption: s(Stream::Corruption),
            policy: s(Stream::Policy),
            monte_carlo: s(Stream::MonteCarlo),
        }
    }
}

/// Learner-specific counters gathered from the update reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnerStats {
    /// Total binary error updates (K-class reductions).
    pub binary_updates: u64,
    pub erm_calls: u64,
    pub max_erm_input: usize,
    /// Mistakes on rounds no known piece explained.
    pub unknown_piece_mistakes: u64,
    pub pieces_known: Option<usize>,
    pub recomputes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditStats {
    pub cumulative_regret: f64,
    /// Prediction errors summed over the per-action regressors.
    pub prediction_errors: u64,
    pub min_probability: f64,
    /// Largest `|Σ p - 1|` seen.
    pub max_sum_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementPoint {
    pub mistakes: u64,
    pub t: u64,
    pub mass: MassEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub seeds: SeedReport,
    pub learner: String,
    pub rounds: u64,
    pub total_mistakes: u64,
    pub sigma: Option<f64>,
    pub sigma_dir: Option<f64>,
    pub n_err: u64,
    pub bounds: Vec<BoundReport>,
    pub decay: DecayReport,
    /// Whether the true parameter survived every cut; `None` when not applicable.
    pub truth_in_version_space: Option<bool>,
    pub stats: LearnerStats,
    pub bandit: Option<BanditStats>,
    pub disagreement: Vec<DisagreementPoint>,
}

/// A run's full output.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    pub summary: Summary,
    /// Final learner state (the bandit dumps every regressor).
    pub snapshot: serde_json::Value,
}

/// Concrete learners, so the runner can reach their internals.
#[derive(Debug, Clone)]
pub enum AnyLearner {
    John(JohnLinear),
    Affine(AffineLift),
    Coordinate(CoordinateFeature),
    Poly(PolyMetaPoint),
    Perceptron(Perceptron),
    Naive(NaiveThreshold),
    KClass(KClassLinear),
    Piecewise(PiecewiseRegressor),
}

impl AnyLearner {
    pub fn as_dyn(&self) -> &dyn Learner {
        match self {
            AnyLearner::John(l) => l,
            AnyLearner::Affine(l) => l,
            AnyLearner::Coordinate(l) => l,
            AnyLearner::Poly(l) => l,
            AnyLearner::Perceptron(l) => l,
            AnyLearner::Naive(l) => l,
            AnyLearner::KClass(l) => l,
            AnyLearner::Piecewise(l) => l,
        }
    }

    pub fn as_dyn_mut(&mut self) -> &mut dyn Learner {
        match self {
            AnyLearner::John(l) => l,
            AnyLearner::Affine(l) => l,
            AnyLearner::Coordinate(l) => l,
            AnyLearner::Poly(l) => l,
            AnyLearner::Perceptron(l) => l,
            AnyLearner::Naive(l) => l,
            AnyLearner::KClass(l) => l,
            AnyLearner::Piecewise(l) => l,
        }
    }

    /// The underlying cutting-plane learner, if any.
    pub fn cutting_plane(&self) -> Option<&JohnLinear> {
        match self {
            AnyLearner::John(l) => Some(l),
            AnyLearner::Affine(l) => Some(l.inner()),
            AnyLearner::Coordinate(l) => Some(l.inner()),
            AnyLearner::Poly(l) => Some(l.inner()),
            _ => None,
        }
    }
}

/// Builds the configured learner. The bandit is built by the runner itself.
pub fn build_learner(cfg: &ExperimentConfig, learner_seed: u64) -> Result<AnyLearner> {
    let (d, opts, prune) = (cfg.dim, cfg.solver, cfg.prune);
    Ok(match &cfg.learner {
        LearnerSpec::JohnLinear => AnyLearner::John(JohnLinear::with_options(d, opts, prune)),
        LearnerSpec::AffineLift => AnyLearner::Affine(AffineLift::with_options(d, learner_seed, opts, prune)),
        LearnerSpec::CoordinateFeature { maps, alpha } => {
            if maps.len() != d {
                return Err(Error::Config(format!("{} feature maps for dim = {d}", maps.len())));
            }
            let l = CoordinateFeature::with_options(maps.clone(), *alpha, opts, prune)
                .map_err(|e| Error::Config(e.to_string()))?;
            AnyLearner::Coordinate(l)
        }
        LearnerSpec::PolyMetaPoint {
            degree,
            bucket_size,
            bucket_c,
            lipschitz,
        } => {
            let lip = lipschitz.unwrap_or(*degree as f64);
            let m = monomial_exponents(d, *degree).len();
            let p =
                bucket_size.unwrap_or_else(|| default_bucket_size(*bucket_c, m, *degree, lip, cfg.horizon, cfg.delta));
            let l = PolyMetaPoint::with_options(d, *degree, p, lip, opts, prune)
                .map_err(|e| Error::Config(e.to_string()))?;
            AnyLearner::Poly(l)
        }
        LearnerSpec::Perceptron { bias } => AnyLearner::Perceptron(Perceptron::new(d, *bias)),
        LearnerSpec::NaiveThreshold { eta } => {
            if !(*eta > 0.0) {
                return Err(Error::Config(format!("naive_threshold: η = {eta} must be positive")));
            }
            AnyLearner::Naive(NaiveThreshold::new(*eta))
        }
        LearnerSpec::KClass { k, dormant } => {
            if *k < 2 {
                return Err(Error::Config("k_class needs k ≥ 2".into()));
            }
            AnyLearner::KClass(KClassLinear::with_options(*k, d, *dormant, opts, prune))
        }
        LearnerSpec::Piecewise { k } => {
            if *k == 0 {
                return Err(Error::Config("piecewise_regression needs k ≥ 1".into()));
            }
            AnyLearner::Piecewise(PiecewiseRegressor::with_options(
                *k,
                d,
                crate::erm::DEFAULT_FIT_TOL,
                opts,
                prune,
            ))
        }
        LearnerSpec::Igw { .. } => return Err(Error::Config("igw is run by the bandit loop".into())),
    })
}

/// One trial with seeds derived from `(cfg.seed, 0)`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    run_trial(cfg, 0)
}

pub fn run_trial(cfg: &ExperimentConfig, trial: u64) -> Result<RunOutput> {
    cfg.validate()?;
    let seeds = SeedReport::derive(cfg.seed, trial);
    if let LearnerSpec::Igw { .. } = cfg.learner {
        return run_bandit(cfg, seeds);
    }
    let mut learner = build_learner(cfg, seeds.learner)?;
    let mut adversary = Adversary::new(cfg.adversary.clone(), cfg.dim, seeds.adversary)?;
    let mut oracle_rng = ChaCha8Rng::seed_from_u64(seeds.oracle);
    let oracle = match &cfg.oracle {
        Some(spec) => Some(LabelOracle::build(spec, cfg.dim, &mut oracle_rng)?),
        None => None,
    };
    let mut corr_rng = ChaCha8Rng::seed_from_u64(seeds.corruption);
    let corruption = CorruptionSchedule::resolve(&cfg.corruption, cfg.horizon, &mut corr_rng);
    let mut ctx_rng = ChaCha8Rng::seed_from_u64(seeds.context);
    let mut mc_rng = ChaCha8Rng::seed_from_u64(seeds.monte_carlo);

    let keep_x = cfg.dim <= cfg.output.keep_contexts_up_to_dim;
    let mut trace = Trace {
        initial_log_volume: learner.as_dyn().log_volume().unwrap_or(f64::NAN),
        rounds: Vec::with_capacity(cfg.horizon.min(1 << 20) as usize),
    };
    let mut stats = LearnerStats::default();
    let mut disagreement = Vec::new();
    let mut cum = 0u64;
    let mut probe = |learner: &AnyLearner, cum: u64, t: u64, out: &mut Vec<DisagreementPoint>| -> Result<()> {
        if cfg.mc.disagreement_samples == 0 || cum > cfg.mc.disagreement_max_mistakes {
            return Ok(());
        }
        if let Some(j) = learner.cutting_plane() {
            let mass = disagreement_mass(j.version_space(), cfg.mc.disagreement_samples, cfg.mc.tau, &mut mc_rng)?;
            out.push(DisagreementPoint { mistakes: cum, t, mass });
        }
        Ok(())
    };
    probe(&learner, 0, 0, &mut disagreement)?;

    for t in 1..=cfg.horizon {
        let start = cfg.output.record_wallclock.then(Instant::now);
        let boundary = learner.as_dyn().boundary();
        let draw = adversary.next_context(boundary.as_ref(), &mut ctx_rng);
        let clean = match draw.forced_label {
            Some(y) => y,
            None => oracle.as_ref().expect("validated: oracle present").label(&draw.x),
        };
        let y = corruption.corrupt(t, clean);
        let rep = learner.as_dyn_mut().update(&draw.x, y).map_err(|e| e.at_round(t))?;
        adversary.observe(&draw.x, y);
        if rep.mistake {
            cum += 1;
        }
        stats.binary_updates += rep.binary_updates as u64;
        if let Some(m) = rep.erm_input {
            stats.erm_calls += 1;
            stats.max_erm_input = stats.max_erm_input.max(m);
        }
        if rep.unknown_piece && rep.mistake {
            stats.unknown_piece_mistakes += 1;
        }
        stats.recomputes += rep.recomputed as u64;
        let wallclock_us = start.map_or(0, |s| s.elapsed().as_micros() as u64);
        trace.rounds.push(RoundRecord {
            t,
            x: keep_x.then(|| draw.x.clone()),
            y: y.as_f64(),
            yhat: rep.prediction.as_f64(),
            mistake: rep.mistake,
            cum_mistakes: cum,
            log_volume: rep.log_volume,
            recompute: rep.recomputed,
            wallclock_us,
            binary_updates: rep.binary_updates,
            erm_input: rep.erm_input,
            unknown_piece: rep.unknown_piece,
            regret: 0.0,
        });
        if rep.mistake {
            probe(&learner, cum, t, &mut disagreement)?;
        }
    }
    if let AnyLearner::Piecewise(p) = &learner {
        stats.pieces_known = Some(p.known());
    }

    let sigma = adversary.declared_sigma();
    let sigma_dir = match (&oracle, adversary.direction()) {
        (Some(o), Some(_)) => o.normal().and_then(|w| adversary.sigma_dir(w)),
        _ => None,
    };
    let truth_in_version_space = match (&learner, &oracle) {
        (_, Some(o)) if corruption.is_empty() => truth_check(&learner, o),
        _ => None,
    };
    let decay = trace_decay(&trace, DECAY_C, DECAY_SLACK);
    let mut summary = Summary {
        config: cfg.clone(),
        seeds,
        learner: learner.as_dyn().name().to_string(),
        rounds: cfg.horizon,
        total_mistakes: cum,
        sigma,
        sigma_dir,
        n_err: corruption.n_err(),
        bounds: Vec::new(),
        decay,
        truth_in_version_space,
        stats,
        bandit: None,
        disagreement,
    };
    summary.bounds = bound_report(&summary);
    Ok(RunOutput {
        trace,
        summary,
        snapshot: learner.as_dyn().snapshot(),
    })
}

/// Checks the oracle's parameter against the final version space, where the
/// learner's parameter space matches the oracle.
fn truth_check(learner: &AnyLearner, oracle: &LabelOracle) -> Option<bool> {
    let matches = matches!(
        (learner, oracle),
        (AnyLearner::John(_), LabelOracle::Linear { .. })
            | (AnyLearner::Affine(_), LabelOracle::Affine { .. })
            | (AnyLearner::Coordinate(_), LabelOracle::Feature { .. })
            | (AnyLearner::Poly(_), LabelOracle::Polynomial { .. })
    );
    if !matches {
        return None;
    }
    let j = learner.cutting_plane()?;
    let w = oracle.lifted_parameter()?;
    // The version space lives in [-1, 1]^n; rescale the truth into it.
    let top = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let w: Vec<f64> = w.iter().map(|v| v / top.max(1.0)).collect();
    Some(j.is_consistent(&w, 1e-9))
}

fn run_bandit(cfg: &ExperimentConfig, seeds: SeedReport) -> Result<RunOutput> {
    let LearnerSpec::Igw { actions, k, gamma, mu } = &cfg.learner else {
        unreachable!("caller checked the learner kind")
    };
    if *actions == 0 || *k == 0 {
        return Err(Error::Config("igw needs at least one action and one piece".into()));
    }
    if let Some(m) = mu {
        if !(*m > 0.0) {
            return Err(Error::Config(format!("igw: μ = {m} must be positive")));
        }
    }
    let mut bandit = IgwBandit::new(*actions, *k, cfg.dim, *gamma, *mu);
    let mut adversary = Adversary::new(cfg.adversary.clone(), cfg.dim, seeds.adversary)?;
    let mut oracle_rng = ChaCha8Rng::seed_from_u64(seeds.oracle);
    let spec = cfg.oracle.as_ref().expect("validated: oracle present");
    let losses = (0..*actions)
        .map(|_| LabelOracle::build(spec, cfg.dim, &mut oracle_rng))
        .collect::<Result<Vec<_>>>()?;
    let mut ctx_rng = ChaCha8Rng::seed_from_u64(seeds.context);
    let mut policy_rng = ChaCha8Rng::seed_from_u64(seeds.policy);
    let keep_x = cfg.dim <= cfg.output.keep_contexts_up_to_dim;

    let mut trace = Trace {
        initial_log_volume: f64::NAN,
        rounds: Vec::with_capacity(cfg.horizon.min(1 << 20) as usize),
    };
    let mut stats = BanditStats {
        cumulative_regret: 0.0,
        prediction_errors: 0,
        min_probability: 1.0,
        max_sum_deviation: 0.0,
    };
    let mut learner_stats = LearnerStats::default();
    let mut cum = 0u64;
    for t in 1..=cfg.horizon {
        let start = cfg.output.record_wallclock.then(Instant::now);
        let draw = adversary.next_context(None, &mut ctx_rng);
        let x = draw.x;
        let all: Vec<f64> = losses.iter().map(|o| o.label(&x).as_f64()).collect();
        let best = all.iter().copied().fold(f64::INFINITY, f64::min);
        let dec = bandit.decide(&x, &mut policy_rng).map_err(|e| e.at_round(t))?;
        let sum: f64 = dec.probs.iter().sum();
        stats.max_sum_deviation = stats.max_sum_deviation.max((sum - 1.0).abs());
        stats.min_probability = dec.probs.iter().copied().fold(stats.min_probability, f64::min);
        let loss = all[dec.action];
        let regret = loss - best;
        let rep = bandit.reward(&x, dec.action, loss).map_err(|e| e.at_round(t))?;
        adversary.observe(&x, Label::Real(loss));
        stats.cumulative_regret += regret;
        let mistake = regret > 1e-12 * best.abs().max(1.0);
        cum += mistake as u64;
        if let Some(m) = rep.erm_input {
            learner_stats.erm_calls += 1;
            learner_stats.max_erm_input = learner_stats.max_erm_input.max(m);
        }
        if rep.unknown_piece && rep.mistake {
            learner_stats.unknown_piece_mistakes += 1;
        }
        learner_stats.binary_updates += rep.binary_updates as u64;
        trace.rounds.push(RoundRecord {
            t,
            x: keep_x.then(|| x.clone()),
            y: loss,
            yhat: dec.predictions[dec.action],
            mistake,
            cum_mistakes: cum,
            log_volume: f64::NAN,
            recompute: rep.recomputed,
            wallclock_us: start.map_or(0, |s| s.elapsed().as_micros() as u64),
            binary_updates: rep.binary_updates,
            erm_input: rep.erm_input,
            unknown_piece: rep.unknown_piece,
            regret,
        });
    }
    stats.prediction_errors = (0..*actions).map(|a| bandit.regressor(a).mistakes()).sum();
    let decay = trace_decay(&trace, DECAY_C, DECAY_SLACK);
    let mut summary = Summary {
        config: cfg.clone(),
        seeds,
        learner: "igw".into(),
        rounds: cfg.horizon,
        total_mistakes: cum,
        sigma: adversary.declared_sigma(),
        sigma_dir: None,
        n_err: 1,
        bounds: Vec::new(),
        decay,
        truth_in_version_space: None,
        stats: learner_stats,
        bandit: Some(stats),
        disagreement: Vec::new(),
    };
    summary.bounds = bound_report(&summary);
    Ok(RunOutput {
        trace,
        summary,
        snapshot: serde_json::to_value(&bandit).expect("bandit serializes"),
    })
}

/// Every bound that applies to the run, evaluated with its parameters.
pub fn bound_report(s: &Summary) -> Vec<BoundReport> {
    let cfg = &s.config;
    let (d, t, delta) = (cfg.dim, cfg.horizon, cfg.delta);
    let observed = s.total_mistakes as f64;
    let realizable = s.n_err == 1;
    let mut out = Vec::new();
    let base = |sigma: f64| vec![("d", d as f64), ("T", t as f64), ("sigma", sigma), ("delta", delta)];
    match (&cfg.learner, s.sigma) {
        (LearnerSpec::JohnLinear, Some(sigma)) if realizable => {
            let v = bounds::warmup_bound(d, t, sigma, delta);
            out.push(BoundReport::new("warmup", BoundKind::Upper, v, observed, &base(sigma)));
        }
        (LearnerSpec::AffineLift, Some(sigma)) if realizable => {
            let mut p = base(sigma);
            p.push(("sigma_lifted", bounds::affine_sigma(d, sigma)));
            let v = bounds::affine_bound(d, t, sigma, delta);
            out.push(BoundReport::new("affine_lift", BoundKind::Upper, v, observed, &p));
            let v = bounds::affine_corollary_bound(d, t, sigma, delta);
            out.push(BoundReport::new(
                "affine_closed_form",
                BoundKind::Upper,
                v,
                observed,
                &base(sigma),
            ));
        }
        (LearnerSpec::CoordinateFeature { alpha, .. }, Some(sigma)) if realizable => {
            let mut p = base(sigma);
            p.push(("alpha", *alpha));
            let v = bounds::coordinate_bound(d, *alpha, t, sigma, delta);
            out.push(BoundReport::new(
                "coordinate_feature",
                BoundKind::Upper,
                v,
                observed,
                &p,
            ));
        }
        (LearnerSpec::PolyMetaPoint { degree, lipschitz, .. }, Some(sigma)) if realizable => {
            let m = monomial_exponents(d, *degree).len();
            let lip = lipschitz.unwrap_or(*degree as f64);
            let mut p = base(sigma);
            p.extend([("m", m as f64), ("degree", *degree as f64), ("L", lip)]);
            let v = bounds::polynomial_rate(m, d, *degree, lip, t, sigma, delta);
            out.push(BoundReport::new("polynomial_rate", BoundKind::Order, v, observed, &p));
        }
        (LearnerSpec::Perceptron { .. }, _) => {
            if let Some(sd) = s.sigma_dir {
                let v = bounds::perceptron_bound(t, sd, s.n_err);
                let p = [("T", t as f64), ("sigma_dir", sd), ("n_err", s.n_err as f64)];
                out.push(BoundReport::new("perceptron_rate", BoundKind::Order, v, observed, &p));
            }
        }
        (LearnerSpec::NaiveThreshold { eta }, Some(sigma)) => {
            if let AdversarySpec::NaivePunisher { .. } = cfg.adversary {
                let v = bounds::naive_lower_bound(sigma, *eta);
                let p = [("sigma", sigma), ("eta", *eta)];
                out.push(BoundReport::new("naive_lower", BoundKind::Lower, v, observed, &p));
            }
        }
        (LearnerSpec::KClass { k, .. }, Some(sigma)) => {
            let mut p = base(sigma);
            p.push(("K", *k as f64));
            let v = bounds::k_class_bound(*k, d, t, sigma, delta);
            out.push(BoundReport::new("k_class", BoundKind::Upper, v, observed, &p));
        }
        (LearnerSpec::Piecewise { k }, Some(sigma)) => {
            let mut p = base(sigma);
            p.extend([("K", *k as f64), ("ell", d as f64)]);
            let v = bounds::piecewise_bound(*k, d, d, t, sigma, delta);
            out.push(BoundReport::new("piecewise", BoundKind::Upper, v, observed, &p));
            let v = bounds::undiscovered_bound(*k, d);
            let u = s.stats.unknown_piece_mistakes as f64;
            out.push(BoundReport::new(
                "undiscovered_pieces",
                BoundKind::Upper,
                v,
                u,
                &[("K", *k as f64), ("ell", d as f64)],
            ));
        }
        (LearnerSpec::Igw { actions, k, .. }, Some(sigma)) => {
            if let Some(b) = &s.bandit {
                let mut p = base(sigma);
                p.extend([("A", *actions as f64), ("K", *k as f64), ("ell", d as f64)]);
                let v = bounds::igw_error_bound(*actions, *k, d, d, t, sigma, delta);
                out.push(BoundReport::new(
                    "igw_prediction_errors",
                    BoundKind::Upper,
                    v,
                    b.prediction_errors as f64,
                    &p,
                ));
            }
        }
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(s: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(s).unwrap()
    }

    const UNIFORM: &str = r#"
dim = 2
horizon = 300
seed = 7
[learner]
kind = "john_linear"
[adversary]
kind = "uniform"
[oracle]
kind = "linear"
"#;

    #[test]
    fn zero_horizon_is_empty() {
        let c = cfg(&UNIFORM.replace("horizon = 300", "horizon = 0"));
        let out = run_experiment(&c).unwrap();
        assert!(out.trace.is_empty());
        assert_eq!(out.summary.total_mistakes, 0);
    }

    #[test]
    fn uniform_run_respects_warmup_bound_and_decays() {
        let out = run_experiment(&cfg(UNIFORM)).unwrap();
        let s = &out.summary;
        let flags = out.trace.rounds.iter().filter(|r| r.mistake).count() as u64;
        assert_eq!(s.total_mistakes, flags);
        assert!(s.bounds[0].satisfied, "{:?}", s.bounds);
        assert!(s.decay.applicable && s.decay.passed(), "{:?}", s.decay);
        assert_eq!(s.truth_in_version_space, Some(true));
    }

    #[test]
    fn same_seed_same_bytes() {
        let c = cfg(UNIFORM);
        let a = run_experiment(&c).unwrap().trace.to_csv_string();
        let b = run_experiment(&c).unwrap().trace.to_csv_string();
        assert_eq!(a, b);
    }

    #[test]
    fn contradictory_labels_fail_with_round() {
        let s = format!("{UNIFORM}\n[corruption]\nrandom = 60\n");
        let e = run_experiment(&cfg(&s)).unwrap_err();
        assert!(matches!(e, Error::AtRound { .. }), "{e}");
        assert!(e.is_runtime());
    }

    #[test]
    fn bandit_probabilities_are_valid() {
        let s = r#"
dim = 2
horizon = 200
[learner]
kind = "igw"
actions = 3
k = 2
gamma = { kind = "sqrt", gamma0 = 1.0 }
[adversary]
kind = "uniform"
[oracle]
kind = "piecewise"
k = 2
"#;
        let out = run_experiment(&cfg(s)).unwrap();
        let b = out.summary.bandit.unwrap();
        assert!(b.min_probability >= 0.0 && b.max_sum_deviation < 1e-12);
        assert_eq!(out.trace.len(), 200);
    }
}
