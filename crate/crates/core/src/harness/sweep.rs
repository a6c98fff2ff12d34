//! Parameter and horizon sweeps over independent trials.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::{run_trial, RunOutput};
use crate::error::{Error, Result};

/// A sweep file: a base experiment, the horizons to run, and optionally one
/// parameter (addressed by a dotted path into the base) to vary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub horizons: Vec<u64>,
    /// Overrides `base.trials`.
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub param: Option<SweepParam>,
    pub base: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParam {
    /// For example `adversary.sigma`.
    pub path: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// The swept parameter's value, if any.
    pub value: Option<toml::Value>,
    pub sigma: Option<f64>,
    pub horizon: u64,
    pub mistakes: Vec<u64>,
    pub mean_mistakes: f64,
    pub std_err: f64,
    /// Mean cumulative bandit regret (0 for classification runs).
    pub mean_regret: f64,
    /// Trials whose gated bounds all held.
    pub bounds_held: u64,
    pub decay_passed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub trials: u64,
    pub points: Vec<SweepPoint>,
    /// Per parameter value: slope of mean mistakes against `ln T`.
    pub slope_vs_log_t: Vec<Option<f64>>,
    /// Per parameter value: slope of `ln(mean mistakes)` against `ln T`.
    pub loglog_slope_vs_t: Vec<Option<f64>>,
    /// Per horizon: slope of mean mistakes against `ln(1/σ)`.
    pub slope_vs_log_inv_sigma: Vec<(u64, Option<f64>)>,
}

impl SweepConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.horizons.is_empty() {
            return Err(Error::Config("sweep needs at least one horizon".into()));
        }
        for c in cfg.expand()? {
            c.validate()?;
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    /// One config per (value, horizon), values outermost.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        let bases = match &self.param {
            None => vec![self.base.clone()],
            Some(p) => p
                .values
                .iter()
                .map(|v| set_path(&self.base, &p.path, v.clone()))
                .collect::<Result<_>>()?,
        };
        let mut out = Vec::new();
        for b in bases {
            for &t in &self.horizons {
                let mut c = b.clone();
                c.horizon = t;
                if let Some(n) = self.trials {
                    c.trials = n;
                }
                out.push(c);
            }
        }
        Ok(out)
    }
}

/// Replaces the value at a dotted path of the config's TOML form.
pub fn set_path(cfg: &ExperimentConfig, path: &str, value: toml::Value) -> Result<ExperimentConfig> {
    let mut root = toml::Value::try_from(cfg).map_err(|e| Error::Config(e.to_string()))?;
    let mut node = &mut root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{path}`: `{key}` is not inside a table")))?;
        if i + 1 == keys.len() {
            table.insert(key.to_string(), value.clone());
            break;
        }
        node = table
            .get_mut(*key)
            .ok_or_else(|| Error::Config(format!("`{path}`: no key `{key}`")))?;
    }
    let c: ExperimentConfig = root
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    c.validate()?;
    Ok(c)
}

/// Least-squares slope of `ys` against `xs`; `None` with fewer than two distinct `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Runs every (config, trial) pair in parallel; results come back ordered by
/// config, then trial.
pub fn run_all(configs: &[ExperimentConfig]) -> Result<Vec<Vec<RunOutput>>> {
    let jobs: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.trials).map(move |t| (i, t)))
        .collect();
    let outs: Vec<Result<RunOutput>> = jobs.par_iter().map(|&(i, t)| run_trial(&configs[i], t)).collect();
    let mut grouped: Vec<Vec<RunOutput>> = configs.iter().map(|_| Vec::new()).collect();
    for ((i, _), o) in jobs.iter().zip(outs) {
        grouped[*i].push(o?);
    }
    Ok(grouped)
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    let configs = cfg.expand()?;
    let values: Vec<Option<toml::Value>> = match &cfg.param {
        None => vec![None],
        Some(p) => p.values.iter().cloned().map(Some).collect(),
    };
    let runs = run_all(&configs)?;
    let nh = cfg.horizons.len();
    let mut points = Vec::new();
    for (idx, outs) in runs.iter().enumerate() {
        let mistakes: Vec<u64> = outs.iter().map(|o| o.summary.total_mistakes).collect();
        let as_f: Vec<f64> = mistakes.iter().map(|&m| m as f64).collect();
        let (mean, se) = mean_and_se(&as_f);
        let regrets: Vec<f64> = outs
            .iter()
            .map(|o| o.summary.bandit.as_ref().map_or(0.0, |b| b.cumulative_regret))
            .collect();
        points.push(SweepPoint {
            value: values[idx / nh].clone(),
            sigma: outs.first().and_then(|o| o.summary.sigma),
            horizon: configs[idx].horizon,
            mistakes,
            mean_mistakes: mean,
            std_err: se,
            mean_regret: mean_and_se(&regrets).0,
            bounds_held: outs
                .iter()
                .filter(|o| o.summary.bounds.iter().all(|b| b.satisfied))
                .count() as u64,
            decay_passed: outs.iter().filter(|o| o.summary.decay.passed()).count() as u64,
        });
    }
    let mut slope_vs_log_t = Vec::new();
    let mut loglog_slope_vs_t = Vec::new();
    for chunk in points.chunks(nh) {
        let xs: Vec<f64> = chunk.iter().map(|p| (p.horizon as f64).ln()).collect();
        let ys: Vec<f64> = chunk.iter().map(|p| p.mean_mistakes).collect();
        slope_vs_log_t.push(ls_slope(&xs, &ys));
        let logy: Vec<f64> = ys.iter().map(|y| y.max(1e-12).ln()).collect();
        loglog_slope_vs_t.push(ls_slope(&xs, &logy));
    }
    let mut slope_vs_log_inv_sigma = Vec::new();
    for (j, &t) in cfg.horizons.iter().enumerate() {
        let col: Vec<&SweepPoint> = points.iter().skip(j).step_by(nh).collect();
        let pairs: Vec<(f64, f64)> = col
            .iter()
            .filter_map(|p| p.sigma.map(|s| ((1.0 / s).ln(), p.mean_mistakes)))
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        slope_vs_log_inv_sigma.push((t, ls_slope(&xs, &ys)));
    }
    Ok(SweepResult {
        trials: configs.first().map_or(0, |c| c.trials),
        points,
        slope_vs_log_t,
        loglog_slope_vs_t,
        slope_vs_log_inv_sigma,
    })
}

/// One line of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    /// The swept value in TOML syntax; empty when nothing is swept.
    pub value: String,
    /// `NaN` when the adversary declares no smoothness.
    pub sigma: f64,
    pub horizon: u64,
    pub mean_mistakes: f64,
    pub std_err: f64,
    pub mean_regret: f64,
}

pub const SWEEP_CSV_HEADER: [&str; 6] = ["value", "sigma", "horizon", "mean_mistakes", "std_err", "mean_regret"];

impl SweepResult {
    pub fn csv_rows(&self) -> impl Iterator<Item = SweepCsvRow> + '_ {
        self.points.iter().map(|p| SweepCsvRow {
            value: p.value.as_ref().map_or(String::new(), |v| v.to_string()),
            sigma: p.sigma.unwrap_or(f64::NAN),
            horizon: p.horizon,
            mean_mistakes: p.mean_mistakes,
            std_err: p.std_err,
            mean_regret: p.mean_regret,
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(SWEEP_CSV_HEADER).map_err(csv_err)?;
        for row in self.csv_rows() {
            out.serialize(row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<SweepCsvRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(SWEEP_CSV_HEADER.iter().copied()) {
        return Err(Error::Config(format!("unexpected sweep header {header:?}")));
    }
    rdr.deserialize().map(|row| row.map_err(csv_err)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Config(format!("malformed sweep table: {e}")),
    }
}
