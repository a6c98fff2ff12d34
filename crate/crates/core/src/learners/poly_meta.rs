//! Halfspaces over polynomial features, recentered only on meta-points.
//!
//! Every mistake parks `φ(x)` in the bucket of its label. The John center is
//! recomputed once a bucket holds `p` points; their average (the meta-point)
//! is reported, and its cut is already implied by the individual ones, which
//! are applied to the version space every round.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dot, expect_binary, sign, snapshot_of, JohnLinear, Label, Learner, PrunePolicy, UpdateReport};
use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_ball, JohnOptions};

/// Exponent vectors of all monomials of total degree `1..=degree` in `d` variables,
/// graded then lexicographic.
pub fn monomial_exponents(d: usize, degree: usize) -> Vec<Vec<u32>> {
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
    }
    let mut out = Vec::new();
    for total in 1..=degree as u32 {
        let mut cur = vec![0; d];
        rec(0, total, &mut cur, &mut out);
    }
    out
}

/// `(x^α)_α / √m`, which maps the unit ball into the unit ball.
pub fn monomial_features(x: &[f64], exps: &[Vec<u32>]) -> Vec<f64> {
    let scale = 1.0 / (exps.len() as f64).sqrt();
    exps.iter()
        .map(|e| e.iter().zip(x).map(|(&k, v)| v.powi(k as i32)).product::<f64>() * scale)
        .collect()
}

/// Bucket size `ceil(c · m · ℓ · ln(L ℓ T / δ))`, at least 1.
pub fn default_bucket_size(c: f64, m: usize, degree: usize, lipschitz: f64, horizon: u64, delta: f64) -> usize {
    let l = degree as f64;
    let log = (lipschitz * l * horizon as f64 / delta).ln().max(1.0);
    ((c * m as f64 * l * log).ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyMetaPoint {
    d: usize,
    degree: usize,
    exps: Vec<Vec<u32>>,
    lipschitz: f64,
    p: usize,
    bucket_pos: Vec<Vec<f64>>,
    bucket_neg: Vec<Vec<f64>>,
    inner: JohnLinear,
    mistakes: u64,
    last_meta_point: Option<(Vec<f64>, i8)>,
}

impl PolyMetaPoint {
    /// `lipschitz` is the declared constant of the feature map (probed, not trusted).
    pub fn new(d: usize, degree: usize, p: usize, lipschitz: f64) -> Result<Self> {
        Self::with_options(d, degree, p, lipschitz, JohnOptions::default(), PrunePolicy::default())
    }

    pub fn with_options(
        d: usize,
        degree: usize,
        p: usize,
        lipschitz: f64,
        opts: JohnOptions,
        prune: PrunePolicy,
    ) -> Result<Self> {
        if degree == 0 || p == 0 {
            return Err(Error::SpecViolation("degree and bucket size must be positive".into()));
        }
        let exps = monomial_exponents(d, degree);
        let m = exps.len();
        let out = Self {
            d,
            degree,
            exps,
            lipschitz,
            p,
            bucket_pos: Vec::new(),
            bucket_neg: Vec::new(),
            inner: JohnLinear::with_options(m, opts, prune),
            mistakes: 0,
            last_meta_point: None,
        };
        out.probe_lipschitz(2000, 0x5eed)?;
        Ok(out)
    }

    /// Checks `‖φ(x) - φ(x')‖ ≤ L ‖x - x'‖` on random nearby pairs in the ball.
    pub fn probe_lipschitz(&self, pairs: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..pairs {
            let x = sample_uniform_ball(self.d, &mut rng);
            let step: f64 = rng.gen_range(1e-4..0.5);
            let dir = sample_uniform_ball(self.d, &mut rng);
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            if dot(&y, &y) > 1.0 {
                continue;
            }
            let fx = self.features(&x);
            let fy = self.features(&y);
            let num: f64 = fx.iter().zip(&fy).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let den: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if den > 0.0 && num > self.lipschitz * den * (1.0 + 1e-9) {
                return Err(Error::SpecViolation(format!(
                    "feature map ratio {:.4} exceeds declared L = {}",
                    num / den,
                    self.lipschitz
                )));
            }
        }
        Ok(())
    }

    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        monomial_features(x, &self.exps)
    }

    pub fn feature_dim(&self) -> usize {
        self.exps.len()
    }

    pub fn bucket_size(&self) -> usize {
        self.p
    }

    pub fn bucket_lens(&self) -> (usize, usize) {
        (self.bucket_pos.len(), self.bucket_neg.len())
    }

    pub fn last_meta_point(&self) -> Option<&(Vec<f64>, i8)> {
        self.last_meta_point.as_ref()
    }

    pub fn inner(&self) -> &JohnLinear {
        &self.inner
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

impl Learner for PolyMetaPoint {
    fn name(&self) -> &'static str {
        "poly_meta_point"
    }

    fn input_dim(&self) -> usize {
        self.d
    }

    fn predict(&self, x: &[f64]) -> Label {
        Label::Binary(sign(dot(self.inner.weights(), &self.features(x))))
    }

    fn update(&mut self, x: &[f64], y: Label) -> Result<UpdateReport> {
        let y = expect_binary(y);
        let phi = self.features(x);
        let yhat = sign(dot(self.inner.weights(), &phi));
        let mistake = yhat != y;
        self.inner.apply_cut(&phi, y)?;
        let mut report = UpdateReport::new(Label::Binary(yhat), mistake);
        if mistake {
            self.mistakes += 1;
            let bucket = if y > 0 {
                &mut self.bucket_pos
            } else {
                &mut self.bucket_neg
            };
            bucket.push(phi);
            if bucket.len() >= self.p {
                let m = bucket.len() as f64;
                let mut meta = vec![0.0; self.exps.len()];
                for v in bucket.iter() {
                    for (a, b) in meta.iter_mut().zip(v) {
                        *a += b / m;
                    }
                }
                self.last_meta_point = Some((meta, y));
                self.inner.recompute()?;
                self.bucket_pos.clear();
                self.bucket_neg.clear();
                report.recomputed = true;
            }
        }
        report.log_volume = self.inner.ellipsoid().log_volume();
        Ok(report)
    }

    fn log_volume(&self) -> Option<f64> {
        self.inner.log_volume()
    }

    fn mistakes(&self) -> u64 {
        self.mistakes
    }

    fn snapshot(&self) -> serde_json::Value {
        snapshot_of(self.name(), self)
    }
}
