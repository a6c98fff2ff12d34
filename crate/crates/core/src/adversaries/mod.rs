//! Smoothed context samplers, label oracles and corruption schedules.
//!
//! An [`Adversary`] draws contexts; for most kinds the label comes from a
//! separate [`LabelOracle`]. Kinds whose construction fixes the labels
//! (the lower-bound adversaries) return them as `forced_label`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_ball, sample_unit_sphere};
use crate::learners::{sign, Boundary, Label};

mod audit;
mod corruption;
mod oracle;

pub use audit::{smoothness_audit, AuditReport};
pub use corruption::{CorruptionSchedule, CorruptionSpec};
pub use oracle::{LabelOracle, OracleSpec};

/// Where noisy adversaries put the center of the noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum CenterPolicy {
    /// A random point of the learner's current boundary (random center if the
    /// learner has none).
    #[default]
    BoundaryTracker,
    Random,
    Fixed {
        point: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversarySpec {
    /// `x ~ Unif(B₁^d)`.
    Uniform,
    /// Center of norm `≤ 1 - ε` plus uniform noise on `ε B₁^d`; `σ = ε^d`.
    EpsBall {
        eps: f64,
        #[serde(default)]
        center: CenterPolicy,
    },
    /// Center of norm `≤ 1/2` plus `a ê`, `a ~ Unif[-r/2, r/2]`, `ê` drawn once.
    DirectionalLine {
        r: f64,
        #[serde(default)]
        center: CenterPolicy,
    },
    /// One-dimensional boundary-hugging adversary along `e₁`.
    #[serde(rename = "lower_bound_1d")]
    LowerBound1d {
        sigma: f64,
        #[serde(default = "default_lb_eps")]
        eps: f64,
    },
    /// Sweeps `[-1, 1]` left to right in steps of `2σ`, all labels `-1`.
    NaivePunisher { sigma: f64 },
    /// `d` uniform points with Rademacher labels, then uniform points labeled
    /// by a halfspace consistent with them.
    RademacherPrefix,
}

fn default_lb_eps() -> f64 {
    1.0 - (-1.0f64).exp()
}

/// One context draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub x: Vec<f64>,
    /// Label fixed by the adversary itself, overriding the oracle.
    pub forced_label: Option<Label>,
}

#[derive(Debug, Clone)]
pub struct Adversary {
    spec: AdversarySpec,
    dim: usize,
    t: u64,
    /// Labels and once-per-run draws; separate from the context stream.
    aux: ChaCha8Rng,
    direction: Option<Vec<f64>>,
    /// Disputed interval `[lo, hi]` of the one-dimensional adversaries.
    lo: f64,
    hi: f64,
    prefix: Vec<(Vec<f64>, i8)>,
    prefix_w: Option<Vec<f64>>,
}

impl Adversary {
    pub fn new(spec: AdversarySpec, dim: usize, aux_seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        let bad = |m: String| Err(Error::Config(m));
        match &spec {
            AdversarySpec::EpsBall { eps, center } => {
                if !(*eps > 0.0 && *eps <= 1.0) {
                    return bad(format!("eps_ball: ε = {eps} outside (0, 1]"));
                }
                check_center(center, dim)?;
            }
            AdversarySpec::DirectionalLine { r, center } => {
                if !(*r > 0.0 && *r <= 1.0) {
                    return bad(format!("directional_line: r = {r} outside (0, 1]"));
                }
                check_center(center, dim)?;
            }
            AdversarySpec::LowerBound1d { sigma, eps } => {
                if !(*sigma > 0.0 && *sigma <= 1.0) || !(*eps > 0.0 && *eps < 1.0) {
                    return bad(format!(
                        "lower_bound_1d: need σ ∈ (0, 1], ε ∈ (0, 1); got {sigma}, {eps}"
                    ));
                }
            }
            AdversarySpec::NaivePunisher { sigma } => {
                if !(*sigma > 0.0 && *sigma <= 0.25) {
                    return bad(format!("naive_punisher: σ = {sigma} outside (0, 1/4]"));
                }
            }
            AdversarySpec::Uniform | AdversarySpec::RademacherPrefix => {}
        }
        let mut aux = ChaCha8Rng::seed_from_u64(aux_seed);
        let direction =
            matches!(spec, AdversarySpec::DirectionalLine { .. }).then(|| sample_unit_sphere(dim, &mut aux));
        Ok(Self {
            spec,
            dim,
            t: 0,
            aux,
            direction,
            lo: -1.0,
            hi: 1.0,
            prefix: Vec::new(),
            prefix_w: None,
        })
    }

    pub fn spec(&self) -> &AdversarySpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared smoothness with respect to the uniform measure on the ball;
    /// `None` for the directional kind, which is not smooth in that sense.
    pub fn declared_sigma(&self) -> Option<f64> {
        match self.spec {
            AdversarySpec::Uniform | AdversarySpec::RademacherPrefix => Some(1.0),
            AdversarySpec::EpsBall { eps, .. } => Some(eps.powi(self.dim as i32)),
            AdversarySpec::DirectionalLine { .. } => None,
            AdversarySpec::LowerBound1d { sigma, .. } | AdversarySpec::NaivePunisher { sigma } => Some(sigma),
        }
    }

    /// The fixed noise direction `ê` of the directional kind.
    pub fn direction(&self) -> Option<&[f64]> {
        self.direction.as_deref()
    }

    /// Directional smoothness along `w`: the density of `⟨x, ŵ⟩` is at most
    /// `1 / (r |⟨ê, ŵ⟩|)`.
    pub fn sigma_dir(&self, w: &[f64]) -> Option<f64> {
        let AdversarySpec::DirectionalLine { r, .. } = self.spec else {
            return None;
        };
        let e = self.direction.as_ref()?;
        let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let c: f64 = e.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / n;
        Some(r * c.abs())
    }

    /// Disputed interval of the one-dimensional adversaries.
    pub fn disputed(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn next_context<R: Rng + ?Sized>(&mut self, boundary: Option<&Boundary>, rng: &mut R) -> Draw {
        self.t += 1;
        let d = self.dim;
        let free = |x: Vec<f64>| Draw { x, forced_label: None };
        match self.spec.clone() {
            AdversarySpec::Uniform => free(sample_uniform_ball(d, rng)),
            AdversarySpec::EpsBall { eps, center } => {
                let c = pick_center(&center, boundary, 1.0 - eps, d, rng);
                let e = sample_uniform_ball(d, rng);
                free(c.iter().zip(&e).map(|(a, b)| a + eps * b).collect())
            }
            AdversarySpec::DirectionalLine { r, center } => {
                let c = pick_center(&center, boundary, 0.5, d, rng);
                let a = rng.gen_range(-r / 2.0..=r / 2.0);
                let e = self.direction.as_ref().expect("direction drawn at construction");
                free(c.iter().zip(e).map(|(p, q)| p + a * q).collect())
            }
            AdversarySpec::LowerBound1d { sigma, eps } => {
                let s = self.lower_bound_point(sigma, eps, rng);
                let label = if s < self.lo {
                    -1
                } else if s > self.hi {
                    1
                } else if self.aux.gen::<bool>() {
                    1
                } else {
                    -1
                };
                let mut x = vec![0.0; d];
                x[0] = s;
                Draw {
                    x,
                    forced_label: Some(Label::Binary(label)),
                }
            }
            AdversarySpec::NaivePunisher { sigma } => {
                let t0 = (1.0 / sigma).floor() as u64;
                let s = if self.t <= t0 {
                    let a: f64 = rng.gen();
                    (-1.0 + 2.0 * sigma * (self.t - 1) as f64 + 2.0 * sigma * a).min(1.0)
                } else {
                    rng.gen_range(-1.0..=1.0)
                };
                let mut x = vec![0.0; d];
                x[0] = s;
                Draw {
                    x,
                    forced_label: Some(Label::Binary(-1)),
                }
            }
            AdversarySpec::RademacherPrefix => {
                if self.prefix_w.is_none() {
                    self.build_prefix(rng);
                }
                let t = self.t as usize;
                if t <= self.prefix.len() {
                    let (x, y) = self.prefix[t - 1].clone();
                    return Draw {
                        x,
                        forced_label: Some(Label::Binary(y)),
                    };
                }
                let x = sample_uniform_ball(d, rng);
                let w = self.prefix_w.as_ref().unwrap();
                let y = sign(x.iter().zip(w).map(|(a, b)| a * b).sum());
                Draw {
                    x,
                    forced_label: Some(Label::Binary(y)),
                }
            }
        }
    }

    /// Records the revealed label (needed by the history-dependent kinds).
    pub fn observe(&mut self, x: &[f64], y: Label) {
        if let AdversarySpec::LowerBound1d { .. } = self.spec {
            match y {
                Label::Binary(-1) => self.lo = self.lo.max(x[0]),
                Label::Binary(_) => self.hi = self.hi.min(x[0]),
                _ => {}
            }
        }
    }

    /// With probability `min(μ(D̃)/σ, 1)` a uniform point of the two end
    /// strips of the disputed interval; otherwise a uniform point outside the
    /// disputed interval, whose label is already determined.
    fn lower_bound_point<R: Rng + ?Sized>(&mut self, sigma: f64, eps: f64, rng: &mut R) -> f64 {
        let (lo, hi) = (self.lo, self.hi);
        let r = hi - lo;
        let strip = eps * r / 2.0;
        // uniform measure on [-1, 1] has density 1/2
        let mass = strip;
        let outside = 2.0 - r;
        let p = if outside <= 0.0 { 1.0 } else { (mass / sigma).min(1.0) };
        if rng.gen::<f64>() < p {
            let u = rng.gen_range(0.0..2.0 * strip);
            if u < strip {
                lo + u
            } else {
                hi - (u - strip)
            }
        } else {
            let u = rng.gen_range(0.0..outside);
            let left = lo + 1.0;
            if u < left {
                -1.0 + u
            } else {
                hi + (u - left)
            }
        }
    }

    fn build_prefix<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        use nalgebra::{DMatrix, DVector};
        let d = self.dim;
        loop {
            let pts: Vec<Vec<f64>> = (0..d).map(|_| sample_uniform_ball(d, rng)).collect();
            let ys: Vec<i8> = (0..d).map(|_| if self.aux.gen::<bool>() { 1 } else { -1 }).collect();
            let a = DMatrix::from_fn(d, d, |i, j| pts[i][j]);
            let b = DVector::from_fn(d, |i, _| ys[i] as f64);
            if let Some(w) = a.lu().solve(&b) {
                if w.iter().all(|v| v.is_finite()) {
                    self.prefix = pts.into_iter().zip(ys).collect();
                    self.prefix_w = Some(w.iter().copied().collect());
                    return;
                }
            }
        }
    }
}

fn check_center(center: &CenterPolicy, dim: usize) -> Result<()> {
    if let CenterPolicy::Fixed { point } = center {
        if point.len() != dim {
            return Err(Error::Config(format!(
                "fixed center has length {}, expected {dim}",
                point.len()
            )));
        }
    }
    Ok(())
}

/// A center of norm at most `radius`.
fn pick_center<R: Rng + ?Sized>(
    policy: &CenterPolicy,
    boundary: Option<&Boundary>,
    radius: f64,
    d: usize,
    rng: &mut R,
) -> Vec<f64> {
    let c = match (policy, boundary) {
        (CenterPolicy::Fixed { point }, _) => point.clone(),
        (CenterPolicy::BoundaryTracker, Some(b)) => {
            let n2: f64 = b.normal.iter().map(|v| v * v).sum();
            if n2 == 0.0 {
                sample_uniform_ball(d, rng).into_iter().map(|v| v * radius).collect()
            } else {
                // closest point of the hyperplane plus a random in-plane offset
                let u: Vec<f64> = sample_uniform_ball(d, rng).into_iter().map(|v| v * radius).collect();
                let along: f64 = u.iter().zip(&b.normal).map(|(p, q)| p * q).sum::<f64>() / n2;
                let foot = -b.offset / n2;
                u.iter().zip(&b.normal).map(|(p, q)| p - along * q + foot * q).collect()
            }
        }
        _ => sample_uniform_ball(d, rng).into_iter().map(|v| v * radius).collect(),
    };
    let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > radius {
        c.into_iter().map(|v| v * radius / n).collect()
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn norm(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn eps_ball_declares_eps_to_the_d() {
        let a = Adversary::new(
            AdversarySpec::EpsBall {
                eps: 0.1,
                center: CenterPolicy::default(),
            },
            3,
            0,
        )
        .unwrap();
        assert!((a.declared_sigma().unwrap() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn naive_punisher_first_point() {
        // σ = 0.01, t = 1, a = 0.5 gives -0.99; check via the formula on the drawn a
        let mut a = Adversary::new(AdversarySpec::NaivePunisher { sigma: 0.01 }, 1, 0).unwrap();
        let mut r = rng(5);
        let mut probe = r.clone();
        let u: f64 = probe.gen();
        let x = a.next_context(None, &mut r).x[0];
        assert!((x - (-1.0 + 0.02 * u)).abs() < 1e-15);
        assert!((-1.0 + 0.02 * 0.5f64 - (-0.99)).abs() < 1e-15);
        let x2 = a.next_context(None, &mut r).x[0];
        assert!((-0.98..=-0.96).contains(&x2));
    }

    #[test]
    fn samplers_stay_in_ball() {
        let b = Boundary {
            normal: vec![0.3, -1.0, 0.2],
            offset: 0.9,
        };
        for spec in [
            AdversarySpec::Uniform,
            AdversarySpec::EpsBall {
                eps: 0.2,
                center: CenterPolicy::BoundaryTracker,
            },
            AdversarySpec::DirectionalLine {
                r: 1.0,
                center: CenterPolicy::BoundaryTracker,
            },
            AdversarySpec::LowerBound1d { sigma: 0.01, eps: 0.5 },
            AdversarySpec::RademacherPrefix,
        ] {
            let mut a = Adversary::new(spec, 3, 1).unwrap();
            let mut r = rng(2);
            for _ in 0..2000 {
                let dr = a.next_context(Some(&b), &mut r);
                assert!(norm(&dr.x) <= 1.0 + 1e-12, "{:?}", a.spec());
                if let Some(y) = dr.forced_label {
                    a.observe(&dr.x, y);
                }
            }
        }
    }

    #[test]
    fn boundary_tracker_lands_near_the_boundary() {
        let b = Boundary {
            normal: vec![1.0, 1.0],
            offset: -0.2,
        };
        let spec = AdversarySpec::EpsBall {
            eps: 0.05,
            center: CenterPolicy::BoundaryTracker,
        };
        let mut a = Adversary::new(spec, 2, 0).unwrap();
        let mut r = rng(3);
        for _ in 0..500 {
            let x = a.next_context(Some(&b), &mut r).x;
            let dist = (x[0] + x[1] - 0.2).abs() / 2f64.sqrt();
            assert!(dist <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn directional_line_density_is_flat() {
        let spec = AdversarySpec::DirectionalLine {
            r: 0.5,
            center: CenterPolicy::Fixed { point: vec![0.1, 0.0] },
        };
        let mut a = Adversary::new(spec, 2, 9).unwrap();
        let e = a.direction().unwrap().to_vec();
        let mut r = rng(4);
        let n = 100_000;
        let bins = 20;
        let mut hist = vec![0usize; bins];
        let c0: f64 = 0.1 * e[0];
        for _ in 0..n {
            let x = a.next_context(None, &mut r).x;
            let s: f64 = x.iter().zip(&e).map(|(p, q)| p * q).sum::<f64>() - c0;
            let k = (((s + 0.25) / 0.5) * bins as f64).floor().clamp(0.0, bins as f64 - 1.0) as usize;
            hist[k] += 1;
        }
        // density of ⟨x, ê⟩ is 1/r = 2 on an interval of width r
        let width = 0.5 / bins as f64;
        for h in hist {
            let dens = h as f64 / n as f64 / width;
            assert!((dens - 2.0).abs() < 0.15, "{dens}");
        }
    }

    #[test]
    fn lower_bound_labels_are_realizable() {
        let mut a = Adversary::new(
            AdversarySpec::LowerBound1d {
                sigma: 0.01,
                eps: default_lb_eps(),
            },
            1,
            3,
        )
        .unwrap();
        let mut r = rng(8);
        let mut pts = vec![];
        for _ in 0..500 {
            let dr = a.next_context(None, &mut r);
            let y = dr.forced_label.unwrap();
            a.observe(&dr.x, y);
            pts.push((dr.x[0], y.binary().unwrap()));
        }
        let (lo, hi) = a.disputed();
        assert!(lo < hi);
        let c = 0.5 * (lo + hi);
        assert!(pts.iter().all(|(x, y)| sign(x - c) == *y));
    }

    #[test]
    fn rademacher_prefix_is_realizable() {
        let mut a = Adversary::new(AdversarySpec::RademacherPrefix, 3, 11).unwrap();
        let mut r = rng(1);
        let draws: Vec<_> = (0..200).map(|_| a.next_context(None, &mut r)).collect();
        let w = a.prefix_w.clone().unwrap();
        for d in draws {
            let y = d.forced_label.unwrap().binary().unwrap();
            assert_eq!(sign(d.x.iter().zip(&w).map(|(p, q)| p * q).sum()), y);
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let spec = AdversarySpec::EpsBall {
            eps: 0.3,
            center: CenterPolicy::Random,
        };
        let mut a = Adversary::new(spec.clone(), 2, 0).unwrap();
        let mut b = Adversary::new(spec, 2, 0).unwrap();
        let (mut r1, mut r2) = (rng(7), rng(7));
        for _ in 0..50 {
            assert_eq!(a.next_context(None, &mut r1), b.next_context(None, &mut r2));
        }
    }

    #[test]
    fn bad_parameters_are_config_errors() {
        assert!(matches!(
            Adversary::new(AdversarySpec::NaivePunisher { sigma: 0.5 }, 1, 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            Adversary::new(
                AdversarySpec::EpsBall {
                    eps: 0.0,
                    center: CenterPolicy::Random
                },
                2,
                0
            ),
            Err(Error::Config(_))
        ));
    }
}
