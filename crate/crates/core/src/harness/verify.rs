//! Invariant suite: analytic John ellipsoids, per-cut volume decay, the
//! sandwich property, and the ERM oracle against exhaustive search.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seeds::{derive_seed, Stream};
use crate::erm::{erm_partition, validate, ErmProblem, DEFAULT_FIT_TOL};
use crate::error::Result;
use crate::geometry::{
    john_ellipsoid, sample_uniform_ball, sample_unit_sphere, sandwich_check, Ellipsoid, HalfspacePolytope, JohnOptions,
    Provenance,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Solver settings under test; references are always solved with the defaults.
    pub solver: JohnOptions,
    pub tarasov_cases: usize,
    pub sandwich_polytopes: usize,
    pub sandwich_samples: usize,
    pub erm_instances: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            solver: JohnOptions::default(),
            tarasov_cases: 1000,
            sandwich_polytopes: 100,
            sandwich_samples: 10_000,
            erm_instances: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<22} {:>6} {:>8} {:>12}  {}\n",
            "check", "cases", "failures", "worst", "verdict"
        );
        for c in &self.checks {
            s += &format!(
                "{:<22} {:>6} {:>8} {:>12.4e}  {}\n",
                c.name,
                c.cases,
                c.failures,
                c.worst,
                if c.passed() { "PASS" } else { "FAIL" }
            );
        }
        s
    }
}

pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    Ok(VerifyReport {
        checks: vec![
            analytic_boxes(opts)?,
            anisotropic_boxes(opts)?,
            triangle(opts)?,
            tarasov_batch(opts)?,
            sandwich_batch(opts)?,
            erm_cross_check(opts)?,
        ],
    })
}

fn solve(p: &HalfspacePolytope, opts: &JohnOptions) -> Result<Ellipsoid> {
    Ok(john_ellipsoid(p, opts, None)?.ellipsoid)
}

/// `[-1, 1]^d` has the unit ball as its John ellipsoid, `d = 2..=6`.
pub fn analytic_boxes(opts: &VerifyOptions) -> Result<CheckResult> {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for d in 2..=6 {
        let e = solve(&HalfspacePolytope::unit_box(d), &opts.solver)?;
        let c = e.center().norm();
        let s = (e.shape() - DMatrix::identity(d, d)).norm();
        worst = worst.max(s).max(c);
        if c > 1e-6 || s > 1e-5 {
            failures += 1;
        }
    }
    Ok(CheckResult {
        name: "box_unit_ball".into(),
        cases: 5,
        failures,
        worst,
        detail: "center ≤ 1e-6, Frobenius shape error ≤ 1e-5, d = 2..6".into(),
    })
}

/// Axis-aligned boxes give the diagonal of their half-widths.
pub fn anisotropic_boxes(opts: &VerifyOptions) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 0, Stream::Context));
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let cases = 20;
    for i in 0..cases {
        let d = 2 + i % 5;
        let hw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..1.0)).collect();
        let e = solve(&HalfspacePolytope::axis_box(&hw), &opts.solver)?;
        let err = (e.shape() - DMatrix::from_diagonal(&DVector::from_vec(hw))).norm() + e.center().norm();
        worst = worst.max(err);
        if err > 1e-5 {
            failures += 1;
        }
    }
    Ok(CheckResult {
        name: "anisotropic_box".into(),
        cases,
        failures,
        worst,
        detail: "shape = diag(half-widths) within 1e-5".into(),
    })
}

/// Right triangle: centroid center, Steiner-inellipse area `π/(3√3) · 1/2`.
pub fn triangle(opts: &VerifyOptions) -> Result<CheckResult> {
    let p = HalfspacePolytope::from_halfspaces(
        2,
        [(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0), (vec![1.0, 1.0], 1.0)],
    );
    let e = solve(&p, &opts.solver)?;
    let area = std::f64::consts::PI / (3.0 * 3f64.sqrt()) * 0.5;
    let err = (e.center()[0] - 1.0 / 3.0).abs().max((e.center()[1] - 1.0 / 3.0).abs()) + (e.volume() - area).abs();
    Ok(CheckResult {
        name: "triangle".into(),
        cases: 1,
        failures: (err > 1e-5) as usize,
        worst: err,
        detail: "center (1/3, 1/3), area π/(6√3)".into(),
    })
}

/// Box plus `k` random cuts, each through a random point of the current John ellipsoid.
pub fn random_polytope<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<HalfspacePolytope> {
    let mut p = HalfspacePolytope::unit_box(d);
    for _ in 0..k {
        let e = solve(&p, &JohnOptions::default())?;
        let u = DVector::from_vec(sample_uniform_ball(d, rng));
        let through = e.shape() * u * 0.8 + e.center();
        let a = sample_unit_sphere(d, rng);
        let b: f64 = a.iter().zip(through.iter()).map(|(x, y)| x * y).sum();
        p.push_cut(a, b, Provenance::Other);
    }
    Ok(p)
}

/// Random polytopes cut through their John center: the new volume must be at
/// most `8/9 + 1e-3` of the old one, and every solve under test must agree
/// with a default-tolerance reference solve to 1e-4 in log volume.
pub fn tarasov_batch(opts: &VerifyOptions) -> Result<CheckResult> {
    let per_case = |i: usize| -> Result<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, i as u64, Stream::Adversary));
        let d = 2 + i % 4;
        let k = rng.gen_range(0..3 * d);
        let p = random_polytope(d, k, &mut rng)?;
        let e = solve(&p, &opts.solver)?;
        let a = sample_unit_sphere(d, &mut rng);
        let b: f64 = a.iter().zip(e.center().iter()).map(|(x, y)| x * y).sum();
        let q = p.cut(&a, b, Provenance::Other);
        let f = solve(&q, &opts.solver)?;
        let e_ref = solve(&p, &JohnOptions::default())?;
        let f_ref = solve(&q, &JohnOptions::default())?;
        let ratio = (f.log_volume() - e.log_volume()).exp();
        let dev = (e.log_volume() - e_ref.log_volume())
            .abs()
            .max((f.log_volume() - f_ref.log_volume()).abs());
        Ok((ratio, dev))
    };
    let res: Vec<(f64, f64)> = (0..opts.tarasov_cases)
        .into_par_iter()
        .map(per_case)
        .collect::<Result<_>>()?;
    let failures = res
        .iter()
        .filter(|(r, dev)| *r > 8.0 / 9.0 + 1e-3 || *dev > 1e-4)
        .count();
    let worst = res.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_dev = res.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(CheckResult {
        name: "tarasov_decay".into(),
        cases: res.len(),
        failures,
        worst,
        detail: format!("ratio ≤ 8/9 + 1e-3 and |Δ log vol| ≤ 1e-4 vs reference (worst {worst_dev:.2e}), d = 2..5"),
    })
}

/// `E ⊂ P` facet by facet and sampled `P ⊂ d·E`.
pub fn sandwich_batch(opts: &VerifyOptions) -> Result<CheckResult> {
    let per_case = |i: usize| -> Result<(usize, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, i as u64, Stream::MonteCarlo));
        let d = 2 + i % 4;
        let p = random_polytope(d, 2 * d, &mut rng)?;
        let e = solve(&p, &opts.solver)?;
        let r = sandwich_check(&p, &e, opts.sandwich_samples, &mut rng);
        Ok((r.inner_violations + r.outer_violations, r.max_scaled_gauge))
    };
    let res: Vec<(usize, f64)> = (0..opts.sandwich_polytopes)
        .into_par_iter()
        .map(per_case)
        .collect::<Result<_>>()?;
    Ok(CheckResult {
        name: "sandwich".into(),
        cases: res.len(),
        failures: res.iter().filter(|r| r.0 > 0).count(),
        worst: res.iter().map(|r| r.1).fold(0.0, f64::max),
        detail: format!(
            "{} hit-and-run samples per polytope; worst is max gauge / d",
            opts.sandwich_samples
        ),
    })
}

/// Whether one linear function through the origin fits all `points`
/// (least squares via SVD, then a residual check).
fn group_fits(points: &[&(Vec<f64>, f64)], tol: f64) -> bool {
    if points.is_empty() {
        return true;
    }
    let d = points[0].0.len();
    let a = DMatrix::from_fn(points.len(), d, |i, j| points[i].0[j]);
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let Ok(w) = a.clone().svd(true, true).solve(&y, 1e-12) else {
        return false;
    };
    let r = &a * &w - &y;
    r.iter().zip(points).all(|(ri, p)| ri.abs() <= tol * p.1.abs().max(1.0))
}

/// Fewest nonempty groups over all `k^m` assignments of points to groups
/// such that each group is fit by one linear function; `None` if no
/// assignment works.
pub fn exhaustive_min_pieces(points: &[(Vec<f64>, f64)], k: usize, tol: f64) -> Option<usize> {
    let m = points.len();
    let total = k.checked_pow(m as u32)?;
    let mut best: Option<usize> = None;
    let mut labels = vec![0usize; m];
    for code in 0..total {
        let mut c = code;
        for l in labels.iter_mut() {
            *l = c % k;
            c /= k;
        }
        let used = (0..k).filter(|g| labels.contains(g)).count();
        if best.is_some_and(|b| used >= b) {
            continue;
        }
        let ok = (0..k).all(|g| {
            let grp: Vec<&(Vec<f64>, f64)> = points
                .iter()
                .zip(&labels)
                .filter(|(_, l)| **l == g)
                .map(|(p, _)| p)
                .collect();
            group_fits(&grp, tol)
        });
        if ok {
            best = Some(used);
        }
    }
    if m == 0 {
        return Some(0);
    }
    best
}

/// A realizable instance with `m ≤ min(8, k(d+1))`. Coordinates and
/// coefficients are small integers (scaled) so that coincidences occur.
pub fn random_erm_instance<R: Rng + ?Sized>(rng: &mut R) -> ErmProblem {
    let k = rng.gen_range(1..=3usize);
    let d = rng.gen_range(1..=2usize);
    let m = rng.gen_range(1..=(k * (d + 1)).min(8));
    let pieces = rng.gen_range(1..=k);
    let coef: Vec<Vec<f64>> = (0..pieces)
        .map(|_| (0..d).map(|_| rng.gen_range(-2..=2) as f64 / 2.0).collect())
        .collect();
    let points = (0..m)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3..=3) as f64 / 4.0).collect();
            let a = &coef[rng.gen_range(0..pieces)];
            let y = a.iter().zip(&x).map(|(p, q)| p * q).sum();
            (x, y)
        })
        .collect();
    ErmProblem {
        points,
        k,
        ell: d,
        fit_tol: DEFAULT_FIT_TOL,
    }
}

/// ERM minimum piece count equals the exhaustive search on random instances.
pub fn erm_cross_check(opts: &VerifyOptions) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 0, Stream::Oracle));
    let mut failures = 0;
    let mut first = String::new();
    for i in 0..opts.erm_instances {
        let prob = random_erm_instance(&mut rng);
        let want = exhaustive_min_pieces(&prob.points, prob.k, 1e-7);
        let got = erm_partition(&prob).ok();
        let ok = match (&got, want) {
            (Some(sol), Some(w)) => sol.n() == w && validate(&prob, sol).is_ok(),
            (None, None) => true,
            _ => false,
        };
        if !ok {
            failures += 1;
            if first.is_empty() {
                first = format!(
                    "; first failure at instance {i}: erm {:?} vs exhaustive {want:?}",
                    got.map(|s| s.n())
                );
            }
        }
    }
    Ok(CheckResult {
        name: "erm_exhaustive".into(),
        cases: opts.erm_instances,
        failures,
        worst: failures as f64,
        detail: format!("minimum piece count vs k^m assignment search (m ≤ 8, d ≤ 2, K ≤ 3){first}"),
    })
}
