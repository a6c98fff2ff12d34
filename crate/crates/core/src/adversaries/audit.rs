use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Adversary;
use crate::geometry::log_unit_ball_volume;
use crate::learners::Boundary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Largest histogram estimate of `dp/dμ` over cells inside the ball.
    pub max_ratio: f64,
    /// Binomial standard error of that estimate.
    pub std_err: f64,
    /// `1/σ`, or infinity for adversaries that declare none.
    pub declared: f64,
    pub cells_used: usize,
    pub draws: usize,
}

impl AuditReport {
    /// Whether the estimate stays below the declared bound within `k` standard errors.
    pub fn consistent(&self, k: f64) -> bool {
        self.max_ratio <= self.declared + k * self.std_err
    }
}

/// Histogram estimate of `sup dp_t/dμ` for the adversary's next-round
/// distribution with its history frozen.
///
/// The cube `[-1, 1]^d` is cut into `n_cells` slabs per axis; only cells lying
/// entirely inside the ball are scored, so their `μ`-mass is exact.
pub fn smoothness_audit<R: Rng + ?Sized>(
    adv: &Adversary,
    boundary: Option<&Boundary>,
    n_draws: usize,
    n_cells: usize,
    rng: &mut R,
) -> AuditReport {
    let d = adv.dim();
    let h = 2.0 / n_cells as f64;
    let index = |x: &[f64]| -> usize {
        x.iter().fold(0usize, |acc, v| {
            let k = (((v + 1.0) / h).floor() as isize).clamp(0, n_cells as isize - 1) as usize;
            acc * n_cells + k
        })
    };
    let total = n_cells.pow(d as u32);
    let mut counts = vec![0usize; total];
    for _ in 0..n_draws {
        let mut a = adv.clone();
        let x = a.next_context(boundary, rng).x;
        counts[index(&x)] += 1;
    }
    let cell_mass = (d as f64 * h.ln() - log_unit_ball_volume(d)).exp();
    let mut best = (0.0f64, 0.0f64);
    let mut used = 0;
    for (c, &count) in counts.iter().enumerate() {
        // farthest corner from the origin decides whether the cell is inside
        let mut rest = c;
        let mut far = 0.0;
        for _ in 0..d {
            let k = rest % n_cells;
            rest /= n_cells;
            let lo = -1.0 + k as f64 * h;
            let m = lo.abs().max((lo + h).abs());
            far += m * m;
        }
        if far > 1.0 + 1e-12 {
            continue;
        }
        used += 1;
        let p = count as f64 / n_draws as f64;
        let ratio = p / cell_mass;
        if ratio > best.0 {
            let se = (p * (1.0 - p) / n_draws as f64).sqrt() / cell_mass;
            best = (ratio, se);
        }
    }
    AuditReport {
        max_ratio: best.0,
        std_err: best.1,
        declared: adv.declared_sigma().map_or(f64::INFINITY, |s| 1.0 / s),
        cells_used: used,
        draws: n_draws,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{AdversarySpec, CenterPolicy};
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn uniform_ratio_near_one() {
        let a = Adversary::new(AdversarySpec::Uniform, 2, 0).unwrap();
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let rep = smoothness_audit(&a, None, 200_000, 4, &mut r);
        assert!(rep.consistent(3.0), "{rep:?}");
        assert!((rep.max_ratio - 1.0).abs() < 0.05, "{rep:?}");
    }

    #[test]
    fn interval_noise_in_one_dimension() {
        // noise uniform on [c - 0.1, c + 0.1]: density (1/0.2) against μ density 1/2, ratio 10
        let spec = AdversarySpec::EpsBall {
            eps: 0.1,
            center: CenterPolicy::Fixed { point: vec![0.33] },
        };
        let a = Adversary::new(spec, 1, 0).unwrap();
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let rep = smoothness_audit(&a, None, 200_000, 200, &mut r);
        assert!((rep.declared - 10.0).abs() < 1e-9);
        assert!(rep.consistent(3.0), "{rep:?}");
        assert!(rep.max_ratio > 9.0, "{rep:?}");
    }
}
