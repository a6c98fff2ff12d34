use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ellipsoid::Ellipsoid;
use super::polytope::{dot, HalfspacePolytope};

/// Uniform direction on the unit sphere `S^{d-1}`.
pub fn sample_unit_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point in the unit ball `B_1^d`: Gaussian direction, radius `U^{1/d}`.
pub fn sample_uniform_ball<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let dir = sample_unit_sphere(d, rng);
    let r = rng.gen::<f64>().powf(1.0 / d as f64);
    dir.into_iter().map(|x| x * r).collect()
}

/// Hit-and-run walk inside a bounded polytope.
///
/// `start` must be interior. Returns `n` points, one every `thin` steps after
/// `burn_in` steps.
pub fn hit_and_run<R: Rng + ?Sized>(
    poly: &HalfspacePolytope,
    start: &[f64],
    n: usize,
    burn_in: usize,
    thin: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let d = poly.dim();
    let mut x = start.to_vec();
    let mut out = Vec::with_capacity(n);
    let thin = thin.max(1);
    let total = burn_in + n * thin;
    for step in 1..=total {
        let u = sample_unit_sphere(d, rng);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for h in poly.constraints() {
            let au = dot(&h.normal, &u);
            let room = h.offset - dot(&h.normal, &x);
            if au > 1e-300 {
                hi = hi.min(room / au);
            } else if au < -1e-300 {
                lo = lo.max(room / au);
            }
        }
        if lo.is_finite() && hi.is_finite() && hi > lo {
            let lambda = lo + (hi - lo) * rng.gen::<f64>();
            for (xi, ui) in x.iter_mut().zip(&u) {
                *xi += lambda * ui;
            }
        }
        if step > burn_in && (step - burn_in) % thin == 0 {
            out.push(x.clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    /// Constraints with `‖Ba‖ + ⟨a, c⟩ > b + tol`.
    pub inner_violations: usize,
    /// Samples of the polytope outside `d · E`.
    pub outer_violations: usize,
    pub samples: usize,
    /// Largest observed gauge `‖B⁻¹(x - c)‖ / d`.
    pub max_scaled_gauge: f64,
}

impl SandwichReport {
    pub fn ok(&self) -> bool {
        self.inner_violations == 0 && self.outer_violations == 0
    }
}

/// Checks `E ⊂ poly` facet by facet and `poly ⊂ d·E` on hit-and-run samples.
pub fn sandwich_check<R: Rng + ?Sized>(
    poly: &HalfspacePolytope,
    e: &Ellipsoid,
    n_samples: usize,
    rng: &mut R,
) -> SandwichReport {
    const TOL: f64 = 1e-8;
    const GAUGE_SLACK: f64 = 1e-6;
    let inner_violations = poly
        .constraints()
        .iter()
        .filter(|h| e.support(&h.normal) > h.offset + TOL)
        .count();
    let d = poly.dim() as f64;
    let start = e.center_vec();
    let pts = hit_and_run(poly, &start, n_samples, 10 * poly.dim(), 1, rng);
    let mut outer_violations = 0;
    let mut max_scaled_gauge: f64 = 0.0;
    for x in &pts {
        let g = e.gauge(x) / d;
        max_scaled_gauge = max_scaled_gauge.max(g);
        if g > 1.0 + GAUGE_SLACK {
            outer_violations += 1;
        }
    }
    SandwichReport {
        inner_violations,
        outer_violations,
        samples: pts.len(),
        max_scaled_gauge,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::john::max_inscribed_ellipsoid;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ball_samples_in_1d_are_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_uniform_ball(1, &mut rng)[0]).collect();
        assert!(xs.iter().all(|x| x.abs() <= 1.0));
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn ball_mean_radius_in_3d() {
        // E‖x‖ = d / (d + 1), Var‖x‖ = d/(d+2) - (d/(d+1))²
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20_000;
        let mean = (0..n)
            .map(|_| {
                let v = sample_uniform_ball(3, &mut rng);
                dot(&v, &v).sqrt()
            })
            .sum::<f64>()
            / n as f64;
        let sd = (3.0 / 5.0 - 0.5625f64).sqrt();
        assert!((mean - 0.75).abs() < 4.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn fixed_seed_reproducible() {
        let a: Vec<Vec<f64>> = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            (0..5).map(|_| sample_uniform_ball(4, &mut rng)).collect()
        };
        let b: Vec<Vec<f64>> = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            (0..5).map(|_| sample_uniform_ball(4, &mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn hit_and_run_stays_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = HalfspacePolytope::unit_box(3);
        for x in hit_and_run(&p, &[0.0; 3], 500, 10, 1, &mut rng) {
            assert!(p.contains(&x, 1e-12));
        }
    }

    #[test]
    fn box_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = HalfspacePolytope::unit_box(2);
        let e = Ellipsoid::ball(DVector::zeros(2), 1.0);
        let r = sandwich_check(&p, &e, 2000, &mut rng);
        assert!(r.ok(), "{r:?}");
        assert!(r.max_scaled_gauge <= 2f64.sqrt() / 2.0 + 1e-12);
    }

    #[test]
    fn needle_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = HalfspacePolytope::unit_box(2)
            .cut(&[-0.01, 1.0], 0.0, crate::geometry::Provenance::Other)
            .cut(&[0.01, -1.0], 0.001, crate::geometry::Provenance::Other);
        let e = max_inscribed_ellipsoid(&p, 1e-8).unwrap();
        let r = sandwich_check(&p, &e, 5000, &mut rng);
        assert!(r.ok(), "{r:?}");
    }
}
