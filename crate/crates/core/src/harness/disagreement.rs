//! Monte-Carlo estimate of the disagreement region's mass.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{sample_uniform_ball, HalfspacePolytope};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Fraction of `x ~ Unif(B₁^d)` for which the version space contains both a
/// `w` with `⟨w, x⟩ ≥ τ` and one with `⟨w, x⟩ ≤ -τ`. One LP per side.
pub fn disagreement_mass<R: Rng + ?Sized>(
    poly: &HalfspacePolytope,
    n_samples: usize,
    tau: f64,
    rng: &mut R,
) -> Result<MassEstimate> {
    let d = poly.dim();
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let x = sample_uniform_ball(d, rng);
        if poly.support(&x)? < tau {
            continue;
        }
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        if poly.support(&neg)? >= tau {
            hits += 1;
        }
    }
    let p = hits as f64 / n_samples.max(1) as f64;
    Ok(MassEstimate {
        estimate: p,
        std_err: (p * (1.0 - p) / n_samples.max(1) as f64).sqrt(),
        samples: n_samples,
    })
}
