//! Exact small-instance ERM for piecewise-linear regression.
//!
//! Pieces are linear through the origin, `g(x) = ⟨a, x⟩`. Any cluster fit by
//! some `a` is also fit by the min-norm solution on a basis of the cluster's
//! span, so the min-norm fits of the linearly independent subsets of size
//! `1..=ℓ` form a complete candidate list. A branch-and-bound search then picks
//! the smallest cover.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmProblem {
    pub points: Vec<(Vec<f64>, f64)>,
    /// Maximum number of pieces.
    pub k: usize,
    /// Determination number; `d` for linear pieces.
    pub ell: usize,
    pub fit_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmSolution {
    /// Coefficient vectors `a_i`.
    pub functions: Vec<Vec<f64>>,
    /// Point indices of each cluster, ascending; cluster `i` is fit by `functions[i]`.
    pub clusters: Vec<Vec<usize>>,
}

impl ErmSolution {
    pub fn n(&self) -> usize {
        self.functions.len()
    }
}

/// Whether `|⟨a, x⟩ - y| ≤ tol · max(1, |y|)`.
pub fn fits(a: &[f64], x: &[f64], y: f64, tol: f64) -> bool {
    let v: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
    (v - y).abs() <= tol * y.abs().max(1.0)
}

/// Whether two linear functions agree on every supplied point.
pub fn determination_check(g: &[f64], g2: &[f64], points: &[Vec<f64>], tol: f64) -> bool {
    points.iter().all(|x| {
        let a: f64 = g.iter().zip(x).map(|(p, q)| p * q).sum();
        let b: f64 = g2.iter().zip(x).map(|(p, q)| p * q).sum();
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    })
}

fn distinct(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).any(|(p, q)| (p - q).abs() > tol * scale)
}

/// Min-norm exact fit of a point subset, `None` if the subset is rank deficient.
fn subset_fit(points: &[(Vec<f64>, f64)], subset: &[usize], dim: usize) -> Option<Vec<f64>> {
    let r = subset.len();
    let x = DMatrix::from_fn(r, dim, |i, j| points[subset[i]].0[j]);
    let y = DVector::from_fn(r, |i, _| points[subset[i]].1);
    // a = Xᵀ (X Xᵀ)⁻¹ y requires full row rank
    let gram = &x * x.transpose();
    let scale = gram.diagonal().amax();
    if scale == 0.0 {
        return None;
    }
    let svd = gram.clone().svd(false, false);
    let min_sv = svd.singular_values.min();
    if min_sv <= 1e-10 * scale {
        return None;
    }
    let coeffs = gram.lu().solve(&y)?;
    Some((x.transpose() * coeffs).iter().copied().collect())
}

fn for_each_subset(n: usize, size: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == size {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, size, cur, f);
            cur.pop();
        }
    }
    rec(0, n, size, &mut Vec::with_capacity(size), f);
}

struct Candidate {
    coeffs: Vec<f64>,
    /// Bitmask of covered points.
    cover: u64,
}

/// Candidate fits in canonical order (subset size, then lexicographic subset).
fn candidates(problem: &ErmProblem) -> Vec<Candidate> {
    let m = problem.points.len();
    let dim = problem.points.first().map_or(0, |p| p.0.len());
    let mut out: Vec<Candidate> = Vec::new();
    let nonzero: Vec<usize> = (0..m)
        .filter(|&i| problem.points[i].0.iter().any(|v| *v != 0.0))
        .collect();
    let max_size = problem.ell.min(dim).min(nonzero.len());
    for size in 1..=max_size {
        for_each_subset(nonzero.len(), size, &mut |sub| {
            let idx: Vec<usize> = sub.iter().map(|&i| nonzero[i]).collect();
            let Some(coeffs) = subset_fit(&problem.points, &idx, dim) else {
                return;
            };
            if out.iter().any(|c| !distinct(&c.coeffs, &coeffs, problem.fit_tol)) {
                return;
            }
            let mut cover = 0u64;
            for (i, (x, y)) in problem.points.iter().enumerate() {
                if fits(&coeffs, x, *y, problem.fit_tol) {
                    cover |= 1 << i;
                }
            }
            out.push(Candidate { coeffs, cover });
        });
    }
    if out.is_empty() {
        let coeffs = vec![0.0; dim];
        let mut cover = 0u64;
        for (i, (x, y)) in problem.points.iter().enumerate() {
            if fits(&coeffs, x, *y, problem.fit_tol) {
                cover |= 1 << i;
            }
        }
        out.push(Candidate { coeffs, cover });
    }
    out
}

/// Assigns each point to the chosen function covering the most points
/// (lower position on ties); returns cluster sizes in descending order and
/// the clusters in chosen order.
fn assign(chosen: &[usize], cands: &[Candidate], m: usize) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut order: Vec<usize> = (0..chosen.len()).collect();
    order.sort_by_key(|&p| (std::cmp::Reverse(cands[chosen[p]].cover.count_ones()), p));
    let mut clusters = vec![Vec::new(); chosen.len()];
    for i in 0..m {
        if let Some(&p) = order.iter().find(|&&p| cands[chosen[p]].cover >> i & 1 == 1) {
            clusters[p].push(i);
        }
    }
    let mut sizes: Vec<usize> = clusters.iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    (sizes, clusters)
}

/// Exact cover of the data set by at most `k` linear fits.
///
/// Among covers with the fewest pieces, the one whose descending cluster
/// sizes are lexicographically largest is returned; remaining ties go to the
/// first cover found in canonical search order. Empty clusters are dropped.
pub fn erm_partition(problem: &ErmProblem) -> Result<ErmSolution> {
    let m = problem.points.len();
    assert!(
        m <= problem.k * (problem.ell + 1),
        "ERM input of {m} points exceeds K(ℓ+1) = {}",
        problem.k * (problem.ell + 1)
    );
    assert!(m <= 64, "ERM supports at most 64 points");
    if m == 0 {
        return Ok(ErmSolution {
            functions: vec![],
            clusters: vec![],
        });
    }
    let cands = candidates(problem);
    let full: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };

    for n in 1..=problem.k {
        let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
        let mut seen: Vec<Vec<usize>> = Vec::new();
        let mut stack: Vec<usize> = Vec::with_capacity(n);
        search(&cands, full, 0, n, &mut stack, &mut |chosen| {
            let mut key = chosen.to_vec();
            key.sort_unstable();
            if seen.contains(&key) {
                return;
            }
            seen.push(key);
            let (sizes, _) = assign(chosen, &cands, m);
            if best.as_ref().map_or(true, |(bs, _)| sizes > *bs) {
                best = Some((sizes, chosen.to_vec()));
            }
        });
        if let Some((_, chosen)) = best {
            let (_, clusters) = assign(&chosen, &cands, m);
            let mut functions = Vec::new();
            let mut kept = Vec::new();
            for (p, cl) in clusters.into_iter().enumerate() {
                if !cl.is_empty() {
                    functions.push(cands[chosen[p]].coeffs.clone());
                    kept.push(cl);
                }
            }
            let sol = ErmSolution {
                functions,
                clusters: kept,
            };
            debug_assert!(validate(problem, &sol).is_ok());
            return Ok(sol);
        }
    }
    Err(Error::ErmInfeasible { k: problem.k, m })
}

fn search(
    cands: &[Candidate],
    full: u64,
    covered: u64,
    budget: usize,
    stack: &mut Vec<usize>,
    on_cover: &mut impl FnMut(&[usize]),
) {
    if covered == full {
        on_cover(stack);
        return;
    }
    if stack.len() == budget {
        return;
    }
    let lowest = (!covered & full).trailing_zeros();
    for (ci, c) in cands.iter().enumerate() {
        if c.cover >> lowest & 1 == 1 {
            stack.push(ci);
            search(cands, full, covered | c.cover, budget, stack, on_cover);
            stack.pop();
        }
    }
}

/// Independent re-check of an ERM solution: exact cover, fits, distinctness.
pub fn validate(problem: &ErmProblem, sol: &ErmSolution) -> std::result::Result<(), String> {
    let m = problem.points.len();
    if sol.functions.len() != sol.clusters.len() {
        return Err("functions and clusters differ in length".into());
    }
    if sol.n() > problem.k {
        return Err(format!("{} pieces exceed K = {}", sol.n(), problem.k));
    }
    let mut count = vec![0usize; m];
    for (g, cl) in sol.functions.iter().zip(&sol.clusters) {
        for &i in cl {
            if i >= m {
                return Err(format!("index {i} out of range"));
            }
            count[i] += 1;
            let (x, y) = &problem.points[i];
            if !fits(g, x, *y, problem.fit_tol) {
                return Err(format!("point {i} not fit by its piece"));
            }
        }
    }
    if let Some(i) = count.iter().position(|&c| c != 1) {
        return Err(format!("point {i} covered {} times", count[i]));
    }
    for i in 0..sol.n() {
        for j in i + 1..sol.n() {
            if !distinct(&sol.functions[i], &sol.functions[j], problem.fit_tol) {
                return Err(format!("pieces {i} and {j} coincide"));
            }
        }
    }
    Ok(())
}
