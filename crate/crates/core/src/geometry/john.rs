//! Maximum-volume inscribed ellipsoid of a halfspace polytope.
//!
//! Solves `max log det B  s.t.  ‖B a_i‖ + ⟨a_i, c⟩ ≤ b_i` with a primal
//! log-barrier method: each constraint contributes `-log(s_i² - ‖B a_i‖²)`
//! (`s_i = b_i - ⟨a_i, c⟩`), a second-order-cone barrier of parameter 2, so
//! the central point at barrier weight `t` is within `2m / t` of the optimal
//! `log det B`. The start is the Chebyshev ball of the polytope at half radius.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ellipsoid::Ellipsoid;
use super::lp;
use super::polytope::HalfspacePolytope;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JohnOptions {
    /// Allowed constraint violation `‖Ba‖ + ⟨a, c⟩ - b` of the result.
    pub tol: f64,
    /// Target bound on `log det B* - log det B`.
    pub gap: f64,
    /// Smallest admissible eigenvalue of `B`.
    pub eig_floor: f64,
    pub max_newton_steps: usize,
}

impl Default for JohnOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            gap: 1e-6,
            eig_floor: 1e-10,
            max_newton_steps: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JohnSolution {
    pub ellipsoid: Ellipsoid,
    /// Certified bound on the `log det` suboptimality.
    pub gap: f64,
    pub newton_steps: usize,
    /// `max_i ‖B a_i‖ + ⟨a_i, c⟩ - b_i`.
    pub max_excess: f64,
}

/// John ellipsoid with default options and the given feasibility tolerance.
pub fn max_inscribed_ellipsoid(poly: &HalfspacePolytope, tol: f64) -> Result<Ellipsoid> {
    assert!(tol > 0.0, "tolerance must be positive");
    let opts = JohnOptions {
        tol,
        ..JohnOptions::default()
    };
    john_ellipsoid(poly, &opts, None).map(|s| s.ellipsoid)
}

/// Full solver entry point.
///
/// `frame`, typically the previous John ellipsoid of a superset, is used as a
/// change of variables `w = c₀ + B₀ z` so that the working polytope is
/// well rounded; the result is mapped back to the original coordinates.
pub fn john_ellipsoid(poly: &HalfspacePolytope, opts: &JohnOptions, frame: Option<&Ellipsoid>) -> Result<JohnSolution> {
    let d = poly.dim();
    let frame = frame.filter(|f| f.dim() == d && f.min_eigenvalue() > opts.eig_floor);

    // Working-space rows, normalized.
    let mut rows_a = Vec::with_capacity(poly.len());
    let mut rows_b = Vec::with_capacity(poly.len());
    for h in poly.constraints() {
        let a = DVector::from_column_slice(&h.normal);
        let (a, b) = match frame {
            Some(f) => (f.shape() * &a, h.offset - a.dot(f.center())),
            None => (a, h.offset),
        };
        let n = a.norm();
        if n == 0.0 {
            if b < 0.0 {
                return Err(Error::InfeasibleOrDegenerate("constraint 0 ≤ b with b < 0".into()));
            }
            continue;
        }
        rows_a.push(a / n);
        rows_b.push(b / n);
    }

    let radius_floor = match frame {
        Some(_) => 1e-12,
        None => opts.eig_floor,
    };
    let (c0, r) = lp::chebyshev_center(d, rows_a.iter().zip(&rows_b).map(|(a, b)| (a.as_slice(), *b)), 1e3).map_err(
        |e| match e {
            lp::LpError::Infeasible => Error::InfeasibleOrDegenerate("polytope is empty".into()),
            other => Error::LpFailure(other),
        },
    )?;
    if !(r > radius_floor) {
        return Err(Error::InfeasibleOrDegenerate(format!(
            "inscribed ball radius {r:e} below floor"
        )));
    }

    let problem = Barrier::new(d, rows_a, rows_b);
    let mut x = DVector::zeros(problem.n);
    for k in 0..d {
        x[problem.diag_index(k)] = r / 2.0;
        x[problem.p + k] = c0[k];
    }
    let (x, gap, steps) = problem.solve(x, opts)?;
    let (bz, cz) = problem.unpack(&x);

    let (mut shape, center) = match frame {
        Some(f) => {
            let m = f.shape() * &bz;
            (polar_factor(m), f.center() + f.shape() * &cz)
        }
        None => (bz, cz),
    };
    shape = (&shape + shape.transpose()) * 0.5;

    // Shrink about the center if mapping back left any constraint violated.
    let mut max_excess = f64::NEG_INFINITY;
    let mut scale: f64 = 1.0;
    for h in poly.constraints() {
        let a = DVector::from_column_slice(&h.normal);
        let reach = (&shape * &a).norm();
        let slack = h.offset - a.dot(&center);
        if reach > slack {
            if slack <= 0.0 {
                return Err(Error::InfeasibleOrDegenerate("center on or outside a facet".into()));
            }
            scale = scale.min(slack / reach);
        }
    }
    if scale < 1.0 {
        shape *= scale * (1.0 - 1e-12);
    }
    for h in poly.constraints() {
        let a = DVector::from_column_slice(&h.normal);
        max_excess = max_excess.max((&shape * &a).norm() + a.dot(&center) - h.offset);
    }

    let ellipsoid = Ellipsoid::new(center, shape);
    let min_eig = ellipsoid.min_eigenvalue();
    if !(min_eig >= opts.eig_floor) {
        return Err(Error::InfeasibleOrDegenerate(format!(
            "John ellipsoid eigenvalue {min_eig:e} below floor {:e}",
            opts.eig_floor
        )));
    }
    Ok(JohnSolution {
        ellipsoid,
        gap,
        newton_steps: steps,
        max_excess,
    })
}

/// Symmetric `P` with `P Pᵀ = M Mᵀ`, from the SVD of `M` so that small
/// singular values are not lost to squaring.
fn polar_factor(m: DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    &u * DMatrix::from_diagonal(&svd.singular_values) * u.transpose()
}

/// Barrier problem over `x = (β, c)`, where `B = Σ β_k E_k` in the
/// symmetric basis `E_(i,i) = e_i e_iᵀ`, `E_(i,j) = e_i e_jᵀ + e_j e_iᵀ`.
struct Barrier {
    d: usize,
    p: usize,
    n: usize,
    basis: Vec<(usize, usize)>,
    rows_a: Vec<DVector<f64>>,
    rows_b: Vec<f64>,
    /// `J_i` with columns `E_k a_i`, so that `B a_i = J_i β`.
    jacobians: Vec<DMatrix<f64>>,
}

impl Barrier {
    fn new(d: usize, rows_a: Vec<DVector<f64>>, rows_b: Vec<f64>) -> Self {
        let mut basis = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                basis.push((i, j));
            }
        }
        let p = basis.len();
        let jacobians = rows_a
            .iter()
            .map(|a| {
                let mut jm = DMatrix::zeros(d, p);
                for (k, &(i, j)) in basis.iter().enumerate() {
                    if i == j {
                        jm[(i, k)] = a[i];
                    } else {
                        jm[(i, k)] = a[j];
                        jm[(j, k)] = a[i];
                    }
                }
                jm
            })
            .collect();
        Self {
            d,
            p,
            n: p + d,
            basis,
            rows_a,
            rows_b,
            jacobians,
        }
    }

    fn diag_index(&self, k: usize) -> usize {
        self.basis.iter().position(|&(i, j)| i == k && j == k).unwrap()
    }

    fn shape(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.d, self.d);
        for (k, &(i, j)) in self.basis.iter().enumerate() {
            b[(i, j)] = x[k];
            b[(j, i)] = x[k];
        }
        b
    }

    fn unpack(&self, x: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
        (self.shape(x), x.rows(self.p, self.d).into_owned())
    }

    /// Barrier objective, `None` outside the domain.
    fn value(&self, x: &DVector<f64>, t: f64) -> Option<f64> {
        let b = self.shape(x);
        let chol = b.clone().cholesky()?;
        let logdet = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let c = x.rows(self.p, self.d);
        let mut total = -t * logdet;
        for (a, &bi) in self.rows_a.iter().zip(&self.rows_b) {
            let s = bi - a.dot(&c);
            if !(s > 0.0) {
                return None;
            }
            let u = &b * a;
            let f = s * s - u.norm_squared();
            if !(f > 0.0) {
                return None;
            }
            total -= f.ln();
        }
        total.is_finite().then_some(total)
    }

    fn gradient_hessian(&self, x: &DVector<f64>, t: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let (d, p, n) = (self.d, self.p, self.n);
        let b = self.shape(x);
        let w = b.clone().cholesky()?.inverse();
        let c = x.rows(p, d);
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);

        // -t log det B: gradient -t tr(W E_k), Hessian t tr(W E_k W E_l).
        let terms: Vec<Vec<(usize, usize)>> = self
            .basis
            .iter()
            .map(|&(i, j)| if i == j { vec![(i, i)] } else { vec![(i, j), (j, i)] })
            .collect();
        for k in 0..p {
            // tr(W e_p e_qᵀ) = W[q, p]
            g[k] = -t * terms[k].iter().map(|&(pp, q)| w[(q, pp)]).sum::<f64>();
            for l in k..p {
                let mut v = 0.0;
                for &(pp, q) in &terms[k] {
                    for &(r, s) in &terms[l] {
                        // tr(W e_p e_qᵀ W e_r e_sᵀ) = W[s, p] W[q, r]
                        v += w[(s, pp)] * w[(q, r)];
                    }
                }
                h[(k, l)] = t * v;
                h[(l, k)] = t * v;
            }
        }

        let mut grad_f = DVector::zeros(n);
        for ((a, &bi), jm) in self.rows_a.iter().zip(&self.rows_b).zip(&self.jacobians) {
            let s = bi - a.dot(&c);
            let u = &b * a;
            let f = s * s - u.norm_squared();
            if !(s > 0.0 && f > 0.0) {
                return None;
            }
            // grad f = [-2 Jᵀu; -2 s a], Hess f = [-2 JᵀJ, 0; 0, 2 a aᵀ]
            let jtu = jm.transpose() * &u;
            for k in 0..p {
                grad_f[k] = -2.0 * jtu[k];
            }
            for k in 0..d {
                grad_f[p + k] = -2.0 * s * a[k];
            }
            // h = -log f: grad = -grad f / f, Hess = grad f grad fᵀ / f² - Hess f / f
            g.axpy(-1.0 / f, &grad_f, 1.0);
            h.ger(1.0 / (f * f), &grad_f, &grad_f, 1.0);
            let jtj = jm.transpose() * jm;
            let mut block = h.view_mut((0, 0), (p, p));
            block += jtj * (2.0 / f);
            let mut block = h.view_mut((p, p), (d, d));
            block.ger(-2.0 / f, a, a, 1.0);
        }
        Some((g, h))
    }

    fn newton_direction(&self, g: &DVector<f64>, h: &DMatrix<f64>) -> Option<DVector<f64>> {
        let scale = h.diagonal().amax().max(1e-300);
        let mut ridge = 0.0;
        for _ in 0..8 {
            let mut hr = h.clone();
            if ridge > 0.0 {
                for i in 0..self.n {
                    hr[(i, i)] += ridge;
                }
            }
            if let Some(ch) = hr.cholesky() {
                let dx = -ch.solve(g);
                if dx.iter().all(|v| v.is_finite()) {
                    return Some(dx);
                }
            }
            ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 100.0 };
        }
        None
    }

    fn solve(&self, mut x: DVector<f64>, opts: &JohnOptions) -> Result<(DVector<f64>, f64, usize)> {
        let m = self.rows_a.len() as f64;
        let nu = 2.0 * m;
        let mut t = 1.0;
        let mut steps = 0;
        loop {
            // Centering at weight t.
            loop {
                if steps >= opts.max_newton_steps {
                    return Err(Error::InfeasibleOrDegenerate(format!(
                        "John solver did not converge in {steps} Newton steps"
                    )));
                }
                let Some((g, h)) = self.gradient_hessian(&x, t) else {
                    return Err(Error::InfeasibleOrDegenerate("left barrier domain".into()));
                };
                let Some(dx) = self.newton_direction(&g, &h) else {
                    return Err(Error::InfeasibleOrDegenerate("singular Newton system".into()));
                };
                steps += 1;
                let decrement = -g.dot(&dx);
                if decrement / 2.0 <= 1e-9 {
                    break;
                }
                let f0 = self.value(&x, t).expect("iterate stays in domain");
                let mut alpha = 1.0;
                let mut accepted = false;
                while alpha > 1e-16 {
                    let trial = &x + &dx * alpha;
                    if let Some(f1) = self.value(&trial, t) {
                        if f1 <= f0 - 0.25 * alpha * decrement {
                            // Equality means the decrease is below f64 resolution.
                            accepted = f1 < f0;
                            x = trial;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if !accepted {
                    // No further progress representable in floating point.
                    break;
                }
            }
            let gap = nu / t;
            if gap <= opts.gap {
                return Ok((x, gap, steps));
            }
            t *= 10.0;
        }
    }
}
