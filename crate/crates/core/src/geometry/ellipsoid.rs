use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// `E = { c + B u : ‖u‖ ≤ 1 }` with `B` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    center: DVector<f64>,
    shape: DMatrix<f64>,
    log_volume: f64,
}

/// `log ω_d`, the log-volume of the unit ball in `R^d`.
pub fn log_unit_ball_volume(d: usize) -> f64 {
    // ω_0 = 1, ω_1 = 2, ω_d = ω_{d-2} · 2π / d
    let mut log_omega = if d % 2 == 0 { 0.0 } else { 2f64.ln() };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        log_omega += (2.0 * std::f64::consts::PI / k as f64).ln();
        k += 2;
    }
    log_omega
}

impl Ellipsoid {
    /// Panics if `shape` is not square, mismatched with `center`, or
    /// asymmetric beyond `1e-12` (relative to its largest entry).
    pub fn new(center: DVector<f64>, shape: DMatrix<f64>) -> Self {
        let d = center.len();
        assert_eq!(shape.shape(), (d, d), "shape matrix must be d×d");
        let scale = shape.amax().max(1.0);
        let asym = (&shape - shape.transpose()).amax();
        assert!(
            asym <= 1e-12 * scale,
            "shape matrix must be symmetric (asymmetry {asym:e})"
        );
        let shape = (&shape + shape.transpose()) * 0.5;
        let log_volume = log_unit_ball_volume(d) + log_det_psd(&shape);
        Self {
            center,
            shape,
            log_volume,
        }
    }

    /// The ball of radius `radius` around `center`.
    pub fn ball(center: DVector<f64>, radius: f64) -> Self {
        let d = center.len();
        Self::new(center, DMatrix::identity(d, d) * radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn log_volume(&self) -> f64 {
        self.log_volume
    }

    /// `ω_d · det B`.
    pub fn volume(&self) -> f64 {
        self.log_volume.exp()
    }

    /// Scale about the center: `c + factor · B u`.
    pub fn dilate(&self, factor: f64) -> Self {
        assert!(factor > 0.0, "dilation factor must be positive");
        Self::new(self.center.clone(), &self.shape * factor)
    }

    /// Eigenvalues of `B` in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.shape.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `max_{w ∈ E} ⟨a, w⟩ = ⟨a, c⟩ + ‖B a‖`.
    pub fn support(&self, a: &[f64]) -> f64 {
        let a = DVector::from_column_slice(a);
        a.dot(&self.center) + (&self.shape * &a).norm()
    }

    /// `‖B^{-1}(x − c)‖`, the gauge of `x` (≤ 1 inside). Infinite if `B` is singular.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        let diff = DVector::from_column_slice(x) - &self.center;
        match self.shape.clone().cholesky() {
            Some(ch) => ch.solve(&diff).norm(),
            None => f64::INFINITY,
        }
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        self.gauge(x) <= 1.0 + slack
    }

    pub fn center_vec(&self) -> Vec<f64> {
        self.center.iter().copied().collect()
    }
}

/// `log det` of a symmetric PSD matrix; `-inf` when singular.
pub(crate) fn log_det_psd(m: &DMatrix<f64>) -> f64 {
    if let Some(ch) = m.clone().cholesky() {
        2.0 * ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>()
    } else {
        let ev = SymmetricEigen::new(m.clone()).eigenvalues;
        if ev.iter().any(|&v| v <= 0.0) {
            f64::NEG_INFINITY
        } else {
            ev.iter().map(|v| v.ln()).sum()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes() {
        assert!((log_unit_ball_volume(1).exp() - 2.0).abs() < 1e-12);
        assert!((log_unit_ball_volume(2).exp() - PI).abs() < 1e-12);
        assert!((log_unit_ball_volume(3).exp() - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((log_unit_ball_volume(4).exp() - PI * PI / 2.0).abs() < 1e-12);
        assert!((log_unit_ball_volume(5).exp() - 8.0 * PI * PI / 15.0).abs() < 1e-12);
    }

    #[test]
    fn disk_volume_and_dilation() {
        let disk = Ellipsoid::ball(DVector::zeros(2), 1.0);
        assert!((disk.volume() - PI).abs() < 1e-12);
        assert!((disk.dilate(2.0).volume() - 4.0 * PI).abs() < 1e-12);
        let flat = Ellipsoid::new(
            DVector::zeros(2),
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5])),
        );
        assert!((flat.volume() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_and_support() {
        let e = Ellipsoid::new(
            DVector::from_vec(vec![1.0, 0.0]),
            DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5])),
        );
        assert!((e.gauge(&[3.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((e.gauge(&[1.0, 0.25]) - 0.5).abs() < 1e-12);
        assert!((e.support(&[1.0, 0.0]) - 3.0).abs() < 1e-12);
        assert!((e.support(&[0.0, -1.0]) - 0.5).abs() < 1e-12);
        assert!(e.contains(&[2.9, 0.0], 0.0));
        assert!(!e.contains(&[3.1, 0.0], 0.0));
    }

    #[test]
    #[should_panic]
    fn asymmetric_shape_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        Ellipsoid::new(DVector::zeros(2), m);
    }
}
