use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smoothcut::geometry::{
    john_ellipsoid, lp, max_inscribed_ellipsoid, sample_uniform_ball, sample_unit_sphere, sandwich_check,
    HalfspacePolytope, JohnOptions, Provenance,
};

/// Box plus `k` random cuts, each through a random point of the current body.
fn random_polytope(d: usize, k: usize, rng: &mut ChaCha8Rng) -> HalfspacePolytope {
    let mut p = HalfspacePolytope::unit_box(d);
    for _ in 0..k {
        let e = max_inscribed_ellipsoid(&p, 1e-8).unwrap();
        let u = sample_uniform_ball(d, rng);
        let through: Vec<f64> = (e.shape() * DVector::from_vec(u) * 0.8 + e.center())
            .iter()
            .copied()
            .collect();
        let a = sample_unit_sphere(d, rng);
        let b: f64 = a.iter().zip(&through).map(|(x, y)| x * y).sum();
        p.push_cut(a, b, Provenance::Other);
    }
    p
}

/// Independent oracle for planar bodies. For a fixed lower-triangular shape
/// `L = [[1, 0], [q, r]]` the best center `c` and scale `s` with every one of
/// 360 sampled boundary points `c + s L u_k` inside the body is an LP; the
/// two shape parameters are then found by grid search and compass refinement.
fn brute_force_planar(halfspaces: &[([f64; 2], f64)]) -> ([f64; 2], f64) {
    let n_dirs = 360;
    let dirs: Vec<[f64; 2]> = (0..n_dirs)
        .map(|i| {
            let th = i as f64 * std::f64::consts::TAU / n_dirs as f64;
            [th.cos(), th.sin()]
        })
        .collect();
    // variables (c₁, c₂, s)
    let fit = |q: f64, r: f64| -> ([f64; 2], f64) {
        let mut rows = Vec::new();
        for u in &dirs {
            let lu = [u[0], q * u[0] + r * u[1]];
            for (a, b) in halfspaces {
                rows.push((vec![a[0], a[1], a[0] * lu[0] + a[1] * lu[1]], *b));
            }
        }
        rows.push((vec![0.0, 0.0, -1.0], 0.0));
        let sol = lp::maximize(3, rows.iter().map(|(a, b)| (&a[..], *b)), &[0.0, 0.0, 1.0]).unwrap();
        ([sol.point[0], sol.point[1]], sol.value * sol.value * r)
    };
    let (mut q, mut r, mut best) = (0.0, 1.0, f64::NEG_INFINITY);
    for i in 0..=20 {
        for j in 1..=20 {
            let (qq, rr) = (-2.0 + 0.2 * i as f64, 0.15 * j as f64);
            let v = fit(qq, rr).1;
            if v > best {
                (q, r, best) = (qq, rr, v);
            }
        }
    }
    // nested grid refinement around the incumbent
    let mut h = 0.1;
    for _ in 0..6 {
        let (q0, r0) = (q, r);
        for i in -5..=5 {
            for j in -5..=5 {
                let (qq, rr) = (q0 + h * i as f64, r0 + h * j as f64);
                if rr <= 0.0 {
                    continue;
                }
                let v = fit(qq, rr).1;
                if v > best {
                    (q, r, best) = (qq, rr, v);
                }
            }
        }
        h /= 4.0;
    }
    let (c, area) = fit(q, r);
    (c, std::f64::consts::PI * area)
}

#[test]
fn triangle_matches_brute_force_oracle() {
    let tri = [([-1.0, 0.0], 0.0), ([0.0, -1.0], 0.0), ([1.0, 1.0], 1.0)];
    let (c_ref, area_ref) = brute_force_planar(&tri);
    let poly = HalfspacePolytope::from_halfspaces(2, tri.iter().map(|(a, b)| (a.to_vec(), *b)));
    let e = max_inscribed_ellipsoid(&poly, 1e-8).unwrap();
    assert!((e.center()[0] - c_ref[0]).abs() < 5e-3 && (e.center()[1] - c_ref[1]).abs() < 5e-3);
    assert!((e.center()[0] - 1.0 / 3.0).abs() < 1e-5);
    // sampled containment slightly overestimates
    assert!(
        ((e.volume() - area_ref) / area_ref).abs() < 1e-3,
        "{} vs {area_ref}",
        e.volume()
    );
    // Steiner inellipse: π / (3√3) of the triangle area
    let steiner = std::f64::consts::PI / (3.0 * 3f64.sqrt()) * 0.5;
    assert!((e.volume() - steiner).abs() < 1e-5);
}

#[test]
fn skewed_quadrilateral_matches_brute_force_oracle() {
    let quad = [
        ([-1.0, 0.0], 0.0),
        ([0.0, -1.0], 0.0),
        ([1.0, 0.3], 0.9),
        ([0.2, 1.0], 0.6),
    ];
    let (_, area_ref) = brute_force_planar(&quad);
    let poly = HalfspacePolytope::from_halfspaces(2, quad.iter().map(|(a, b)| (a.to_vec(), *b)));
    let e = max_inscribed_ellipsoid(&poly, 1e-8).unwrap();
    assert!(
        ((e.volume() - area_ref) / area_ref).abs() < 1e-3,
        "{} vs {area_ref}",
        e.volume()
    );
}

#[test]
fn boxes_give_unit_balls() {
    for d in 2..=6 {
        let e = max_inscribed_ellipsoid(&HalfspacePolytope::unit_box(d), 1e-8).unwrap();
        assert!(e.center().norm() < 1e-6);
        assert!((e.shape() - nalgebra::DMatrix::identity(d, d)).norm() < 1e-5);
    }
}

#[test]
fn tarasov_decay_batch() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..150 {
        let d = 2 + trial % 4;
        let k = rng.gen_range(0..3 * d);
        let p = random_polytope(d, k, &mut rng);
        let e = max_inscribed_ellipsoid(&p, 1e-8).unwrap();
        let a = sample_unit_sphere(d, &mut rng);
        let b: f64 = a.iter().zip(e.center().iter()).map(|(x, y)| x * y).sum();
        let q = p.cut(&a, b, Provenance::Other);
        let f = max_inscribed_ellipsoid(&q, 1e-8).unwrap();
        let ratio = (f.log_volume() - e.log_volume()).exp();
        assert!(ratio <= 8.0 / 9.0 + 1e-3, "trial {trial}: ratio {ratio}");
    }
}

#[test]
fn sandwich_on_random_polytopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..20 {
        let d = 2 + trial % 5;
        let p = random_polytope(d, 2 * d, &mut rng);
        let e = max_inscribed_ellipsoid(&p, 1e-8).unwrap();
        let r = sandwich_check(&p, &e, 2000, &mut rng);
        assert!(r.ok(), "trial {trial}: {r:?}");
    }
}

#[test]
fn loosened_gap_is_reported() {
    let p = HalfspacePolytope::unit_box(3).cut(&[1.0, 1.0, 0.0], 0.2, Provenance::Other);
    let opts = JohnOptions {
        gap: 1e-2,
        ..JohnOptions::default()
    };
    let loose = john_ellipsoid(&p, &opts, None).unwrap();
    let tight = john_ellipsoid(&p, &JohnOptions::default(), None).unwrap();
    assert!(loose.gap <= 1e-2 && tight.gap <= 1e-6);
    assert!(loose.ellipsoid.log_volume() <= tight.ellipsoid.log_volume() + 1e-6);
    assert!(tight.ellipsoid.log_volume() - loose.ellipsoid.log_volume() <= 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn solver_output_is_feasible_and_deterministic(seed in any::<u64>(), d in 2usize..5, k in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polytope(d, k, &mut rng);
        let a = john_ellipsoid(&p, &JohnOptions::default(), None).unwrap();
        let b = john_ellipsoid(&p, &JohnOptions::default(), None).unwrap();
        prop_assert!(a.max_excess <= 1e-8);
        prop_assert_eq!(a.ellipsoid, b.ellipsoid);
    }

    #[test]
    fn cutting_never_increases_volume(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polytope(d, d, &mut rng);
        let e = max_inscribed_ellipsoid(&p, 1e-8).unwrap();
        // arbitrary cut that keeps the center strictly inside
        let a = sample_unit_sphere(d, &mut rng);
        let b: f64 = a.iter().zip(e.center().iter()).map(|(x, y)| x * y).sum::<f64>() + 0.1 * e.min_eigenvalue();
        let f = max_inscribed_ellipsoid(&p.cut(&a, b, Provenance::Other), 1e-8).unwrap();
        prop_assert!(f.log_volume() <= e.log_volume() + 1e-6);
    }

    #[test]
    fn framed_solve_matches_direct(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polytope(d, d, &mut rng);
        let e = max_inscribed_ellipsoid(&p, 1e-8).unwrap();
        let a = sample_unit_sphere(d, &mut rng);
        let b: f64 = a.iter().zip(e.center().iter()).map(|(x, y)| x * y).sum();
        let q = p.cut(&a, b, Provenance::Other);
        let direct = john_ellipsoid(&q, &JohnOptions::default(), None).unwrap();
        let framed = john_ellipsoid(&q, &JohnOptions::default(), Some(&e)).unwrap();
        prop_assert!((direct.ellipsoid.log_volume() - framed.ellipsoid.log_volume()).abs() < 1e-5);
        prop_assert!(framed.max_excess <= 1e-8);
    }
}
