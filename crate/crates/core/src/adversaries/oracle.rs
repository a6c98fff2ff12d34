use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::sample_unit_sphere;
use crate::learners::poly_meta::{monomial_exponents, monomial_features};
use crate::learners::{sign, FeatureMap, Label};

/// Ground-truth labeling rule. Omitted parameters are drawn once at build time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    Linear {
        #[serde(default)]
        w: Option<Vec<f64>>,
    },
    Affine {
        #[serde(default)]
        w: Option<Vec<f64>>,
        #[serde(default)]
        b: Option<f64>,
    },
    /// `sign ⟨w, (φ₁(x₁), …, φ_d(x_d))⟩`.
    Feature {
        maps: Vec<FeatureMap>,
        #[serde(default)]
        w: Option<Vec<f64>>,
    },
    /// `sign ⟨w, monomials of degree 1..=degree⟩`.
    Polynomial {
        degree: usize,
        #[serde(default)]
        w: Option<Vec<f64>>,
    },
    /// First index attaining `max_i ⟨w^i, x⟩`.
    KClass {
        k: usize,
        #[serde(default)]
        ws: Option<Vec<Vec<f64>>>,
    },
    /// `⟨a_{f(x)}, x⟩` where `f` is the k-class rule over `gates`.
    Piecewise {
        k: usize,
        #[serde(default)]
        pieces: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        gates: Option<Vec<Vec<f64>>>,
    },
}

/// Resolved oracle with all parameters fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelOracle {
    Linear {
        w: Vec<f64>,
    },
    Affine {
        w: Vec<f64>,
        b: f64,
    },
    Feature {
        maps: Vec<FeatureMap>,
        w: Vec<f64>,
    },
    Polynomial {
        degree: usize,
        exps: Vec<Vec<u32>>,
        w: Vec<f64>,
    },
    KClass {
        ws: Vec<Vec<f64>>,
    },
    Piecewise {
        gates: Vec<Vec<f64>>,
        pieces: Vec<Vec<f64>>,
    },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn check_len(v: &[f64], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Config(format!("{what} has length {}, expected {n}", v.len())));
    }
    Ok(())
}

fn check_list(vs: &[Vec<f64>], k: usize, n: usize, what: &str) -> Result<()> {
    if vs.len() != k {
        return Err(Error::Config(format!("{what} has {} entries, expected {k}", vs.len())));
    }
    vs.iter().try_for_each(|v| check_len(v, n, what))
}

fn uniform_cube<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

impl LabelOracle {
    pub fn build<R: Rng + ?Sized>(spec: &OracleSpec, dim: usize, rng: &mut R) -> Result<Self> {
        Ok(match spec {
            OracleSpec::Linear { w } => {
                let w = w.clone().unwrap_or_else(|| sample_unit_sphere(dim, rng));
                check_len(&w, dim, "linear w")?;
                LabelOracle::Linear { w }
            }
            OracleSpec::Affine { w, b } => {
                let (w, b) = match (w, b) {
                    (Some(w), Some(b)) => (w.clone(), *b),
                    (None, None) => {
                        // ‖w‖² + b² = 1 with ‖w‖ ≥ 1/2; the hyperplane meets the ball
                        let b: f64 = rng.gen_range(-0.5..=0.5);
                        let s = (1.0 - b * b).sqrt();
                        (sample_unit_sphere(dim, rng).into_iter().map(|v| v * s).collect(), b)
                    }
                    _ => return Err(Error::Config("affine oracle needs both w and b, or neither".into())),
                };
                check_len(&w, dim, "affine w")?;
                let n = (dot(&w, &w) + b * b).sqrt();
                if n == 0.0 {
                    return Err(Error::Config("affine oracle is identically zero".into()));
                }
                let w: Vec<f64> = w.into_iter().map(|v| v / n).collect();
                let b = b / n;
                if dot(&w, &w) < 0.25 - 1e-12 {
                    return Err(Error::Config(
                        "affine oracle needs ‖w‖ ≥ 1/2 after normalization".into(),
                    ));
                }
                LabelOracle::Affine { w, b }
            }
            OracleSpec::Feature { maps, w } => {
                check_len(&vec![0.0; maps.len()], dim, "feature maps")?;
                let w = w.clone().unwrap_or_else(|| sample_unit_sphere(dim, rng));
                check_len(&w, dim, "feature w")?;
                LabelOracle::Feature { maps: maps.clone(), w }
            }
            OracleSpec::Polynomial { degree, w } => {
                if *degree == 0 {
                    return Err(Error::Config("polynomial degree must be positive".into()));
                }
                let exps = monomial_exponents(dim, *degree);
                let w = w.clone().unwrap_or_else(|| sample_unit_sphere(exps.len(), rng));
                check_len(&w, exps.len(), "polynomial w")?;
                LabelOracle::Polynomial {
                    degree: *degree,
                    exps,
                    w,
                }
            }
            OracleSpec::KClass { k, ws } => {
                if *k == 0 {
                    return Err(Error::Config("k must be positive".into()));
                }
                let ws = ws
                    .clone()
                    .unwrap_or_else(|| (0..*k).map(|_| sample_unit_sphere(dim, rng)).collect());
                check_list(&ws, *k, dim, "k_class ws")?;
                LabelOracle::KClass { ws }
            }
            OracleSpec::Piecewise { k, pieces, gates } => {
                if *k == 0 {
                    return Err(Error::Config("k must be positive".into()));
                }
                let gates = gates
                    .clone()
                    .unwrap_or_else(|| (0..*k).map(|_| sample_unit_sphere(dim, rng)).collect());
                let pieces = pieces
                    .clone()
                    .unwrap_or_else(|| (0..*k).map(|_| uniform_cube(dim, rng)).collect());
                check_list(&gates, *k, dim, "piecewise gates")?;
                check_list(&pieces, *k, dim, "piecewise pieces")?;
                LabelOracle::Piecewise { gates, pieces }
            }
        })
    }

    pub fn label(&self, x: &[f64]) -> Label {
        match self {
            LabelOracle::Linear { w } => Label::Binary(sign(dot(w, x))),
            LabelOracle::Affine { w, b } => Label::Binary(sign(dot(w, x) + b)),
            LabelOracle::Feature { maps, w } => {
                let v: Vec<f64> = maps.iter().zip(x).map(|(m, u)| m.apply(*u)).collect();
                Label::Binary(sign(dot(w, &v)))
            }
            LabelOracle::Polynomial { exps, w, .. } => Label::Binary(sign(dot(w, &monomial_features(x, exps)))),
            LabelOracle::KClass { ws } => Label::Class(argmax(ws, x)),
            LabelOracle::Piecewise { gates, pieces } => Label::Real(dot(&pieces[argmax(gates, x)], x)),
        }
    }

    /// Active piece of the piecewise oracle.
    pub fn piece(&self, x: &[f64]) -> Option<usize> {
        match self {
            LabelOracle::Piecewise { gates, .. } => Some(argmax(gates, x)),
            _ => None,
        }
    }

    /// Normal of the true halfspace in context space, where there is one.
    pub fn normal(&self) -> Option<&[f64]> {
        match self {
            LabelOracle::Linear { w } | LabelOracle::Affine { w, .. } => Some(w),
            _ => None,
        }
    }

    /// The true parameter as seen by the matching cutting-plane learner:
    /// `w` for linear, `(w, b)` for the affine lift.
    pub fn lifted_parameter(&self) -> Option<Vec<f64>> {
        match self {
            LabelOracle::Linear { w } | LabelOracle::Feature { w, .. } | LabelOracle::Polynomial { w, .. } => {
                Some(w.clone())
            }
            LabelOracle::Affine { w, b } => {
                let mut v = w.clone();
                v.push(*b);
                Some(v)
            }
            _ => None,
        }
    }
}

/// Lexicographic argmax: the first index attaining the maximum.
fn argmax(ws: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut top = dot(&ws[0], x);
    for (i, w) in ws.iter().enumerate().skip(1) {
        let v = dot(w, x);
        if v > top {
            best = i;
            top = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn linear_example() {
        let o = LabelOracle::build(
            &OracleSpec::Linear {
                w: Some(vec![1.0, 0.0]),
            },
            2,
            &mut rng(),
        )
        .unwrap();
        assert_eq!(o.label(&[0.3, -0.4]), Label::Binary(1));
    }

    #[test]
    fn k_class_ties_go_to_lower_index() {
        let spec = OracleSpec::KClass {
            k: 3,
            ws: Some(vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 0.0]]),
        };
        let o = LabelOracle::build(&spec, 2, &mut rng()).unwrap();
        assert_eq!(o.label(&[0.5, 0.1]), Label::Class(1));
    }

    #[test]
    fn single_piece_is_linear_regression() {
        let spec = OracleSpec::Piecewise {
            k: 1,
            pieces: Some(vec![vec![2.0, -1.0]]),
            gates: None,
        };
        let o = LabelOracle::build(&spec, 2, &mut rng()).unwrap();
        assert_eq!(o.label(&[0.25, 0.5]), Label::Real(0.0));
        assert_eq!(o.label(&[0.5, 0.5]), Label::Real(0.5));
    }

    #[test]
    fn affine_is_normalized() {
        for s in 0..20 {
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(s);
            let o = LabelOracle::build(&OracleSpec::Affine { w: None, b: None }, 3, &mut r).unwrap();
            let LabelOracle::Affine { w, b } = &o else {
                unreachable!()
            };
            assert!((dot(w, w) + b * b - 1.0).abs() < 1e-12);
            assert!(dot(w, w) >= 0.25);
        }
        let o = LabelOracle::build(
            &OracleSpec::Affine {
                w: Some(vec![2.0, 0.0]),
                b: Some(-1.0),
            },
            2,
            &mut rng(),
        )
        .unwrap();
        assert_eq!(o.label(&[0.6, 0.0]), Label::Binary(1));
        assert_eq!(o.label(&[0.4, 0.0]), Label::Binary(-1));
    }

    #[test]
    fn wrong_lengths_are_config_errors() {
        let e = LabelOracle::build(&OracleSpec::Linear { w: Some(vec![1.0]) }, 2, &mut rng()).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }
}
