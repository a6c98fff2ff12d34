//! Small dense linear programs over halfspace systems, backed by `microlp`.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("LP solver failure: {0}")]
    Solver(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub point: Vec<f64>,
}

fn map_err(e: microlp::Error) -> LpError {
    match e {
        microlp::Error::Infeasible => LpError::Infeasible,
        microlp::Error::Unbounded => LpError::Unbounded,
        other => LpError::Solver(format!("{other:?}")),
    }
}

/// `max ⟨objective, w⟩` subject to `⟨a_i, w⟩ ≤ b_i`.
pub fn maximize<'a>(
    dim: usize,
    rows: impl IntoIterator<Item = (&'a [f64], f64)>,
    objective: &[f64],
) -> Result<LpSolution, LpError> {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..dim)
        .map(|i| problem.add_var(objective[i], (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for (a, b) in rows {
        let terms: Vec<_> = vars
            .iter()
            .zip(a)
            .filter(|(_, c)| **c != 0.0)
            .map(|(v, c)| (*v, *c))
            .collect();
        if terms.is_empty() {
            if b < 0.0 {
                return Err(LpError::Infeasible);
            }
            continue;
        }
        problem.add_constraint(terms.as_slice(), ComparisonOp::Le, b);
    }
    let outcome = problem.solve().map_err(map_err)?;
    let solution = outcome
        .into_solution()
        .map_err(|e| LpError::Solver(format!("interrupted: {:?}", e.termination_reason())))?;
    Ok(LpSolution {
        value: solution.objective(),
        point: vars.iter().map(|v| solution.var_value(*v)).collect(),
    })
}

/// Center and radius of the largest Euclidean ball inside `{⟨a_i, w⟩ ≤ b_i}`.
///
/// The radius is capped at `radius_cap` so that unbounded systems still
/// return a point.
pub fn chebyshev_center<'a>(
    dim: usize,
    rows: impl IntoIterator<Item = (&'a [f64], f64)>,
    radius_cap: f64,
) -> Result<(Vec<f64>, f64), LpError> {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..dim)
        .map(|_| problem.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let r = problem.add_var(1.0, (0.0, radius_cap));
    for (a, b) in rows {
        let n = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n == 0.0 {
            if b < 0.0 {
                return Err(LpError::Infeasible);
            }
            continue;
        }
        let mut terms: Vec<_> = vars
            .iter()
            .zip(a)
            .filter(|(_, c)| **c != 0.0)
            .map(|(v, c)| (*v, *c / n))
            .collect();
        terms.push((r, 1.0));
        problem.add_constraint(terms.as_slice(), ComparisonOp::Le, b / n);
    }
    let outcome = problem.solve().map_err(map_err)?;
    let solution = outcome
        .into_solution()
        .map_err(|e| LpError::Solver(format!("interrupted: {:?}", e.termination_reason())))?;
    Ok((
        vars.iter().map(|v| solution.var_value(*v)).collect(),
        solution.var_value(r),
    ))
}
