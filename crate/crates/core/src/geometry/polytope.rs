use serde::{Deserialize, Serialize};

use super::lp::{self, LpError};

/// Where a constraint came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// One of the `2d` permanent facets `±e_i ≤ 1`.
    BoxFacet,
    /// A cut added from a labelled example in round `round`.
    DataCut { round: u64 },
    /// Anything else (tests, ad-hoc polytopes).
    Other,
}

/// One halfspace `⟨normal, w⟩ ≤ offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub provenance: Provenance,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64, provenance: Provenance) -> Self {
        Self {
            normal,
            offset,
            provenance,
        }
    }

    /// `⟨normal, w⟩ - offset`; positive means violated.
    pub fn excess(&self, w: &[f64]) -> f64 {
        dot(&self.normal, w) - self.offset
    }
}

/// Intersection of halfspaces in `R^dim`, always including the box `[-1, 1]^dim`.
///
/// Operations are value-semantic: [`HalfspacePolytope::cut`] returns a new
/// polytope and leaves `self` untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspacePolytope {
    dim: usize,
    constraints: Vec<Halfspace>,
}

impl HalfspacePolytope {
    /// The box `[-1, 1]^dim`.
    pub fn unit_box(dim: usize) -> Self {
        assert!(dim > 0, "polytope dimension must be positive");
        let mut constraints = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut normal = vec![0.0; dim];
                normal[i] = sign;
                constraints.push(Halfspace::new(normal, 1.0, Provenance::BoxFacet));
            }
        }
        Self { dim, constraints }
    }

    /// The axis-aligned box `∏ [-half_widths[i], half_widths[i]]`.
    ///
    /// The facets are tagged as box facets but, unlike [`Self::unit_box`],
    /// need not be the unit box; used for analytic test cases.
    pub fn axis_box(half_widths: &[f64]) -> Self {
        let dim = half_widths.len();
        assert!(dim > 0, "polytope dimension must be positive");
        let mut constraints = Vec::with_capacity(2 * dim);
        for (i, &h) in half_widths.iter().enumerate() {
            for sign in [1.0, -1.0] {
                let mut normal = vec![0.0; dim];
                normal[i] = sign;
                constraints.push(Halfspace::new(normal, h, Provenance::BoxFacet));
            }
        }
        Self { dim, constraints }
    }

    /// Build from raw halfspaces; the unit-box facets are prepended.
    pub fn from_halfspaces(dim: usize, halfspaces: impl IntoIterator<Item = (Vec<f64>, f64)>) -> Self {
        let mut poly = Self::unit_box(dim);
        for (normal, offset) in halfspaces {
            poly.push_cut(normal, offset, Provenance::Other);
        }
        poly
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Halfspace] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Number of constraints that are not box facets.
    pub fn data_cut_count(&self) -> usize {
        self.constraints
            .iter()
            .filter(|h| h.provenance != Provenance::BoxFacet)
            .count()
    }

    /// `self ∩ {⟨normal, w⟩ ≤ offset}` as a new polytope.
    pub fn cut(&self, normal: &[f64], offset: f64, provenance: Provenance) -> Self {
        let mut next = self.clone();
        next.push_cut(normal.to_vec(), offset, provenance);
        next
    }

    /// In-place variant of [`Self::cut`].
    pub fn push_cut(&mut self, normal: Vec<f64>, offset: f64, provenance: Provenance) {
        assert_eq!(normal.len(), self.dim, "cut normal has wrong dimension");
        assert!(norm(&normal) > 0.0, "cut normal must be nonzero");
        self.constraints.push(Halfspace::new(normal, offset, provenance));
    }

    /// Remove the constraint at `index`.
    pub fn remove(&mut self, index: usize) -> Halfspace {
        self.constraints.remove(index)
    }

    /// True iff every constraint holds within `slack`.
    pub fn contains(&self, point: &[f64], slack: f64) -> bool {
        self.constraints.iter().all(|h| h.excess(point) <= slack)
    }

    /// Largest constraint excess at `point` (≤ 0 means inside).
    pub fn max_excess(&self, point: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|h| h.excess(point))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max ⟨direction, w⟩` over the polytope.
    pub fn support(&self, direction: &[f64]) -> Result<f64, LpError> {
        lp::maximize(
            self.dim,
            self.constraints.iter().map(|h| (&h.normal[..], h.offset)),
            direction,
        )
        .map(|sol| sol.value)
    }

    /// Whether constraint `index` is implied by the others (within `eps`).
    pub fn is_redundant(&self, index: usize, eps: f64) -> Result<bool, LpError> {
        let target = &self.constraints[index];
        let others = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != index)
            .map(|(_, h)| (&h.normal[..], h.offset));
        match lp::maximize(self.dim, others, &target.normal) {
            Ok(sol) => Ok(sol.value <= target.offset + eps * (1.0 + target.offset.abs())),
            // Without the target the rest is empty, so every member satisfies it.
            Err(LpError::Infeasible) => Ok(true),
            Err(LpError::Unbounded) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Returns a polytope with the same member set, dropping every constraint
    /// that one LP certifies as implied by the remaining ones.
    ///
    /// Constraints are examined newest first; box facets are never removed.
    pub fn prune_redundant(&self) -> Result<Self, LpError> {
        let mut out = self.clone();
        out.prune_in_place()?;
        Ok(out)
    }

    /// In-place variant of [`Self::prune_redundant`]; returns the number removed.
    pub fn prune_in_place(&mut self) -> Result<usize, LpError> {
        let mut removed = 0;
        let mut i = self.constraints.len();
        while i > 0 {
            i -= 1;
            if self.constraints[i].provenance == Provenance::BoxFacet {
                continue;
            }
            if self.is_redundant(i, PRUNE_EPS)? {
                self.constraints.remove(i);
                removed += 1;
            }
        }
        Ok(removed)
    }

    /// Like [`Self::prune_in_place`] but box facets may also be removed.
    pub fn prune_all_in_place(&mut self) -> Result<usize, LpError> {
        let mut removed = 0;
        let mut i = self.constraints.len();
        while i > 0 {
            i -= 1;
            if self.is_redundant(i, PRUNE_EPS)? {
                self.constraints.remove(i);
                removed += 1;
            }
        }
        Ok(removed)
    }
}

/// Relative tolerance for redundancy certificates.
pub const PRUNE_EPS: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
