//! Halfspace polytopes, ellipsoids and the John ellipsoid solver.

pub mod ellipsoid;
pub mod john;
pub mod lp;
pub mod polytope;
pub mod sampling;

pub use ellipsoid::{log_unit_ball_volume, Ellipsoid};
pub use john::{john_ellipsoid, max_inscribed_ellipsoid, JohnOptions, JohnSolution};
pub use lp::{LpError, LpSolution};
pub use polytope::{Halfspace, HalfspacePolytope, Provenance, PRUNE_EPS};
pub use sampling::{hit_and_run, sample_uniform_ball, sample_unit_sphere, sandwich_check, SandwichReport};
