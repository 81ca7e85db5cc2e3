//! Lagrange finite elements for `-κ Δu + r u = f` on a box, with the
//! measured L² errors needed to test the a priori interpolation chains.

mod assembly;
mod estimate;
mod norms;
mod problem;
mod solver;

pub use assembly::{assemble_and_solve, DofMap, FemSolution, Space};
pub use estimate::{cea_gap, estimate_report, mesh_savings, EstimateReport, MeshSavings};
pub use norms::{l2_norm_error, PiecewiseField, Restricted};
pub use problem::{default_constants, poincare_constant_sq, EllipticProblem, FormConstants};
pub use solver::{conjugate_gradient, solve_spd, LinearSolve, CG_TOL, DENSE_LIMIT};
