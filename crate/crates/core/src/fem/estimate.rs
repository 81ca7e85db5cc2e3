//! A priori L² error chains and the mesh-coarsening arithmetic.

use serde::Serialize;

use super::assembly::{assemble_and_solve, FemSolution, Space};
use super::problem::EllipticProblem;
use crate::error::{invalid, Error, Result};
use crate::field::SupNorms;
use crate::simplex::Triangulation;

/// `(‖u − u_h‖, (C/α) ‖u − π_h u‖)` in L², with `π*_h` in place of `π_h` for P2.
///
/// This is the quasi-optimality chain carried out in L² rather than in the
/// energy space; it is a measured check, not a theorem.
pub fn cea_gap(sol: &FemSolution, p: &EllipticProblem) -> Result<(f64, f64)> {
    match (p.exact.as_ref(), sol.l2_error, sol.interp_l2_error) {
        (Some(_), Some(lhs), Some(interp)) => Ok((lhs, p.constants.ratio() * interp)),
        _ => Err(Error::Unsupported("the quasi-optimality check needs an exact solution".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub space: Space,
    pub h: f64,
    pub dofs: usize,
    /// `μ(Ω)` as the sum of simplex measures.
    pub measure: f64,
    pub norms: SupNorms,
    pub c_over_alpha: f64,
    pub measured_solution_error: f64,
    pub measured_interp_error: f64,
    pub h1_semi_error: f64,
    /// `‖D²u‖∞ h²/2 · √μ`
    pub interp_bound_classical: f64,
    /// `(‖Du‖∞ h/2 + ‖D²u‖∞ h²/4) · √μ`
    pub interp_bound_refined: f64,
    /// `‖D²u‖∞ h²/4 · √μ`
    pub interp_bound_corrected: f64,
    pub cea_rhs_classical: f64,
    pub cea_rhs_refined: f64,
    pub cea_rhs_corrected: f64,
}

impl EstimateReport {
    /// Interpolation bound that applies to the measured interpolation error:
    /// the min of classical and refined for `π_h`, the corrected one for `π*_h`.
    pub fn interp_bound(&self) -> f64 {
        match self.space {
            Space::P1 => self.interp_bound_classical.min(self.interp_bound_refined),
            Space::P2 => self.interp_bound_corrected,
        }
    }

    /// `(C/α) ·` [`EstimateReport::interp_bound`].
    pub fn cea_rhs(&self) -> f64 {
        match self.space {
            Space::P1 => self.cea_rhs_classical.min(self.cea_rhs_refined),
            Space::P2 => self.cea_rhs_corrected,
        }
    }

    pub fn classical_branch_selected(&self) -> bool {
        self.cea_rhs_classical <= self.cea_rhs_refined
    }

    pub fn interp_within_bound(&self) -> bool {
        self.measured_interp_error <= self.interp_bound()
    }
}

/// Solves on `mesh` and fills in the measured errors next to the bound values.
pub fn estimate_report(p: &EllipticProblem, mesh: &Triangulation, space: Space) -> Result<EstimateReport> {
    let exact = p.exact.as_ref().ok_or_else(|| Error::Unsupported("estimate report needs an exact solution".into()))?;
    let corners = box_corners(&p.domain.lo, &p.domain.hi);
    let refs: Vec<&[f64]> = corners.iter().map(Vec::as_slice).collect();
    let norms = exact
        .sup_norms_on_hull(&refs)
        .ok_or_else(|| Error::Unsupported("estimate report needs analytic derivative norms of the exact solution".into()))?;
    let sol = assemble_and_solve(p, mesh, space)?;
    let h = mesh.mesh_size();
    let measure = mesh.measure();
    let root = measure.sqrt();
    let interp_bound_classical = norms.d2 / 2.0 * h * h * root;
    let interp_bound_refined = (norms.d1 / 2.0 * h + norms.d2 / 4.0 * h * h) * root;
    let interp_bound_corrected = norms.d2 / 4.0 * h * h * root;
    let ratio = p.constants.ratio();
    Ok(EstimateReport {
        space,
        h,
        dofs: sol.dof_values.len(),
        measure,
        norms,
        c_over_alpha: ratio,
        measured_solution_error: sol.l2_error.unwrap_or(f64::NAN),
        measured_interp_error: sol.interp_l2_error.unwrap_or(f64::NAN),
        h1_semi_error: sol.h1_semi_error.unwrap_or(f64::NAN),
        interp_bound_classical,
        interp_bound_refined,
        interp_bound_corrected,
        cea_rhs_classical: ratio * interp_bound_classical,
        cea_rhs_refined: ratio * interp_bound_refined,
        cea_rhs_corrected: ratio * interp_bound_corrected,
    })
}

fn box_corners(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    (0..1usize << lo.len())
        .map(|mask| (0..lo.len()).map(|d| if mask >> d & 1 == 1 { hi[d] } else { lo[d] }).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeshSavings {
    pub h_classical: f64,
    pub h_corrected: f64,
    /// `h_corrected / h_classical`
    pub ratio: f64,
    /// Node count of the corrected mesh relative to the classical one.
    pub node_factor: f64,
}

/// Largest mesh sizes for which the classical and corrected L² chains stay
/// below `eps`: `h = √(2αε/(C‖D²u‖∞))` and `h* = √(4αε/(C‖D²u‖∞))`.
pub fn mesh_savings(eps: f64, d2_inf: f64, continuity: f64, ellipticity: f64, dim: usize) -> Result<MeshSavings> {
    for (name, v) in [("eps", eps), ("d2", d2_inf), ("C", continuity), ("alpha", ellipticity)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(format!("{name} must be positive and finite, got {v}")));
        }
    }
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let h_classical = (2.0 * ellipticity * eps / (continuity * d2_inf)).sqrt();
    let h_corrected = (4.0 * ellipticity * eps / (continuity * d2_inf)).sqrt();
    Ok(MeshSavings {
        h_classical,
        h_corrected,
        ratio: h_corrected / h_classical,
        node_factor: std::f64::consts::FRAC_1_SQRT_2.powi(dim as i32),
    })
}
