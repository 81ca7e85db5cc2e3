//! Lagrange P1/P2 discretisation of the model problem.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use nalgebra_sparse::CooMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::norms::{l2_norm_error, PiecewiseField};
use super::problem::EllipticProblem;
use super::solver::solve_spd;
use crate::error::{invalid, Error, Result};
use crate::field::{dot, ScalarField};
use crate::quadrature::SimplexRule;
use crate::simplex::{global_interp, Triangulation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Space {
    P1,
    P2,
}

impl Space {
    pub fn degree(self) -> usize {
        match self {
            Space::P1 => 1,
            Space::P2 => 2,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::P1 => "P1",
            Space::P2 => "P2",
        })
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" | "1" => Ok(Space::P1),
            "P2" | "2" => Ok(Space::P2),
            _ => Err(invalid(format!("unknown space `{s}`, expected P1 or P2"))),
        }
    }
}

/// Global numbering: vertices first, then (for P2) edges in sorted order.
/// Local order on an element is its vertices followed by the edges
/// `(0,1), (0,2), …, (n-1,n)`.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub element_dofs: Vec<Vec<usize>>,
    /// Coordinates of each nodal point.
    pub points: Vec<Vec<f64>>,
}

impl DofMap {
    pub fn new(mesh: &Triangulation, space: Space) -> Self {
        let mut points = mesh.vertices().to_vec();
        let mut element_dofs: Vec<Vec<usize>> = mesh.elements().to_vec();
        if space == Space::P2 {
            let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for e in mesh.elements() {
                for (i, j) in local_edges(e.len()) {
                    let key = (e[i].min(e[j]), e[i].max(e[j]));
                    edges.entry(key).or_insert(0);
                }
            }
            let nv = points.len();
            for (n, ((a, b), slot)) in edges.iter_mut().enumerate() {
                *slot = nv + n;
                let (pa, pb) = (&mesh.vertices()[*a], &mesh.vertices()[*b]);
                points.push(pa.iter().zip(pb).map(|(x, y)| 0.5 * (x + y)).collect());
            }
            for e in &mut element_dofs {
                let verts = e.clone();
                for (i, j) in local_edges(verts.len()) {
                    e.push(edges[&(verts[i].min(verts[j]), verts[i].max(verts[j]))]);
                }
            }
        }
        Self { element_dofs, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn local_edges(nverts: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..nverts).flat_map(move |i| (i + 1..nverts).map(move |j| (i, j)))
}

/// Shape function values and gradients at barycentric point `l` given the
/// barycentric gradients `g`.
fn shape(space: Space, l: &[f64], g: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    match space {
        Space::P1 => (l.to_vec(), g.to_vec()),
        Space::P2 => {
            let mut vals = Vec::new();
            let mut grads = Vec::new();
            for i in 0..l.len() {
                vals.push(l[i] * (2.0 * l[i] - 1.0));
                grads.push(g[i].iter().map(|c| (4.0 * l[i] - 1.0) * c).collect());
            }
            for (i, j) in local_edges(l.len()) {
                vals.push(4.0 * l[i] * l[j]);
                grads.push(g[i].iter().zip(&g[j]).map(|(a, b)| 4.0 * (l[j] * a + l[i] * b)).collect());
            }
            (vals, grads)
        }
    }
}

/// Galerkin solution together with its measured errors.
#[derive(Clone, Debug)]
pub struct FemSolution {
    pub space: Space,
    pub mesh: Triangulation,
    pub dofs: DofMap,
    pub dof_values: Vec<f64>,
    /// `‖u − u_h‖_{L²}`, when the exact solution is known.
    pub l2_error: Option<f64>,
    /// `‖u − π_h u‖_{L²}` for P1, `‖u − π*_h u‖_{L²}` for P2.
    pub interp_l2_error: Option<f64>,
    /// `|u − u_h|_{H¹}`, reported as a diagnostic only.
    pub h1_semi_error: Option<f64>,
    /// Relative residual of the linear solve.
    pub solve_residual: f64,
    pub iterations: usize,
}

impl FemSolution {
    pub fn mesh_size(&self) -> f64 {
        self.mesh.mesh_size()
    }

    pub fn eval_in_element(&self, k: usize, p: &[f64]) -> f64 {
        let s = &self.mesh.simplices()[k];
        let (vals, _) = shape(self.space, &s.barycentric(p).lambdas, &s.barycentric_gradients());
        vals.iter().zip(&self.dofs.element_dofs[k]).map(|(phi, &d)| phi * self.dof_values[d]).sum()
    }

    pub fn gradient_in_element(&self, k: usize, p: &[f64]) -> Vec<f64> {
        let s = &self.mesh.simplices()[k];
        let (_, grads) = shape(self.space, &s.barycentric(p).lambdas, &s.barycentric_gradients());
        let mut out = vec![0.0; s.dim()];
        for (g, &d) in grads.iter().zip(&self.dofs.element_dofs[k]) {
            for (o, c) in out.iter_mut().zip(g) {
                *o += c * self.dof_values[d];
            }
        }
        out
    }
}

impl PiecewiseField for FemSolution {
    fn value_in(&self, k: usize, p: &[f64]) -> f64 {
        self.eval_in_element(k, p)
    }
}

fn h1_semi_error(sol: &FemSolution, exact: &dyn ScalarField) -> f64 {
    let rule = SimplexRule::degree4(sol.mesh.dim());
    sol.mesh
        .simplices()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let local: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(l, w)| {
                    let x = s.point_at(l);
                    let d: Vec<f64> = exact.gradient(&x).iter().zip(sol.gradient_in_element(k, &x)).map(|(a, b)| a - b).collect();
                    w * dot(&d, &d)
                })
                .sum();
            s.measure() * local
        })
        .sum::<f64>()
        .sqrt()
}

/// Assembles `a(u_h, v_h) = l(v_h)` on `mesh`, imposes the Dirichlet data at
/// nodal points on the box boundary, and solves.
pub fn assemble_and_solve(p: &EllipticProblem, mesh: &Triangulation, space: Space) -> Result<FemSolution> {
    if mesh.dim() != p.dim() {
        return Err(invalid(format!("{}D mesh for a {}D problem", mesh.dim(), p.dim())));
    }
    let faces = mesh.face_report();
    if !faces.is_conforming() {
        return Err(invalid(format!("mesh is not conforming: {faces:?}")));
    }
    let dofs = DofMap::new(mesh, space);
    let fixed: Vec<bool> = dofs.points.iter().map(|x| mesh.on_boundary(x)).collect();
    if p.reaction == 0.0 && !fixed.iter().any(|&b| b) {
        return Err(Error::Solver("no Dirichlet nodes and zero reaction: the system is singular".into()));
    }
    let mut free_index = vec![usize::MAX; dofs.len()];
    let mut n_free = 0;
    for (d, &is_fixed) in fixed.iter().enumerate() {
        if !is_fixed {
            free_index[d] = n_free;
            n_free += 1;
        }
    }
    let g: Vec<f64> = dofs.points.iter().zip(&fixed).map(|(x, &b)| if b { p.boundary_value(x) } else { 0.0 }).collect();

    let rule = SimplexRule::degree4(mesh.dim());
    let locals: Vec<(Vec<f64>, Vec<f64>)> = mesh
        .simplices()
        .par_iter()
        .map(|s| {
            let bg = s.barycentric_gradients();
            let nl = match space {
                Space::P1 => s.dim() + 1,
                Space::P2 => (s.dim() + 1) * (s.dim() + 2) / 2,
            };
            let mut kmat = vec![0.0; nl * nl];
            let mut load = vec![0.0; nl];
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                let wq = w * s.measure();
                let (vals, grads) = shape(space, l, &bg);
                let f = p.rhs.value(&s.point_at(l));
                for i in 0..nl {
                    load[i] += wq * f * vals[i];
                    for j in 0..nl {
                        kmat[i * nl + j] += wq * (p.diffusion * dot(&grads[i], &grads[j]) + p.reaction * vals[i] * vals[j]);
                    }
                }
            }
            (kmat, load)
        })
        .collect();

    let mut coo = CooMatrix::new(n_free, n_free);
    let mut b = DVector::zeros(n_free);
    for ((kmat, load), ed) in locals.iter().zip(&dofs.element_dofs) {
        let nl = ed.len();
        for i in 0..nl {
            let fi = free_index[ed[i]];
            if fi == usize::MAX {
                continue;
            }
            b[fi] += load[i];
            for j in 0..nl {
                let kij = kmat[i * nl + j];
                match free_index[ed[j]] {
                    usize::MAX => b[fi] -= kij * g[ed[j]],
                    fj => coo.push(fi, fj, kij),
                }
            }
        }
    }
    let solve = solve_spd(&coo, &b)?;
    let dof_values: Vec<f64> = (0..dofs.len()).map(|d| if fixed[d] { g[d] } else { solve.x[free_index[d]] }).collect();

    let mut sol = FemSolution {
        space,
        mesh: mesh.clone(),
        dofs,
        dof_values,
        l2_error: None,
        interp_l2_error: None,
        h1_semi_error: None,
        solve_residual: solve.relative_residual,
        iterations: solve.iterations,
    };
    if let Some(u) = &p.exact {
        sol.l2_error = Some(l2_norm_error(mesh, &sol, u.as_ref()));
        let interp = global_interp(mesh, u.as_ref(), space == Space::P2)?;
        sol.interp_l2_error = Some(l2_norm_error(mesh, &interp, u.as_ref()));
        sol.h1_semi_error = Some(h1_semi_error(&sol, u.as_ref()));
    }
    Ok(sol)
}
