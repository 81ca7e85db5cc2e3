//! Piecewise interpolants `π_h` and `π*_h` on a triangulation.

use super::geometry::INSIDE_TOL;
use super::interp::LocalInterpolant;
use super::mesh::Triangulation;
use crate::error::{invalid, Result};
use crate::field::ScalarField;

/// Vertex values and gradients of `v` on a mesh, evaluated element by element
/// either as `π` or as `π*`.
#[derive(Clone, Debug)]
pub struct GlobalInterpolant {
    mesh: Triangulation,
    values: Vec<f64>,
    gradients: Vec<Vec<f64>>,
    corrected: bool,
}

impl GlobalInterpolant {
    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn is_corrected(&self) -> bool {
        self.corrected
    }

    fn local(&self, k: usize) -> LocalInterpolant {
        let e = &self.mesh.elements()[k];
        LocalInterpolant {
            values: e.iter().map(|&i| self.values[i]).collect(),
            gradients: e.iter().map(|&i| self.gradients[i].clone()).collect(),
        }
    }

    /// Evaluates the restriction to element `k` at `p`; `p` may lie outside
    /// the element, in which case the local polynomial is extrapolated.
    pub fn eval_in(&self, k: usize, p: &[f64]) -> Result<f64> {
        let s = self.mesh.simplices().get(k).ok_or_else(|| invalid(format!("element {k} out of range")))?;
        if p.len() != s.dim() {
            return Err(invalid(format!("point of length {} in a {}D mesh", p.len(), s.dim())));
        }
        let lambdas = s.barycentric(p).lambdas;
        let local = self.local(k);
        Ok(if self.corrected { local.pi_star(s, p, &lambdas) } else { local.pi(&lambdas) })
    }

    /// Evaluates at `p` using the lowest-indexed element containing it.
    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        let k = self.mesh.locate(p, INSIDE_TOL)?;
        self.eval_in(k, p)
    }

    /// Largest difference between the two one-sided restrictions over the
    /// interior faces, sampled at the face vertices, edge midpoints and face
    /// centroid. Zero up to rounding for both `π_h` and `π*_h`, since the face
    /// trace only involves data at the face's own vertices.
    pub fn max_face_jump(&self) -> f64 {
        let verts = self.mesh.vertices();
        let mut worst = 0.0f64;
        for face in self.mesh.interior_faces() {
            let pts: Vec<&Vec<f64>> = face.vertices.iter().map(|&i| &verts[i]).collect();
            let mut samples: Vec<Vec<f64>> = pts.iter().map(|p| p.to_vec()).collect();
            for i in 0..pts.len() {
                for j in 0..i {
                    samples.push(pts[i].iter().zip(pts[j]).map(|(a, b)| 0.5 * (a + b)).collect());
                }
            }
            let w = 1.0 / pts.len() as f64;
            samples.push((0..self.mesh.dim()).map(|d| pts.iter().map(|p| w * p[d]).sum()).collect());
            for q in &samples {
                let (Ok(a), Ok(b)) = (self.eval_in(face.elements[0], q), self.eval_in(face.elements[1], q)) else {
                    continue;
                };
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }
}

/// Samples `v` at the mesh vertices; `corrected` selects `π*_h` over `π_h`.
pub fn global_interp(mesh: &Triangulation, v: &dyn ScalarField, corrected: bool) -> Result<GlobalInterpolant> {
    if v.dim() != mesh.dim() {
        return Err(invalid(format!("{}D field on a {}D mesh", v.dim(), mesh.dim())));
    }
    Ok(GlobalInterpolant {
        mesh: mesh.clone(),
        values: mesh.vertices().iter().map(|x| v.value(x)).collect(),
        gradients: mesh.vertices().iter().map(|x| v.gradient(x)).collect(),
        corrected,
    })
}
