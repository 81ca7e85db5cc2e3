use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::norm;

/// Tolerance on `λᵢ ≥ -tol` for "inside the closed simplex".
pub const INSIDE_TOL: f64 = 1e-12;

/// An n-simplex in ℝⁿ, `n ∈ {1, 2, 3}`, with its affine frame precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
    /// Row-major inverse of the edge matrix `[A₁-A₀ | … | Aₙ-A₀]`.
    inverse: Vec<f64>,
    diameter: f64,
    measure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarycentricCoords {
    pub lambdas: Vec<f64>,
}

impl BarycentricCoords {
    pub fn min(&self) -> f64 {
        self.lambdas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_inside(&self, tol: f64) -> bool {
        self.min() >= -tol
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let n = vertices.len().saturating_sub(1);
        if !(1..=3).contains(&n) || vertices.iter().any(|v| v.len() != n) {
            return Err(invalid(format!("a simplex in ℝⁿ needs n+1 points of length n with n in 1..=3, got {} points", vertices.len())));
        }
        let mut diameter = 0.0f64;
        for i in 0..vertices.len() {
            for j in 0..i {
                let d: Vec<f64> = vertices[i].iter().zip(&vertices[j]).map(|(a, b)| a - b).collect();
                diameter = diameter.max(norm(&d));
            }
        }
        let edges = DMatrix::from_fn(n, n, |r, c| vertices[c + 1][r] - vertices[0][r]);
        let measure = edges.determinant().abs() / factorial(n);
        if !(diameter > 0.0) || !(measure > 1e-12 * diameter.powi(n as i32)) {
            return Err(Error::SingularGeometry(format!("vertices {vertices:?} are affinely dependent")));
        }
        let inv = edges.try_inverse().ok_or_else(|| Error::SingularGeometry("edge matrix not invertible".into()))?;
        let inverse = (0..n * n).map(|k| inv[(k / n, k % n)]).collect();
        Ok(Self { vertices, inverse, diameter, measure })
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex_refs(&self) -> Vec<&[f64]> {
        self.vertices.iter().map(Vec::as_slice).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Length, area or volume.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Solves `Σ λᵢ Aᵢ = P`, `Σ λᵢ = 1`.
    pub fn barycentric(&self, p: &[f64]) -> BarycentricCoords {
        let n = self.dim();
        let rel: Vec<f64> = p.iter().zip(&self.vertices[0]).map(|(x, a)| x - a).collect();
        let mut lambdas = vec![0.0; n + 1];
        for i in 0..n {
            lambdas[i + 1] = (0..n).map(|j| self.inverse[i * n + j] * rel[j]).sum();
        }
        lambdas[0] = 1.0 - lambdas[1..].iter().sum::<f64>();
        BarycentricCoords { lambdas }
    }

    /// Gradients of the barycentric functions, one row per vertex.
    pub fn barycentric_gradients(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut rows: Vec<Vec<f64>> = (0..n).map(|i| self.inverse[i * n..(i + 1) * n].to_vec()).collect();
        let first = (0..n).map(|j| -rows.iter().map(|r| r[j]).sum::<f64>()).collect();
        rows.insert(0, first);
        rows
    }

    /// `Σ λᵢ Aᵢ`
    pub fn point_at(&self, lambdas: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|d| self.vertices.iter().zip(lambdas).map(|(v, l)| l * v[d]).sum()).collect()
    }

    pub fn centroid(&self) -> Vec<f64> {
        let w = 1.0 / self.vertices.len() as f64;
        self.point_at(&vec![w; self.vertices.len()])
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.barycentric(p).is_inside(tol)
    }
}

/// Free-function form of [`Simplex::barycentric`].
pub fn barycentric(s: &Simplex, p: &[f64]) -> Result<BarycentricCoords> {
    if p.len() != s.dim() {
        return Err(invalid(format!("point of length {} in a {}-simplex", p.len(), s.dim())));
    }
    Ok(s.barycentric(p))
}
