//! Degree-1 interpolation on a simplex, the gradient-corrected interpolant
//! and their pointwise error bounds.

use serde::Serialize;

use super::geometry::{Simplex, INSIDE_TOL};
use crate::error::{invalid, Error, Result};
use crate::field::{dot, hessian_matrix, norm, ScalarField, SupNorms};
use crate::quadrature::SimplexRule;

/// Vertex data of `v` on one simplex: everything `π` and `π*` need.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalInterpolant {
    pub values: Vec<f64>,
    pub gradients: Vec<Vec<f64>>,
}

impl LocalInterpolant {
    pub fn sample(s: &Simplex, v: &dyn ScalarField) -> Self {
        Self {
            values: s.vertices().iter().map(|a| v.value(a)).collect(),
            gradients: s.vertices().iter().map(|a| v.gradient(a)).collect(),
        }
    }

    /// `Σ λᵢ(P) v(Aᵢ)`
    pub fn pi(&self, lambdas: &[f64]) -> f64 {
        lambdas.iter().zip(&self.values).map(|(l, v)| l * v).sum()
    }

    /// `π(P) - ½ Σ λᵢ(P) Dv(Aᵢ).(Aᵢ - P)`
    pub fn pi_star(&self, s: &Simplex, p: &[f64], lambdas: &[f64]) -> f64 {
        let correction: f64 = s
            .vertices()
            .iter()
            .zip(&self.gradients)
            .zip(lambdas)
            .map(|((a, g), l)| {
                let pa: Vec<f64> = a.iter().zip(p).map(|(x, y)| x - y).collect();
                l * dot(g, &pa)
            })
            .sum();
        self.pi(lambdas) - 0.5 * correction
    }
}

fn locate_inside(s: &Simplex, p: &[f64]) -> Result<Vec<f64>> {
    if p.len() != s.dim() {
        return Err(invalid(format!("point of length {} in a {}-simplex", p.len(), s.dim())));
    }
    let b = s.barycentric(p);
    if !b.is_inside(INSIDE_TOL) {
        return Err(Error::OutOfElement { point: p.to_vec(), min_lambda: b.min() });
    }
    Ok(b.lambdas)
}

pub fn pi_interp(s: &Simplex, v: &dyn ScalarField, p: &[f64]) -> Result<f64> {
    let l = locate_inside(s, p)?;
    Ok(LocalInterpolant::sample(s, v).pi(&l))
}

pub fn pi_star_interp(s: &Simplex, v: &dyn ScalarField, p: &[f64]) -> Result<f64> {
    let l = locate_inside(s, p)?;
    Ok(LocalInterpolant::sample(s, v).pi_star(s, p, &l))
}

/// Pointwise interpolation error bounds on one simplex of diameter `diam`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterpBounds {
    /// `‖D²v‖∞ diam² / 2`, for `π`
    pub classical: f64,
    /// `‖Dv‖∞ diam / 2 + ‖D²v‖∞ diam² / 4`, for `π`
    pub refined: f64,
    /// `‖D²v‖∞ diam² / 4`, for `π*`
    pub corrected: f64,
    /// `min(classical, refined)`
    pub combined: f64,
}

impl InterpBounds {
    pub fn from_diameter(diam: f64, norms: SupNorms) -> Result<Self> {
        if norms.d1 < 0.0 || norms.d2 < 0.0 || diam < 0.0 {
            return Err(invalid(format!("norms and diameter must be nonnegative, got {norms:?}, diam {diam}")));
        }
        let d2 = diam * diam;
        let classical = norms.d2 / 2.0 * d2;
        let refined = norms.d1 / 2.0 * diam + norms.d2 / 4.0 * d2;
        Ok(Self { classical, refined, corrected: norms.d2 / 4.0 * d2, combined: classical.min(refined) })
    }
}

pub fn interp_error_bounds(s: &Simplex, norms: SupNorms) -> Result<InterpBounds> {
    InterpBounds::from_diameter(s.diameter(), norms)
}

/// Spectral norm of a symmetric matrix by power iteration on `‖Hx‖`.
pub fn spectral_norm_power(h: &[Vec<f64>], iterations: usize, tol: f64) -> f64 {
    let n = h.len();
    // Uneven start vector so it is unlikely to be orthogonal to the top eigenvector.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * i as f64).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|c| *c /= nx);
    let mut estimate = 0.0;
    for _ in 0..iterations {
        // iterate on H² so that ±λ of equal magnitude do not make x oscillate
        let y: Vec<f64> = h.iter().map(|row| dot(row, &x)).collect();
        let ny = norm(&y);
        if ny == 0.0 {
            return 0.0;
        }
        let z: Vec<f64> = h.iter().map(|row| dot(row, &y)).collect();
        let nz = norm(&z);
        let next = nz.sqrt().max(ny);
        x = z.iter().map(|c| c / nz).collect();
        if (next - estimate).abs() <= tol * next.max(1.0) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// `‖Dv‖∞` and `‖D²v‖∞` over `s`: closed form when the field certifies it,
/// otherwise the max over the vertices and the degree-4 quadrature points,
/// with the Hessian norm from 50 power iterations.
pub fn simplex_sup_norms(s: &Simplex, v: &dyn ScalarField) -> SupNorms {
    if let Some(n) = v.sup_norms_on_hull(&s.vertex_refs()) {
        return n;
    }
    let rule = SimplexRule::degree4(s.dim());
    let mut points: Vec<Vec<f64>> = s.vertices().to_vec();
    points.extend(rule.points.iter().map(|l| s.point_at(l)));
    points.push(s.centroid());
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    for p in &points {
        d1 = d1.max(norm(&v.gradient(p)));
        d2 = d2.max(spectral_norm_power(&hessian_matrix(v, p), 50, 1e-10));
    }
    SupNorms { d1, d2 }
}
