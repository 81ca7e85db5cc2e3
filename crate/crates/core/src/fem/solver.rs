//! Linear solves for the assembled SPD systems.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::error::{Error, Result};

/// Systems up to this many unknowns go through dense LU.
pub const DENSE_LIMIT: usize = 2000;
pub const CG_TOL: f64 = 1e-12;

/// Outcome of a solve: the solution and the relative residual `‖Ax − b‖/‖b‖`
/// (absolute when `b = 0`).
#[derive(Clone, Debug)]
pub struct LinearSolve {
    pub x: DVector<f64>,
    pub relative_residual: f64,
    pub iterations: usize,
}

fn residual(a: &CsrMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let r = a * x - b;
    let nb = b.norm();
    if nb > 0.0 { r.norm() / nb } else { r.norm() }
}

/// Preconditioner-free conjugate gradients, stopping at `‖r‖ ≤ tol ‖b‖`.
pub fn conjugate_gradient(a: &CsrMatrix<f64>, b: &DVector<f64>, tol: f64, max_iter: usize) -> Result<LinearSolve> {
    let n = b.len();
    let mut x = DVector::zeros(n);
    let target = tol * b.norm();
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let mut it = 0;
    while rr.sqrt() > target {
        if it == max_iter {
            return Err(Error::Solver(format!("CG did not converge in {max_iter} iterations (residual {:e})", rr.sqrt())));
        }
        let ap = a * &p;
        let pap = p.dot(&ap);
        if !(pap > 0.0) {
            return Err(Error::Solver(format!("matrix is not positive definite (pᵀAp = {pap:e})")));
        }
        let alpha = rr / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_next = r.dot(&r);
        p = &r + (rr_next / rr) * p;
        rr = rr_next;
        it += 1;
    }
    let relative_residual = residual(a, &x, b);
    Ok(LinearSolve { x, relative_residual, iterations: it })
}

/// Dense LU below [`DENSE_LIMIT`] unknowns, CG above.
pub fn solve_spd(coo: &CooMatrix<f64>, b: &DVector<f64>) -> Result<LinearSolve> {
    let n = b.len();
    let a = CsrMatrix::from(coo);
    if n == 0 {
        return Ok(LinearSolve { x: DVector::zeros(0), relative_residual: 0.0, iterations: 0 });
    }
    if n <= DENSE_LIMIT {
        let dense = DMatrix::from(&a);
        let scale = dense.amax();
        let lu = dense.lu();
        let u = lu.u();
        let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
        if !(min_pivot > 1e-14 * scale) {
            return Err(Error::Solver(format!("singular system (smallest pivot {min_pivot:e})")));
        }
        let x = lu.solve(b).ok_or_else(|| Error::Solver("singular system".into()))?;
        let relative_residual = residual(&a, &x, b);
        Ok(LinearSolve { x, relative_residual, iterations: 0 })
    } else {
        conjugate_gradient(&a, b, CG_TOL, 10 * n)
    }
}
