//! Element-wise L² distances between piecewise functions and exact fields.

use crate::field::ScalarField;
use crate::quadrature::SimplexRule;
use crate::simplex::{GlobalInterpolant, Triangulation};

/// A function given by one polynomial per mesh element.
pub trait PiecewiseField: Sync {
    /// Value of the restriction to element `k` at `p`.
    fn value_in(&self, k: usize, p: &[f64]) -> f64;
}

impl PiecewiseField for GlobalInterpolant {
    fn value_in(&self, k: usize, p: &[f64]) -> f64 {
        self.eval_in(k, p).expect("element index and dimension come from the mesh")
    }
}

/// Views an ordinary field as a piecewise one.
pub struct Restricted<'a>(pub &'a dyn ScalarField);

impl PiecewiseField for Restricted<'_> {
    fn value_in(&self, _k: usize, p: &[f64]) -> f64 {
        self.0.value(p)
    }
}

/// `(Σₖ ∫_{Sₖ} (exact − approx)²)^{1/2}` with the degree-4 rule on each simplex.
pub fn l2_norm_error(mesh: &Triangulation, approx: &dyn PiecewiseField, exact: &dyn ScalarField) -> f64 {
    let rule = SimplexRule::degree4(mesh.dim());
    mesh.simplices()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let local: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(l, w)| {
                    let x = s.point_at(l);
                    let e = exact.value(&x) - approx.value_in(k, &x);
                    w * e * e
                })
                .sum();
            s.measure() * local
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BoxDomain, FnField};
    use crate::simplex::{global_interp, uniform_mesh};

    #[test]
    fn reference_values() {
        let line = uniform_mesh(&BoxDomain::unit(1), 1).unwrap();
        let x = FnField::new(1, |p| p[0]);
        let zero = FnField::constant(1, 0.0);
        assert!((l2_norm_error(&line, &Restricted(&zero), &x) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let square = uniform_mesh(&BoxDomain::unit(2), 1).unwrap();
        assert_eq!(square.len(), 2);
        let one = FnField::constant(2, 1.0);
        let zero2 = FnField::constant(2, 0.0);
        assert!((l2_norm_error(&square, &Restricted(&zero2), &one) - 1.0).abs() < 1e-15);
        let v = FnField::new(2, |p| (p[0] * p[1]).exp());
        assert!(l2_norm_error(&square, &Restricted(&v), &v) < 1e-13);
    }

    #[test]
    fn exact_for_quartic_integrands() {
        // π_h of x² on one interval is x; ∫₀¹ (x² − x)² = 1/30
        let line = uniform_mesh(&BoxDomain::unit(1), 1).unwrap();
        let sq = FnField::new(1, |p| p[0] * p[0]).with_gradient(|p| vec![2.0 * p[0]]);
        let pi = global_interp(&line, &sq, false).unwrap();
        assert!((l2_norm_error(&line, &pi, &sq) - (1.0f64 / 30.0).sqrt()).abs() < 1e-15);
    }
}
