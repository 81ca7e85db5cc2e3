//! Scalar fields on ℝⁿ together with the derivative certificates used by the
//! remainder and interpolation bounds.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `a + t * h`
pub(crate) fn axpy(a: &[f64], t: f64, h: &[f64]) -> Vec<f64> {
    a.iter().zip(h).map(|(x, d)| x + t * d).collect()
}

/// Axis-aligned box standing in for the open domain of a field.
///
/// Infinite bounds are allowed; `BoxDomain::unbounded(n)` is all of ℝⁿ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(invalid("box bounds must be nonempty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(invalid(format!("degenerate box {lo:?} .. {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn unbounded(dim: usize) -> Self {
        Self { lo: vec![f64::NEG_INFINITY; dim], hi: vec![f64::INFINITY; dim] }
    }

    pub fn unit(dim: usize) -> Self {
        Self { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self { lo: vec![lo; dim], hi: vec![hi; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }

    pub fn measure(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

/// Bounds of the first and second directional derivatives along a segment
/// `[a, a + h]`, normalised by `‖h‖` and `‖h‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SegmentBounds {
    pub m2: f64,
    pub big_m2: f64,
    pub m1: f64,
    pub big_m1: f64,
    pub source: BoundsSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundsSource {
    /// Derived in closed form from the field definition.
    Analytic,
    /// Min/max over sample points; not certified.
    Sampled,
    /// Supplied by the caller.
    User,
}

impl SegmentBounds {
    pub fn new(m2: f64, big_m2: f64, m1: f64, big_m1: f64, source: BoundsSource) -> Result<Self> {
        if !(m2 <= big_m2) || !(m1 <= big_m1) {
            return Err(invalid(format!("segment bounds out of order: m2={m2}, M2={big_m2}, m1={m1}, M1={big_m1}")));
        }
        Ok(Self { m2, big_m2, m1, big_m1, source })
    }

    pub fn is_certified(&self) -> bool {
        self.source != BoundsSource::Sampled
    }
}

/// Sup norms of `Dv` (Euclidean operator norm) and `D²v` (spectral norm)
/// over some region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupNorms {
    pub d1: f64,
    pub d2: f64,
}

/// A twice differentiable real function on a box in ℝⁿ.
///
/// Implementors must be reentrant; every method takes `&self` and the trait
/// requires `Send + Sync`.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn domain(&self) -> BoxDomain {
        BoxDomain::unbounded(self.dim())
    }

    fn value(&self, x: &[f64]) -> f64;

    /// Gradient vector, so that `Df(x).(h) = gradient(x) · h`.
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn derivative(&self, x: &[f64], h: &[f64]) -> f64 {
        dot(&self.gradient(x), h)
    }

    /// `D²f(x).(h, k)`.
    ///
    /// The default differentiates the gradient by central differences with
    /// step `1e-5 (1 + ‖x‖)` and symmetrises the result, so it carries an
    /// O(1e-10) truncation error on top of rounding. Fields with a closed form
    /// Hessian should override it.
    fn hessian_form(&self, x: &[f64], h: &[f64], k: &[f64]) -> f64 {
        let one_sided = |u: &[f64], v: &[f64]| {
            let nv = norm(v);
            if nv == 0.0 {
                return 0.0;
            }
            let step = 1e-5 * (1.0 + norm(x));
            let dir: Vec<f64> = v.iter().map(|c| c / nv).collect();
            let plus = self.derivative(&axpy(x, step, &dir), u);
            let minus = self.derivative(&axpy(x, -step, &dir), u);
            nv * (plus - minus) / (2.0 * step)
        };
        0.5 * (one_sided(h, k) + one_sided(k, h))
    }

    fn has_analytic_hessian(&self) -> bool {
        false
    }

    /// Certified bounds along `[a, a + h]`, when available in closed form.
    fn segment_bounds(&self, _a: &[f64], _h: &[f64]) -> Option<SegmentBounds> {
        None
    }

    /// Certified sup norms of `Dv` and `D²v` over the convex hull of `points`.
    fn sup_norms_on_hull(&self, _points: &[&[f64]]) -> Option<SupNorms> {
        None
    }
}

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn domain(&self) -> BoxDomain {
        (**self).domain()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn derivative(&self, x: &[f64], h: &[f64]) -> f64 {
        (**self).derivative(x, h)
    }
    fn hessian_form(&self, x: &[f64], h: &[f64], k: &[f64]) -> f64 {
        (**self).hessian_form(x, h, k)
    }
    fn has_analytic_hessian(&self) -> bool {
        (**self).has_analytic_hessian()
    }
    fn segment_bounds(&self, a: &[f64], h: &[f64]) -> Option<SegmentBounds> {
        (**self).segment_bounds(a, h)
    }
    fn sup_norms_on_hull(&self, points: &[&[f64]]) -> Option<SupNorms> {
        (**self).sup_norms_on_hull(points)
    }
}

/// Hessian matrix assembled column by column from `hessian_form`.
pub fn hessian_matrix(f: &dyn ScalarField, x: &[f64]) -> Vec<Vec<f64>> {
    let n = f.dim();
    let basis = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    (0..n)
        .map(|i| (0..n).map(|j| f.hessian_form(x, &basis(i), &basis(j))).collect())
        .collect()
}

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type HessFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync>;

/// Field assembled from closures. Missing derivatives fall back to central
/// differences.
#[derive(Clone)]
pub struct FnField {
    dim: usize,
    domain: BoxDomain,
    value: ValueFn,
    gradient: Option<GradFn>,
    hessian: Option<HessFn>,
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("gradient", &self.gradient.is_some())
            .field("hessian", &self.hessian.is_some())
            .finish()
    }
}

impl FnField {
    pub fn new(dim: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { dim, domain: BoxDomain::unbounded(dim), value: Arc::new(value), gradient: None, hessian: None }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(mut self, h: impl Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Self {
        self.domain = domain;
        self
    }

    /// The constant field `c`.
    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, move |_| c)
            .with_gradient(move |x| vec![0.0; x.len()])
            .with_hessian(|_, _, _| 0.0)
    }
}

impl ScalarField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn domain(&self) -> BoxDomain {
        self.domain.clone()
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.gradient {
            Some(g) => g(x),
            None => {
                let step = 1e-6 * (1.0 + norm(x));
                (0..self.dim)
                    .map(|i| {
                        let mut p = x.to_vec();
                        let mut m = x.to_vec();
                        p[i] += step;
                        m[i] -= step;
                        ((self.value)(&p) - (self.value)(&m)) / (2.0 * step)
                    })
                    .collect()
            }
        }
    }

    fn hessian_form(&self, x: &[f64], h: &[f64], k: &[f64]) -> f64 {
        match &self.hessian {
            Some(hf) => hf(x, h, k),
            None => {
                // Re-enter the trait default.
                struct NoHess<'a>(&'a FnField);
                impl ScalarField for NoHess<'_> {
                    fn dim(&self) -> usize {
                        self.0.dim
                    }
                    fn value(&self, x: &[f64]) -> f64 {
                        self.0.value(x)
                    }
                    fn gradient(&self, x: &[f64]) -> Vec<f64> {
                        self.0.gradient(x)
                    }
                }
                NoHess(self).hessian_form(x, h, k)
            }
        }
    }

    fn has_analytic_hessian(&self) -> bool {
        self.hessian.is_some()
    }
}

/// Outcome of the central-difference gradient check at one `(x, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientCheck {
    pub finite_difference: f64,
    pub analytic: f64,
    pub tolerance: f64,
}

impl GradientCheck {
    pub fn passed(&self) -> bool {
        (self.finite_difference - self.analytic).abs() <= self.tolerance
    }
}

/// Compares `Df(x).(h)` against a central difference of `f` with step `1e-5`
/// along `h`, tolerance `1e-6 (1 + |Df(x).(h)|)`.
pub fn check_gradient(f: &dyn ScalarField, x: &[f64], h: &[f64]) -> GradientCheck {
    const STEP: f64 = 1e-5;
    let analytic = f.derivative(x, h);
    let fd = (f.value(&axpy(x, STEP, h)) - f.value(&axpy(x, -STEP, h))) / (2.0 * STEP);
    GradientCheck { finite_difference: fd, analytic, tolerance: 1e-6 * (1.0 + analytic.abs()) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> FnField {
        FnField::new(2, |x| x[0].powi(3) + x[0] * x[1] * x[1]).with_gradient(|x| vec![3.0 * x[0] * x[0] + x[1] * x[1], 2.0 * x[0] * x[1]])
    }

    #[test]
    fn fd_hessian_matches_closed_form() {
        let f = cubic();
        let x = [0.3, -0.7];
        // H = [[6x, 2y], [2y, 2x]]
        let h = hessian_matrix(&f, &x);
        let expect = [[1.8, -1.4], [-1.4, 0.6]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[i][j] - expect[i][j]).abs() < 1e-8, "{i}{j}: {}", h[i][j]);
            }
        }
        assert!(!f.has_analytic_hessian());
    }

    #[test]
    fn fd_hessian_is_symmetric() {
        let f = cubic();
        let x = [0.9, 0.2];
        let (h, k) = ([0.4, -1.3], [2.0, 0.7]);
        let a = f.hessian_form(&x, &h, &k);
        let b = f.hessian_form(&x, &k, &h);
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn fd_gradient_fallback() {
        let f = FnField::new(1, |x| x[0].sin());
        let g = f.gradient(&[0.4]);
        assert!((g[0] - 0.4f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn gradient_check_flags_wrong_gradient() {
        let good = cubic();
        assert!(check_gradient(&good, &[0.2, 0.5], &[1.0, -0.5]).passed());
        let bad = FnField::new(1, |x| x[0] * x[0]).with_gradient(|x| vec![x[0]]);
        assert!(!check_gradient(&bad, &[1.0], &[1.0]).passed());
    }

    #[test]
    fn box_domain_rejects_degenerate() {
        assert!(BoxDomain::new(vec![0.0], vec![0.0]).is_err());
        let b = BoxDomain::new(vec![0.0, 1.0], vec![2.0, 3.0]).unwrap();
        assert!(b.contains(&[1.0, 3.0]));
        assert!(!b.contains(&[1.0, 3.1]));
        assert_eq!(b.measure(), 4.0);
    }

    #[test]
    fn segment_bounds_order_checked() {
        assert!(SegmentBounds::new(1.0, 0.0, 0.0, 0.0, BoundsSource::User).is_err());
        assert!(SegmentBounds::new(0.0, 1.0, 0.0, 0.0, BoundsSource::User).is_ok());
    }
}
