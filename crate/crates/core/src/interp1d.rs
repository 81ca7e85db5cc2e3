//! Linear interpolation on an interval and its two error bounds:
//!
//! * `(b-a)² ‖f''‖∞ / 8` from the plain Taylor formula,
//! * `(b-a) ‖f'‖∞ / 4 + (b-a)² ‖f''‖∞ / 16` from the two-point expansion.
//!
//! The second one wins by the factor `β < 1` exactly when
//! `‖f'‖∞ ≤ ‖f''‖∞ / Λ` with `Λ = 4 / ((2β - 1)(b - a))`. The convex
//! exponential family of [`class_p_function`] meets that condition.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{BoundsSource, BoxDomain, ScalarField, SegmentBounds, SupNorms};

/// Grid used for sup norms when no closed form is available.
pub const NORM_GRID: usize = 10_001;
/// Grid used for the measured interpolation error.
pub const ERROR_GRID: usize = 1001;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(invalid(format!("interval [{a}, {b}] is degenerate")));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// `n` equispaced points including both ends.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let n = n.max(2);
        (0..n).map(move |j| if j + 1 == n { self.b } else { self.a + self.length() * j as f64 / (n - 1) as f64 })
    }
}

/// `Π_[a,b](f)`, the degree ≤ 1 interpolant through `(a, f(a))` and `(b, f(b))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lerp {
    pub interval: Interval,
    pub fa: f64,
    pub fb: f64,
}

impl Lerp {
    pub fn eval(&self, x: f64) -> f64 {
        let Interval { a, b } = self.interval;
        (x - b) / (a - b) * self.fa + (x - a) / (b - a) * self.fb
    }
}

pub fn lerp_interpolant(f: &dyn ScalarField, iv: Interval) -> Result<Lerp> {
    if f.dim() != 1 {
        return Err(invalid("linear interpolation on an interval needs a 1D field"));
    }
    let dom = f.domain();
    if !dom.contains(&[iv.a]) || !dom.contains(&[iv.b]) {
        return Err(invalid(format!("interval [{}, {}] not inside the field domain", iv.a, iv.b)));
    }
    Ok(Lerp { interval: iv, fa: f.value(&[iv.a]), fb: f.value(&[iv.b]) })
}

/// `‖f'‖∞` and `‖f''‖∞` on `iv`: closed form when the field certifies them,
/// otherwise the max over a [`NORM_GRID`]-point grid.
pub fn interval_norms(f: &dyn ScalarField, iv: Interval) -> SupNorms {
    if let Some(n) = f.sup_norms_on_hull(&[&[iv.a], &[iv.b]]) {
        return n;
    }
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    for x in iv.grid(NORM_GRID) {
        d1 = d1.max(f.derivative(&[x], &[1.0]).abs());
        d2 = d2.max(f.hessian_form(&[x], &[1.0], &[1.0]).abs());
    }
    SupNorms { d1, d2 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundComparison {
    /// `(b-a)² ‖f''‖∞ / 8`
    pub classical: f64,
    /// `(b-a) ‖f'‖∞ / 4 + (b-a)² ‖f''‖∞ / 16`
    pub refined: f64,
    /// `refined / classical`
    pub beta: f64,
    /// Max of `|Π(f) - f|` over a [`ERROR_GRID`]-point grid.
    pub measured_sup_error: f64,
}

impl BoundComparison {
    pub fn improves(&self) -> bool {
        self.beta < 1.0
    }

    pub fn best_bound(&self) -> f64 {
        self.classical.min(self.refined)
    }
}

pub fn compare_bounds(f: &dyn ScalarField, iv: Interval, norms: SupNorms, grid: usize) -> Result<BoundComparison> {
    if norms.d1 < 0.0 || norms.d2 < 0.0 {
        return Err(invalid("sup norms must be nonnegative"));
    }
    let pi = lerp_interpolant(f, iv)?;
    let measured = iv.grid(grid).map(|x| (pi.eval(x) - f.value(&[x])).abs()).fold(0.0, f64::max);
    let scale = pi.fa.abs().max(pi.fb.abs()).max(1.0);
    if norms.d2 == 0.0 && measured > 1e-12 * scale {
        return Err(Error::Inconsistency(format!("‖f''‖∞ = 0 but f deviates from its interpolant by {measured:e}")));
    }
    let l = iv.length();
    let classical = l * l * norms.d2 / 8.0;
    let refined = l * norms.d1 / 4.0 + l * l * norms.d2 / 16.0;
    Ok(BoundComparison { classical, refined, beta: refined / classical, measured_sup_error: measured })
}

/// `Λ = 4 / ((2β - 1)(b - a))`, defined for `β ∈ (1/2, 1]`.
pub fn lambda_from_beta(beta: f64, iv: Interval) -> Result<f64> {
    if !(beta > 0.5 && beta <= 1.0) {
        return Err(invalid(format!("beta = {beta} outside (1/2, 1]")));
    }
    Ok(4.0 / ((2.0 * beta - 1.0) * iv.length()))
}

/// Parameters of the solution of `f'' - Λ f' = δ` on `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassPParams {
    pub lambda: f64,
    pub delta: f64,
    pub f_a: f64,
    pub fprime_a: f64,
}

impl ClassPParams {
    pub fn new(lambda: f64, delta: f64, f_a: f64, fprime_a: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(delta > 0.0) {
            return Err(invalid(format!("class (P) needs Λ > 0 and δ > 0, got Λ = {lambda}, δ = {delta}")));
        }
        if fprime_a < -delta / lambda {
            return Err(invalid(format!("f'(a) = {fprime_a} violates f'(a) ≥ -δ/Λ = {}", -delta / lambda)));
        }
        Ok(Self { lambda, delta, f_a, fprime_a })
    }

    /// Parameters for a target improvement ratio `β` with `δ = Λ`.
    pub fn for_beta(beta: f64, iv: Interval, f_a: f64, fprime_a: f64) -> Result<Self> {
        let lambda = lambda_from_beta(beta, iv)?;
        Self::new(lambda, lambda, f_a, fprime_a)
    }

    /// Whether `|f'| ≤ f''/Λ` holds pointwise on `[a, ∞)`.
    ///
    /// At `x = a` the condition `f'' + Λ f' ≥ 0` reads `2Λ f'(a) + δ ≥ 0`, so
    /// the admissible range is `f'(a) ≥ -δ/(2Λ)`, narrower than the
    /// `f'(a) ≥ -δ/Λ` accepted by [`ClassPParams::new`]. Between the two the
    /// field is still convex but the pointwise condition fails near `a`.
    pub fn satisfies_pointwise_condition(&self) -> bool {
        2.0 * self.lambda * self.fprime_a + self.delta >= 0.0
    }
}

/// Closed-form member of class (P) anchored at `a`:
///
/// ```text
/// f(x) = f(a) + f'(a)/Λ (e^{Λ(x-a)} - 1) + δ/Λ [ (e^{Λ(x-a)} - 1)/Λ - (x - a) ]
/// ```
#[derive(Clone, Debug)]
pub struct ClassPField {
    pub params: ClassPParams,
    pub anchor: f64,
    domain: BoxDomain,
}

impl ClassPField {
    fn growth(&self, x: f64) -> f64 {
        (self.params.lambda * (x - self.anchor)).exp()
    }

    /// `f'(a) + δ/Λ`; nonnegative by construction.
    fn convexity(&self) -> f64 {
        self.params.fprime_a + self.params.delta / self.params.lambda
    }

    pub fn d1(&self, x: f64) -> f64 {
        let e = self.growth(x);
        self.params.fprime_a * e + self.params.delta / self.params.lambda * (e - 1.0)
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.convexity() * self.params.lambda * self.growth(x)
    }

    /// Right-hand side of the max-of-exponentials lower bound on `f`.
    pub fn exponential_lower_bound(&self, x: f64) -> f64 {
        let p = &self.params;
        let t = x - self.anchor;
        let up = p.f_a + p.fprime_a / p.lambda * ((p.lambda * t).exp() - 1.0);
        let down = p.f_a - p.fprime_a / p.lambda * ((-p.lambda * t).exp() - 1.0);
        up.max(down)
    }
}

pub fn class_p_function(p: ClassPParams, iv: Interval) -> Result<ClassPField> {
    let p = ClassPParams::new(p.lambda, p.delta, p.f_a, p.fprime_a)?;
    Ok(ClassPField { params: p, anchor: iv.a, domain: BoxDomain::new(vec![iv.a], vec![iv.b])? })
}

impl ScalarField for ClassPField {
    fn dim(&self) -> usize {
        1
    }

    fn domain(&self) -> BoxDomain {
        self.domain.clone()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let p = &self.params;
        let t = x[0] - self.anchor;
        let em1 = (p.lambda * t).exp_m1();
        p.f_a + p.fprime_a / p.lambda * em1 + p.delta / p.lambda * (em1 / p.lambda - t)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![self.d1(x[0])]
    }

    fn hessian_form(&self, x: &[f64], h: &[f64], k: &[f64]) -> f64 {
        self.d2(x[0]) * h[0] * k[0]
    }

    fn has_analytic_hessian(&self) -> bool {
        true
    }

    // f'' ≥ 0 and grows monotonically, so f' and f'' are both nondecreasing.
    fn segment_bounds(&self, a: &[f64], h: &[f64]) -> Option<SegmentBounds> {
        if h[0] == 0.0 {
            return None;
        }
        let (lo, hi) = (a[0].min(a[0] + h[0]), a[0].max(a[0] + h[0]));
        let sign = h[0].signum();
        let (m1, big_m1) = if sign > 0.0 { (self.d1(lo), self.d1(hi)) } else { (-self.d1(hi), -self.d1(lo)) };
        Some(SegmentBounds { m2: self.d2(lo), big_m2: self.d2(hi), m1, big_m1, source: BoundsSource::Analytic })
    }

    fn sup_norms_on_hull(&self, points: &[&[f64]]) -> Option<SupNorms> {
        let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        Some(SupNorms { d1: self.d1(lo).abs().max(self.d1(hi).abs()), d2: self.d2(lo).abs().max(self.d2(hi).abs()) })
    }
}
