//! Fields with closed-form derivatives and certified derivative bounds.
//!
//! These back the containment checks: whenever a bound is asserted, the
//! constants come from here rather than from sampling.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};
use crate::field::{dot, norm, BoundsSource, BoxDomain, ScalarField, SegmentBounds, SupNorms};

/// Exact range of `sin` over `[lo, hi]`.
pub(crate) fn sin_range(lo: f64, hi: f64) -> (f64, f64) {
    let (mut min, mut max) = {
        let (a, b) = (lo.sin(), hi.sin());
        (a.min(b), a.max(b))
    };
    // critical points pi/2 + k pi
    let k_first = ((lo - FRAC_PI_2) / PI).ceil() as i64;
    let k_last = ((hi - FRAC_PI_2) / PI).floor() as i64;
    for k in k_first..=k_last.min(k_first + 1) {
        if k.rem_euclid(2) == 0 {
            max = 1.0;
        } else {
            min = -1.0;
        }
    }
    (min, max)
}

fn minmax(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values.into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// One-dimensional profile `g` of a ridge field `x ↦ g(w·x + c)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Exp,
    Sin,
    /// `c0 + c1 s + c2 s² + c3 s³`
    Cubic([f64; 4]),
}

impl Profile {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Profile::Exp => s.exp(),
            Profile::Sin => s.sin(),
            Profile::Cubic(c) => c[0] + s * (c[1] + s * (c[2] + s * c[3])),
        }
    }

    pub fn d1(&self, s: f64) -> f64 {
        match self {
            Profile::Exp => s.exp(),
            Profile::Sin => s.cos(),
            Profile::Cubic(c) => c[1] + s * (2.0 * c[2] + 3.0 * s * c[3]),
        }
    }

    pub fn d2(&self, s: f64) -> f64 {
        match self {
            Profile::Exp => s.exp(),
            Profile::Sin => -s.sin(),
            Profile::Cubic(c) => 2.0 * c[2] + 6.0 * c[3] * s,
        }
    }

    /// Exact `(min, max)` of `g'` on `[lo, hi]`.
    pub fn d1_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Profile::Exp => (lo.exp(), hi.exp()),
            Profile::Sin => sin_range(lo + FRAC_PI_2, hi + FRAC_PI_2),
            Profile::Cubic(c) => {
                let mut cand = vec![self.d1(lo), self.d1(hi)];
                if c[3] != 0.0 {
                    let vertex = -c[2] / (3.0 * c[3]);
                    if lo < vertex && vertex < hi {
                        cand.push(self.d1(vertex));
                    }
                }
                minmax(cand)
            }
        }
    }

    /// Exact `(min, max)` of `g''` on `[lo, hi]`.
    pub fn d2_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Profile::Exp => (lo.exp(), hi.exp()),
            Profile::Sin => {
                let (a, b) = sin_range(lo, hi);
                (-b, -a)
            }
            Profile::Cubic(_) => minmax([self.d2(lo), self.d2(hi)]),
        }
    }
}

/// `x ↦ g(w·x + c)`.
#[derive(Clone, Debug)]
pub struct RidgeField {
    direction: Vec<f64>,
    offset: f64,
    profile: Profile,
    domain: BoxDomain,
}

impl RidgeField {
    pub fn new(direction: Vec<f64>, offset: f64, profile: Profile) -> Self {
        let domain = BoxDomain::unbounded(direction.len());
        Self { direction, offset, profile, domain }
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Self {
        self.domain = domain;
        self
    }

    /// The 1D field `g(x)`.
    pub fn univariate(profile: Profile) -> Self {
        Self::new(vec![1.0], 0.0, profile)
    }

    fn arg(&self, x: &[f64]) -> f64 {
        dot(&self.direction, x) + self.offset
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }
}

impl ScalarField for RidgeField {
    fn dim(&self) -> usize {
        self.direction.len()
    }

    fn domain(&self) -> BoxDomain {
        self.domain.clone()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.profile.value(self.arg(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let g1 = self.profile.d1(self.arg(x));
        self.direction.iter().map(|w| g1 * w).collect()
    }

    fn hessian_form(&self, x: &[f64], h: &[f64], k: &[f64]) -> f64 {
        self.profile.d2(self.arg(x)) * dot(&self.direction, h) * dot(&self.direction, k)
    }

    fn has_analytic_hessian(&self) -> bool {
        true
    }

    fn segment_bounds(&self, a: &[f64], h: &[f64]) -> Option<SegmentBounds> {
        let hn = norm(h);
        if hn == 0.0 {
            return None;
        }
        let s0 = self.arg(a);
        let s1 = s0 + dot(&self.direction, h);
        let (lo, hi) = (s0.min(s1), s0.max(s1));
        let q = dot(&self.direction, h) / hn;
        let (g2_lo, g2_hi) = self.profile.d2_range(lo, hi);
        let (g1_lo, g1_hi) = self.profile.d1_range(lo, hi);
        let (m1, big_m1) = if q >= 0.0 { (q * g1_lo, q * g1_hi) } else { (q * g1_hi, q * g1_lo) };
        Some(SegmentBounds { m2: q * q * g2_lo, big_m2: q * q * g2_hi, m1, big_m1, source: BoundsSource::Analytic })
    }

    fn sup_norms_on_hull(&self, points: &[&[f64]]) -> Option<SupNorms> {
        let (lo, hi) = minmax(points.iter().map(|p| self.arg(p)));
        let (g1_lo, g1_hi) = self.profile.d1_range(lo, hi);
        let (g2_lo, g2_hi) = self.profile.d2_range(lo, hi);
        let w = norm(&self.direction);
        Some(SupNorms { d1: w * g1_lo.abs().max(g1_hi.abs()), d2: w * w * g2_lo.abs().max(g2_hi.abs()) })
    }
}

/// `x ↦ ½ xᵀAx + b·x + c` with symmetric `A`.
#[derive(Clone, Debug)]
pub struct QuadraticField {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: f64,
    spectral_norm: f64,
    domain: BoxDomain,
}

impl QuadraticField {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: f64) -> Result<Self> {
        let n = b.len();
        if a.len() != n || a.iter().any(|row| row.len() != n) {
            return Err(invalid("quadratic form dimensions disagree"));
        }
        for i in 0..n {
            for j in 0..i {
                if (a[i][j] - a[j][i]).abs() > 1e-14 * (1.0 + a[i][j].abs()) {
                    return Err(invalid("quadratic form matrix must be symmetric"));
                }
            }
        }
        let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let spectral_norm = SymmetricEigen::new(m).eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
        Ok(Self { a, b, c, spectral_norm, domain: BoxDomain::unbounded(n) })
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Self {
        self.domain = domain;
        self
    }

    fn ax(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|row| dot(row, x)).collect()
    }
}

impl ScalarField for QuadraticField {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn domain(&self) -> BoxDomain {
        self.domain.clone()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(&self.ax(x), x) + dot(&self.b, x) + self.c
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.ax(x).iter().zip(&self.b).map(|(p, q)| p + q).collect()
    }

    fn hessian_form(&self, _x: &[f64], h: &[f64], k: &[f64]) -> f64 {
        dot(&self.ax(h), k)
    }

    fn has_analytic_hessian(&self) -> bool {
        true
    }

    fn segment_bounds(&self, a: &[f64], h: &[f64]) -> Option<SegmentBounds> {
        let hn = norm(h);
        if hn == 0.0 {
            return None;
        }
        let q = self.hessian_form(a, h, h) / (hn * hn);
        let end: Vec<f64> = a.iter().zip(h).map(|(x, d)| x + d).collect();
        let (m1, big_m1) = minmax([self.derivative(a, h) / hn, self.derivative(&end, h) / hn]);
        Some(SegmentBounds { m2: q, big_m2: q, m1, big_m1, source: BoundsSource::Analytic })
    }

    fn sup_norms_on_hull(&self, points: &[&[f64]]) -> Option<SupNorms> {
        // ‖Ax + b‖ is convex, so its max over a hull sits at a vertex.
        let d1 = points.iter().map(|p| norm(&self.gradient(p))).fold(0.0, f64::max);
        Some(SupNorms { d1, d2: self.spectral_norm })
    }
}

/// `(x, y) ↦ sin(k₁x) sin(k₂y)`.
///
/// Its certificates are global: `‖Dv‖ ≤ max kᵢ` and `|||D²v||| ≤ (max kᵢ)²`,
/// attained on `[0,1]²` when `k₁ = k₂ = π`.
#[derive(Clone, Debug)]
pub struct SinProductField {
    k: [f64; 2],
    domain: BoxDomain,
}

impl SinProductField {
    pub fn new(k1: f64, k2: f64) -> Self {
        Self { k: [k1, k2], domain: BoxDomain::unbounded(2) }
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Self {
        self.domain = domain;
        self
    }

    fn kmax(&self) -> f64 {
        self.k[0].abs().max(self.k[1].abs())
    }
}

impl ScalarField for SinProductField {
    fn dim(&self) -> usize {
        2
    }

    fn domain(&self) -> BoxDomain {
        self.domain.clone()
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.k[0] * x[0]).sin() * (self.k[1] * x[1]).sin()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (s1, c1) = (self.k[0] * x[0]).sin_cos();
        let (s2, c2) = (self.k[1] * x[1]).sin_cos();
        vec![self.k[0] * c1 * s2, self.k[1] * s1 * c2]
    }

    fn hessian_form(&self, x: &[f64], h: &[f64], k: &[f64]) -> f64 {
        let (s1, c1) = (self.k[0] * x[0]).sin_cos();
        let (s2, c2) = (self.k[1] * x[1]).sin_cos();
        let hxx = -self.k[0] * self.k[0] * s1 * s2;
        let hyy = -self.k[1] * self.k[1] * s1 * s2;
        let hxy = self.k[0] * self.k[1] * c1 * c2;
        h[0] * (hxx * k[0] + hxy * k[1]) + h[1] * (hxy * k[0] + hyy * k[1])
    }

    fn has_analytic_hessian(&self) -> bool {
        true
    }

    fn segment_bounds(&self, _a: &[f64], h: &[f64]) -> Option<SegmentBounds> {
        if norm(h) == 0.0 {
            return None;
        }
        let k = self.kmax();
        Some(SegmentBounds { m2: -k * k, big_m2: k * k, m1: -k, big_m1: k, source: BoundsSource::Analytic })
    }

    fn sup_norms_on_hull(&self, _points: &[&[f64]]) -> Option<SupNorms> {
        let k = self.kmax();
        Some(SupNorms { d1: k, d2: k * k })
    }
}
