//! First-order expansions with derivative samples at `m + 1` equally spaced
//! points on `[a, a + h]`, their remainders and remainder bounds.
//!
//! The refined expansion reads
//!
//! ```text
//! f(a+h) = f(a) + Σ_k ω_k(m) Df(a + k h/m).(h) + ‖h‖ ε_{a,m+1}(h)
//! ```
//!
//! With the closed weights (`1/(2m)` at both ends, `1/m` inside) the remainder
//! lies in `±‖h‖ (M₂ - m₂) / (8m)`, a band `2m` times narrower than the one
//! of the plain first-order Taylor formula.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{axpy, norm, BoundsSource, ScalarField, SegmentBounds};
use crate::quadrature::{GaussLegendre, REMAINDER_ORDER, REMAINDER_PANELS};

/// Sample count used when a field has no closed-form segment bounds.
pub const DEFAULT_BOUND_SAMPLES: usize = 1001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WeightKind {
    /// Weights summing to one: `1/(2m), 1/m, …, 1/m, 1/(2m)`.
    Closed,
    /// Weights without the closure condition: `1/(2m), 1/m, …, 1/m`.
    Open,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightFamily {
    pub m: usize,
    pub kind: WeightKind,
    pub weights: Vec<f64>,
}

impl WeightFamily {
    /// Compensated (Neumaier) sum, so the closure check is not swamped by
    /// rounding for large `m`.
    pub fn sum(&self) -> f64 {
        let (mut total, mut carry) = (0.0f64, 0.0f64);
        for &w in &self.weights {
            let t = total + w;
            carry += if total.abs() >= w.abs() { (total - t) + w } else { (w - t) + total };
            total = t;
        }
        total + carry
    }
}

pub fn weights(m: usize, kind: WeightKind) -> Result<WeightFamily> {
    if m == 0 {
        return Err(invalid("number of subintervals m must be at least 1"));
    }
    let mf = m as f64;
    let mut w = vec![1.0 / mf; m + 1];
    w[0] = 1.0 / (2.0 * mf);
    if kind == WeightKind::Closed {
        w[m] = 1.0 / (2.0 * mf);
    }
    Ok(WeightFamily { m, kind, weights: w })
}

/// One evaluation of an expansion formula at `(a, h)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub approx: f64,
    pub exact: f64,
    /// `(exact - approx) / ‖h‖`
    pub remainder_eps: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
    /// `bound_hi - bound_lo`, evaluated from `M₂ - m₂` (and `M₁ - m₁`) so it
    /// does not suffer the cancellation of subtracting the endpoints.
    pub band_width: f64,
    pub h_norm: f64,
    /// `h = 0`: every formula is exact and no bound was evaluated.
    pub degenerate: bool,
    pub bounds: Option<SegmentBounds>,
}

impl ExpansionReport {
    fn degenerate(value: f64) -> Self {
        Self {
            approx: value,
            exact: value,
            remainder_eps: 0.0,
            bound_lo: 0.0,
            bound_hi: 0.0,
            band_width: 0.0,
            h_norm: 0.0,
            degenerate: true,
            bounds: None,
        }
    }

    pub fn width(&self) -> f64 {
        self.band_width
    }

    pub fn within_bounds(&self, tol: f64) -> bool {
        self.bound_lo - tol <= self.remainder_eps && self.remainder_eps <= self.bound_hi + tol
    }

    /// Whether the bounds came from closed-form (or caller supplied) constants.
    pub fn certified(&self) -> bool {
        self.bounds.is_none_or(|b| b.is_certified())
    }
}

fn check_shapes(f: &dyn ScalarField, a: &[f64], h: &[f64]) -> Result<()> {
    if a.len() != f.dim() || h.len() != f.dim() {
        return Err(invalid(format!("point/displacement dimension does not match field dimension {}", f.dim())));
    }
    Ok(())
}

fn check_nodes(f: &dyn ScalarField, a: &[f64], h: &[f64], m: usize) -> Result<()> {
    let domain = f.domain();
    for k in 0..=m {
        let x = axpy(a, k as f64 / m as f64, h);
        if !domain.contains(&x) {
            return Err(Error::Domain { k, point: x });
        }
    }
    Ok(())
}

fn resolve_bounds(f: &dyn ScalarField, a: &[f64], h: &[f64], given: Option<SegmentBounds>) -> Result<SegmentBounds> {
    match given {
        Some(b) => Ok(b),
        None => match f.segment_bounds(a, h) {
            Some(b) => Ok(b),
            None => estimate_segment_bounds(f, a, h, DEFAULT_BOUND_SAMPLES),
        },
    }
}

/// Plain first-order Taylor expansion `f(a) + Df(a).(h)`, with the remainder
/// band `[‖h‖ m₂/2, ‖h‖ M₂/2]`.
///
/// Bounds are taken from `bounds` when given, otherwise from the field's
/// closed-form certificate, otherwise sampled.
pub fn taylor1(f: &dyn ScalarField, a: &[f64], h: &[f64], bounds: Option<SegmentBounds>) -> Result<ExpansionReport> {
    check_shapes(f, a, h)?;
    check_nodes(f, a, h, 1)?;
    let hn = norm(h);
    let fa = f.value(a);
    if hn == 0.0 {
        return Ok(ExpansionReport::degenerate(fa));
    }
    let approx = fa + f.derivative(a, h);
    let exact = f.value(&axpy(a, 1.0, h));
    let b = resolve_bounds(f, a, h, bounds)?;
    Ok(ExpansionReport {
        approx,
        exact,
        remainder_eps: (exact - approx) / hn,
        bound_lo: hn * b.m2 / 2.0,
        bound_hi: hn * b.big_m2 / 2.0,
        band_width: hn * (b.big_m2 - b.m2) / 2.0,
        h_norm: hn,
        degenerate: false,
        bounds: Some(b),
    })
}

/// `Σ_k ω_k(m) Df(a + k h/m).(h)`
fn weighted_derivatives(f: &dyn ScalarField, a: &[f64], h: &[f64], family: &WeightFamily) -> f64 {
    let m = family.m as f64;
    family.weights.iter().enumerate().map(|(k, w)| w * f.derivative(&axpy(a, k as f64 / m, h), h)).sum()
}

/// Refined expansion with `m + 1` derivative samples.
///
/// Closed weights give the band `±‖h‖ (M₂ - m₂)/(8m)`; open weights give
/// `[‖h‖(m₂ - M₂)/(8m) - M₁/(2m), ‖h‖(M₂ - m₂)/(8m) - m₁/(2m)]`.
pub fn refined_expansion(
    f: &dyn ScalarField,
    a: &[f64],
    h: &[f64],
    m: usize,
    kind: WeightKind,
    bounds: Option<SegmentBounds>,
) -> Result<ExpansionReport> {
    let family = weights(m, kind)?;
    check_shapes(f, a, h)?;
    check_nodes(f, a, h, m)?;
    let hn = norm(h);
    let fa = f.value(a);
    if hn == 0.0 {
        return Ok(ExpansionReport::degenerate(fa));
    }
    let approx = fa + weighted_derivatives(f, a, h, &family);
    let exact = f.value(&axpy(a, 1.0, h));
    let b = resolve_bounds(f, a, h, bounds)?;
    let mf = m as f64;
    let half_width = hn * (b.big_m2 - b.m2) / (8.0 * mf);
    let (bound_lo, bound_hi, band_width) = match kind {
        WeightKind::Closed => (-half_width, half_width, 2.0 * half_width),
        WeightKind::Open => (
            -half_width - b.big_m1 / (2.0 * mf),
            half_width - b.m1 / (2.0 * mf),
            2.0 * half_width + (b.big_m1 - b.m1) / (2.0 * mf),
        ),
    };
    Ok(ExpansionReport {
        approx,
        exact,
        remainder_eps: (exact - approx) / hn,
        bound_lo,
        bound_hi,
        band_width,
        h_norm: hn,
        degenerate: false,
        bounds: Some(b),
    })
}

/// `φ(t) = Df(a + t h).(h)`
pub fn phi_eval(f: &dyn ScalarField, a: &[f64], h: &[f64], t: f64) -> Result<f64> {
    check_unit_t(t)?;
    check_shapes(f, a, h)?;
    Ok(f.derivative(&axpy(a, t, h), h))
}

/// `φ'(t) = D²f(a + t h).(h, h)`
pub fn phi_prime_eval(f: &dyn ScalarField, a: &[f64], h: &[f64], t: f64) -> Result<f64> {
    check_unit_t(t)?;
    check_shapes(f, a, h)?;
    Ok(f.hessian_form(&axpy(a, t, h), h, h))
}

fn check_unit_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

/// `‖h‖ ε_{a,m+1}(h)` for the closed weights, computed independently of the
/// derivative samples as
///
/// ```text
/// Σ_{k<m} ∫_{k/m}^{(k+1)/m} (S_k(m) - t) D²f(a + t h).(h, h) dt,   S_k(m) = (k + 1/2)/m
/// ```
///
/// with a composite 5-point Gauss–Legendre rule on 32 panels per subinterval.
pub fn remainder_integral_oracle(f: &dyn ScalarField, a: &[f64], h: &[f64], m: usize) -> Result<f64> {
    if m == 0 {
        return Err(invalid("number of subintervals m must be at least 1"));
    }
    check_shapes(f, a, h)?;
    check_nodes(f, a, h, m)?;
    let gl = GaussLegendre::new(REMAINDER_ORDER);
    let domain = f.domain();
    let mf = m as f64;
    let mut total = 0.0;
    let outside = std::cell::RefCell::new(None);
    for k in 0..m {
        let s_k = (k as f64 + 0.5) / mf;
        total += gl.composite(k as f64 / mf, (k + 1) as f64 / mf, REMAINDER_PANELS, |t| {
            let x = axpy(a, t, h);
            if !domain.contains(&x) {
                outside.borrow_mut().get_or_insert_with(|| (k, x.clone()));
            }
            (s_k - t) * f.hessian_form(&x, h, h)
        });
    }
    match outside.into_inner() {
        Some((k, point)) => Err(Error::Domain { k, point }),
        None => Ok(total),
    }
}

/// Sampled `m₂, M₂` (and `m₁, M₁`) on `samples` equispaced points of the
/// segment. Flagged as [`BoundsSource::Sampled`].
pub fn estimate_segment_bounds(f: &dyn ScalarField, a: &[f64], h: &[f64], samples: usize) -> Result<SegmentBounds> {
    if samples < 2 {
        return Err(invalid("segment bound estimation needs at least 2 samples"));
    }
    check_shapes(f, a, h)?;
    let hn = norm(h);
    if hn == 0.0 {
        return Err(invalid("segment bounds are undefined for h = 0"));
    }
    let (mut m2, mut big_m2, mut m1, mut big_m1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..samples {
        let x = axpy(a, j as f64 / (samples - 1) as f64, h);
        let second = f.hessian_form(&x, h, h) / (hn * hn);
        let first = f.derivative(&x, h) / hn;
        m2 = m2.min(second);
        big_m2 = big_m2.max(second);
        m1 = m1.min(first);
        big_m1 = big_m1.max(first);
    }
    Ok(SegmentBounds { m2, big_m2, m1, big_m1, source: BoundsSource::Sampled })
}

/// Both sides of
///
/// ```text
/// Σ_{k<m} ∫_k^m a_k u(t) dt = Σ_{k<m} ∫_k^{k+1} S_k u(t) dt,   S_k = a_0 + … + a_k
/// ```
///
/// by composite quadrature (32 panels per unit length).
pub fn summation_identity_check(a_list: &[f64], u: impl Fn(f64) -> f64, m: usize) -> Result<(f64, f64)> {
    if a_list.len() != m {
        return Err(invalid(format!("expected {m} coefficients, got {}", a_list.len())));
    }
    let gl = GaussLegendre::new(REMAINDER_ORDER);
    let mf = m as f64;
    let lhs = a_list
        .iter()
        .enumerate()
        .map(|(k, ak)| ak * gl.composite(k as f64, mf, REMAINDER_PANELS * (m - k), &u))
        .sum();
    let mut partial = 0.0;
    let rhs = a_list
        .iter()
        .enumerate()
        .map(|(k, ak)| {
            partial += ak;
            partial * gl.composite(k as f64, k as f64 + 1.0, REMAINDER_PANELS, &u)
        })
        .sum();
    Ok((lhs, rhs))
}
