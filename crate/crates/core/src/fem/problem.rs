//! The model problem `-κ Δu + r u = f` on a box with Dirichlet data.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::analytic::{Profile, QuadraticField, RidgeField, SinProductField};
use crate::error::{invalid, Result};
use crate::field::{BoxDomain, FnField, ScalarField};

/// Continuity and ellipticity constants of `a(·,·)` in the full H¹ norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FormConstants {
    pub continuity: f64,
    pub ellipticity: f64,
}

impl FormConstants {
    pub fn new(continuity: f64, ellipticity: f64) -> Result<Self> {
        if !(ellipticity > 0.0) || !(continuity >= ellipticity) || !continuity.is_finite() {
            return Err(invalid(format!("need 0 < alpha <= C, got C = {continuity}, alpha = {ellipticity}")));
        }
        Ok(Self { continuity, ellipticity })
    }

    /// `C / α`
    pub fn ratio(&self) -> f64 {
        self.continuity / self.ellipticity
    }
}

/// Squared Poincaré constant of `H¹₀` on a box: `1 / (π² Σ 1/Lᵢ²)`.
pub fn poincare_constant_sq(domain: &BoxDomain) -> f64 {
    let s: f64 = domain.lo.iter().zip(&domain.hi).map(|(l, h)| 1.0 / ((h - l) * (h - l))).sum();
    1.0 / (PI * PI * s)
}

/// Default constants for `a(u,v) = ∫ κ ∇u·∇v + r u v` on `H¹₀(box)`.
///
/// `C = max(1 + κ, r)` bounds `a(v,v) ≤ max(κ, r) ‖v‖²_{H¹}` with slack.
/// `α = min(κ, (κ + r c²)/(1 + c²))` with `c` the Poincaré constant: the
/// ratio `a(v,v)/‖v‖²_{H¹}` is a weighted mean of `κ` and `r` whose weight on
/// `r` is at most `c²/(1 + c²)`.
pub fn default_constants(domain: &BoxDomain, diffusion: f64, reaction: f64) -> FormConstants {
    let c2 = poincare_constant_sq(domain);
    let continuity = (1.0 + diffusion).max(reaction);
    let ellipticity = diffusion.min((diffusion + reaction * c2) / (1.0 + c2));
    FormConstants { continuity, ellipticity }
}

/// `-κ Δu + r u = f` on `domain`, `u = g` on its boundary, where `g` is the
/// exact solution when one is given and zero otherwise.
#[derive(Clone)]
pub struct EllipticProblem {
    pub domain: BoxDomain,
    pub diffusion: f64,
    pub reaction: f64,
    pub rhs: Arc<dyn ScalarField>,
    pub exact: Option<Arc<dyn ScalarField>>,
    pub constants: FormConstants,
}

impl fmt::Debug for EllipticProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EllipticProblem")
            .field("domain", &self.domain)
            .field("diffusion", &self.diffusion)
            .field("reaction", &self.reaction)
            .field("has_exact", &self.exact.is_some())
            .field("constants", &self.constants)
            .finish()
    }
}

impl EllipticProblem {
    pub fn new(
        domain: BoxDomain,
        diffusion: f64,
        reaction: f64,
        rhs: Arc<dyn ScalarField>,
        exact: Option<Arc<dyn ScalarField>>,
    ) -> Result<Self> {
        let dim = domain.dim();
        if !(1..=2).contains(&dim) {
            return Err(invalid(format!("FEM problems are 1D or 2D, got {dim}D")));
        }
        if !domain.is_bounded() {
            return Err(invalid("FEM domain must be bounded"));
        }
        if !(diffusion > 0.0) || !(reaction >= 0.0) || !diffusion.is_finite() || !reaction.is_finite() {
            return Err(invalid(format!("need diffusion > 0 and reaction >= 0, got {diffusion}, {reaction}")));
        }
        if rhs.dim() != dim || exact.as_ref().is_some_and(|u| u.dim() != dim) {
            return Err(invalid("right-hand side and exact solution must match the domain dimension"));
        }
        let constants = default_constants(&domain, diffusion, reaction);
        Ok(Self { domain, diffusion, reaction, rhs, exact, constants })
    }

    pub fn with_constants(mut self, constants: FormConstants) -> Self {
        self.constants = constants;
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// `u = Π sin(π xᵢ)` on the unit box, `f = (n κ π² + r) u`.
    pub fn manufactured_sine(dim: usize, diffusion: f64, reaction: f64) -> Result<Self> {
        let domain = BoxDomain::unit(dim);
        let exact: Arc<dyn ScalarField> = match dim {
            1 => Arc::new(RidgeField::new(vec![PI], 0.0, Profile::Sin).with_domain(domain.clone())),
            2 => Arc::new(SinProductField::new(PI, PI).with_domain(domain.clone())),
            _ => return Err(invalid(format!("manufactured problems are 1D or 2D, got {dim}D"))),
        };
        let scale = dim as f64 * diffusion * PI * PI + reaction;
        let u = exact.clone();
        let rhs = Arc::new(FnField::new(dim, move |x| scale * u.value(x)).with_domain(domain.clone()));
        Self::new(domain, diffusion, reaction, rhs, Some(exact))
    }

    /// `u = c + b·x` on the unit box with matching Dirichlet data, `f = r u`.
    pub fn affine(b: Vec<f64>, c: f64, diffusion: f64, reaction: f64) -> Result<Self> {
        let dim = b.len();
        let domain = BoxDomain::unit(dim);
        let exact: Arc<dyn ScalarField> = Arc::new(QuadraticField::new(vec![vec![0.0; dim]; dim], b, c)?.with_domain(domain.clone()));
        let u = exact.clone();
        let rhs = Arc::new(FnField::new(dim, move |x| reaction * u.value(x)).with_domain(domain.clone()));
        Self::new(domain, diffusion, reaction, rhs, Some(exact))
    }

    /// `f ≡ 0` with homogeneous data; the solution is `u ≡ 0`.
    pub fn homogeneous(dim: usize, diffusion: f64, reaction: f64) -> Result<Self> {
        let domain = BoxDomain::unit(dim);
        let zero: Arc<dyn ScalarField> = Arc::new(FnField::constant(dim, 0.0).with_domain(domain.clone()));
        Self::new(domain, diffusion, reaction, zero.clone(), Some(zero))
    }

    /// Dirichlet value at a boundary point.
    pub fn boundary_value(&self, x: &[f64]) -> f64 {
        self.exact.as_ref().map_or(0.0, |u| u.value(x))
    }
}
