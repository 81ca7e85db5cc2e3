//! Named test fields used by the studies and the command line.

use std::sync::Arc;

use serde::Serialize;

use crate::analytic::{Profile, QuadraticField, RidgeField, SinProductField};
use crate::error::{Error, Result};
use crate::field::{check_gradient, BoxDomain, GradientCheck, ScalarField};
use crate::interp1d::{class_p_function, ClassPParams, Interval};

/// Cubic profile shared by `cubic1d` and `cubic2d`.
const CUBIC: [f64; 4] = [0.5, -1.0, 0.75, 1.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegistryEntry {
    pub name: String,
    pub dim: usize,
    /// Whether derivative bounds come in closed form rather than by sampling.
    pub analytic: bool,
    /// Box on which studies sample the field.
    pub domain: BoxDomain,
    pub description: String,
}

fn entry(name: &str, dim: usize, domain: BoxDomain, description: &str) -> RegistryEntry {
    RegistryEntry { name: name.into(), dim, analytic: true, domain, description: description.into() }
}

fn interval(a: f64, b: f64) -> BoxDomain {
    BoxDomain::new(vec![a], vec![b]).expect("literal interval")
}

/// The fixed catalogue plus the `classP(beta=0.75)` generator example.
pub fn registry() -> Vec<RegistryEntry> {
    vec![
        entry("exp1d", 1, interval(-1.0, 1.0), "exp(x)"),
        entry("sin1d", 1, interval(0.0, 3.0), "sin(x)"),
        entry("cubic1d", 1, interval(-1.0, 1.0), "0.5 - x + 0.75x^2 + x^3"),
        entry("quad2d", 2, BoxDomain::unit(2), "1/2 x^T A x + b.x + c, A = [[2, 0.5], [0.5, -1]]"),
        entry("cubic2d", 2, BoxDomain::unit(2), "cubic1d(0.6x + 0.8y - 0.3)"),
        entry("exp2d", 2, BoxDomain::unit(2), "exp(x - 0.5y)"),
        entry("sinprod2d", 2, BoxDomain::unit(2), "sin(pi x) sin(pi y)"),
        entry("exp3d", 3, BoxDomain::unit(3), "exp(0.5x + 0.3y - 0.4z)"),
        entry("quad3d", 3, BoxDomain::unit(3), "1/2 x^T A x + b.x + c, 3x3 indefinite A"),
        entry("classP(beta=0.75)", 1, BoxDomain::unit(1), "class (P) member on [0,1] with improvement ratio beta, f(0) = f'(0) = 0"),
    ]
}

fn names() -> Vec<String> {
    registry().into_iter().map(|e| e.name).collect::<Vec<_>>()
}

fn unknown(name: &str) -> Error {
    let mut available = names();
    available.push("classP(beta=<b in (0.5,1]>)".into());
    Error::UnknownFunction { name: name.into(), available }
}

/// Parses `classP(beta=X)` and returns `X`.
pub fn parse_class_p(name: &str) -> Option<f64> {
    let inner = name.strip_prefix("classP(")?.strip_suffix(')')?;
    let (key, value) = inner.split_once('=')?;
    if key.trim() != "beta" {
        return None;
    }
    value.trim().parse().ok()
}

/// A class (P) member on `[0, 1]` with ratio `beta`, `δ = Λ` and
/// `f(0) = f'(0) = 0`.
pub fn class_p_field(beta: f64) -> Result<crate::interp1d::ClassPField> {
    let iv = Interval::new(0.0, 1.0)?;
    class_p_function(ClassPParams::for_beta(beta, iv, 0.0, 0.0)?, iv)
}

/// Resolves a registry name to a field and its catalogue entry. `exp`, `sin`
/// and `cubic` are accepted for their 1D entries.
pub fn lookup(name: &str) -> Result<(Arc<dyn ScalarField>, RegistryEntry)> {
    if let Some(beta) = parse_class_p(name) {
        let field = class_p_field(beta)?;
        let e = RegistryEntry {
            name: format!("classP(beta={beta})"),
            dim: 1,
            analytic: true,
            domain: BoxDomain::unit(1),
            description: "class (P) member on [0,1]".into(),
        };
        return Ok((Arc::new(field), e));
    }
    let canonical = match name {
        "exp" => "exp1d",
        "sin" => "sin1d",
        "cubic" => "cubic1d",
        other => other,
    };
    let e = registry().into_iter().find(|e| e.name == canonical && !e.name.starts_with("classP")).ok_or_else(|| unknown(name))?;
    let field: Arc<dyn ScalarField> = match canonical {
        "exp1d" => Arc::new(RidgeField::univariate(Profile::Exp)),
        "sin1d" => Arc::new(RidgeField::univariate(Profile::Sin)),
        "cubic1d" => Arc::new(RidgeField::univariate(Profile::Cubic(CUBIC))),
        "quad2d" => Arc::new(QuadraticField::new(vec![vec![2.0, 0.5], vec![0.5, -1.0]], vec![-1.0, 0.5], 0.3)?),
        "cubic2d" => Arc::new(RidgeField::new(vec![0.6, 0.8], -0.3, Profile::Cubic(CUBIC))),
        "exp2d" => Arc::new(RidgeField::new(vec![1.0, -0.5], 0.0, Profile::Exp)),
        "sinprod2d" => Arc::new(SinProductField::new(std::f64::consts::PI, std::f64::consts::PI)),
        "exp3d" => Arc::new(RidgeField::new(vec![0.5, 0.3, -0.4], 0.0, Profile::Exp)),
        "quad3d" => Arc::new(QuadraticField::new(
            vec![vec![1.5, 0.4, -0.2], vec![0.4, -0.8, 0.3], vec![-0.2, 0.3, 2.2]],
            vec![0.2, -0.7, 0.1],
            -0.4,
        )?),
        _ => return Err(unknown(name)),
    };
    Ok((field, e))
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfTestRow {
    pub name: String,
    pub point: Vec<f64>,
    pub check: GradientCheck,
}

/// Finite-difference gradient checks for every entry at a few fixed interior
/// points of its domain.
pub fn selftest() -> Result<Vec<SelfTestRow>> {
    let mut rows = Vec::new();
    for e in registry() {
        let (f, _) = lookup(&e.name)?;
        for frac in [0.2, 0.5, 0.8] {
            let x: Vec<f64> = (0..e.dim).map(|d| e.domain.lo[d] + (frac + 0.05 * d as f64) * (e.domain.hi[d] - e.domain.lo[d])).collect();
            let h: Vec<f64> = (0..e.dim).map(|d| 1.0 - 0.3 * d as f64).collect();
            rows.push(SelfTestRow { name: e.name.clone(), point: x.clone(), check: check_gradient(f.as_ref(), &x, &h) });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contract_names_present() {
        let names = names();
        for n in ["exp1d", "sin1d", "quad2d", "classP(beta=0.75)"] {
            assert!(names.iter().any(|m| m == n), "{n}");
        }
        for e in registry() {
            assert!((1..=3).contains(&e.dim));
            let (f, found) = lookup(&e.name).unwrap();
            assert_eq!(f.dim(), e.dim);
            assert_eq!(found.dim, e.dim);
        }
    }

    #[test]
    fn class_p_names() {
        assert_eq!(parse_class_p("classP(beta=0.9)"), Some(0.9));
        assert_eq!(parse_class_p("classP( beta = 1 )"), Some(1.0));
        assert_eq!(parse_class_p("classP(gamma=0.9)"), None);
        assert!(lookup("classP(beta=0.4)").is_err());
        assert_eq!(lookup("exp").unwrap().1.name, "exp1d");
    }

    #[test]
    fn unknown_lists_registry() {
        match lookup("nope") {
            Err(Error::UnknownFunction { available, .. }) => assert!(available.iter().any(|n| n == "sinprod2d")),
            Err(other) => panic!("{other:?}"),
            Ok(_) => panic!("lookup of an unknown name succeeded"),
        }
    }

    #[test]
    fn every_entry_passes_gradient_check() {
        for row in selftest().unwrap() {
            assert!(row.check.passed(), "{row:?}");
        }
    }
}
