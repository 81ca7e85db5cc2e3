//! Refined first-order Taylor expansions, interpolation error bounds on
//! intervals and simplices, and a small P1/P2 finite element solver used to
//! compare a priori estimates.

pub mod analytic;
pub mod error;
pub mod expansion;
pub mod fem;
pub mod field;
pub mod interp1d;
pub mod quadrature;
pub mod registry;
pub mod simplex;
pub mod study;

pub use error::{Error, Result};
pub use field::{BoxDomain, FnField, ScalarField, SegmentBounds, SupNorms};
