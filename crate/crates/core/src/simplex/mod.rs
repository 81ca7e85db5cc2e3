//! Simplices, linear and gradient-corrected interpolation, and meshes.

mod geometry;
mod global;
mod interp;
mod mesh;

pub use geometry::{barycentric, BarycentricCoords, Simplex, INSIDE_TOL};
pub use global::{global_interp, GlobalInterpolant};
pub use interp::{interp_error_bounds, pi_interp, pi_star_interp, simplex_sup_norms, spectral_norm_power, InterpBounds, LocalInterpolant};
pub use mesh::{uniform_mesh, FaceReport, SharedFace, Triangulation};
