//! Boundary-integral solver for exterior time-harmonic elastic
//! scattering by Dirichlet, Neumann and impedance obstacles, with a
//! shape-derivative engine for the boundary-to-far-field map.
//!
//! The crate is organized around the pipeline
//!
//! * [`medium`] – material parameters, incident fields, the fundamental
//!   solution and its traction kernels,
//! * [`surface`] – star-shaped parametric boundaries, their grids,
//!   differential geometry and tangential calculus,
//! * [`bie`] – boundary-operator assembly, the three exterior solves,
//!   near-field and far-field evaluation,
//! * [`shape`] – derivative boundary data, the derivative solve, the
//!   finite-difference harness and factorization-identity checks,
//! * [`oracles`] – independent brute-force references used by the tests,
//! * [`cli`] – batch experiment front-end.

pub mod bie;
pub mod cli;
pub mod linalg;
pub mod medium;
pub mod oracles;
pub mod shape;
pub mod surface;

pub use num_complex::Complex64 as C64;

pub type RVec3 = nalgebra::Vector3<f64>;
pub type RMat3 = nalgebra::Matrix3<f64>;
pub type CVec3 = nalgebra::Vector3<C64>;
pub type CMat3 = nalgebra::Matrix3<C64>;

/// Lift a real vector into the complex field.
#[inline]
pub fn cvec(v: &RVec3) -> CVec3 {
    CVec3::new(C64::new(v.x, 0.0), C64::new(v.y, 0.0), C64::new(v.z, 0.0))
}

/// Lift a real matrix into the complex field.
#[inline]
pub fn cmat(m: &RMat3) -> CMat3 {
    CMat3::from_fn(|i, j| C64::new(m[(i, j)], 0.0))
}
