//! Scalable Gaussian process regression by structured kernel interpolation.
//!
//! `K_{X,X} ≈ W K_{U,U} Wᵀ`: a sparse interpolation matrix `W` maps the
//! training inputs onto a grid of inducing points `U`, and `K_{U,U}` keeps
//! Toeplitz or Kronecker structure so that matvecs stay cheap.

pub mod error;
pub mod experiments;
pub mod gp;
pub mod interp;
pub mod kernels;
pub mod points;
pub mod solver;
pub mod structla;

pub use error::{Error, Result};
pub use points::Points;
