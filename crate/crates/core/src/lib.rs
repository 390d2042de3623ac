//! Spectral toolkit for the curl (rot) and gradient-of-divergence operators
//! in a ball.
//!
//! The space of square-integrable vector fields over the ball splits into
//! orthogonal classes of potential and solenoidal fields. On the solenoidal
//! side the curl has a self-adjoint extension S whose eigenfields — Beltrami
//! fields with rot q = ±λq and zero normal trace — form an orthonormal basis;
//! on the potential side the gradient-of-divergence extension 𝒩_d plays the
//! same role with eigenvalues −ν². Eigenvalues scale with zeros of the
//! spherical Bessel functions ψₙ and their derivatives. Both operators, their
//! inverses, and the resolvents (S + λI)⁻¹ and (𝒩_d + ν²I)⁻¹ then act as
//! coefficient transforms on Fourier series in these bases, which solves the
//! boundary-value problems rot u + λu = f and ∇div w + ν²w = f by series.
//!
//! Module map:
//! - [`specfun`]: ψₙ, ψ′ₙ, and certified tables of their zeros;
//! - [`harmonics`]: real spherical harmonics and surface gradients;
//! - [`ballgrid`]: tensor quadrature over the ball (the L₂ inner product);
//! - [`eigenbasis`]: construction and evaluation of the eigenfields;
//! - [`spectral`]: projection, synthesis, S, 𝒩_d, resolvents, Sobolev-scale
//!   diagnostics, operator bound constants;
//! - [`calculus`]: independent finite-difference operators (the oracle);
//! - [`solver`]: Helmholtz–Weyl split and the two boundary-value problems;
//! - [`iofmt`]: field specs, zero-table cache, CSV/VTK export.

pub mod ballgrid;
pub mod calculus;
pub mod eigenbasis;
pub mod error;
pub mod harmonics;
pub mod iofmt;
pub mod solver;
pub mod specfun;
pub mod spectral;

pub use ballgrid::{inner_product, l2_norm, BallGrid, FieldSamples};
pub use eigenbasis::{enumerate_modes, Basis, Mode, ModeFamily, ModeKey};
pub use error::{Error, Result};
pub use solver::{
    helmholtz_decompose, residual, solve_problem1, solve_problem2, Decomposition, Problem,
    ProblemInput, SolveOutcome, Solution,
};
pub use specfun::{curl_zeros, dpsi, graddiv_zeros, psi, ZeroFamily, ZeroTable};
pub use spectral::{
    apply_nd, apply_s, apply_s_inverse, operator_bound_constants, parseval_defect, project,
    resolvent_curl, resolvent_graddiv, sobolev_norm, synthesize, FredholmReport,
    ResolventOutcome, SobolevDiagnostics, SpectralCoefficients,
};
