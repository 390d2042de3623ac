//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Mathematical non-solvability (the Fredholm alternative failing) is a
/// modeled outcome and carries its own report; it is distinct from usage
/// errors and from internal guards that should never fire.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root bracket could not be established. Internal bug guard:
    /// interlacing should always produce a sign change.
    #[error("bracketing failure for {what}: no sign change in [{lo}, {hi}]")]
    Bracket { what: String, lo: f64, hi: f64 },

    /// A computed zero failed its residual certificate.
    #[error("zero certificate failure for {what} at z = {zero}: residual {residual:e} exceeds {bound:e}")]
    Certificate {
        what: String,
        zero: f64,
        residual: f64,
        bound: f64,
    },

    /// Surface-gradient evaluation requested at a coordinate pole.
    #[error("pole evaluation rejected: sin(theta) = {sin_theta:e}")]
    Pole { sin_theta: f64 },

    /// Grid construction parameter outside the supported range.
    #[error("grid parameter out of range: {0}")]
    GridParameter(String),

    /// Two sample sets live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A point lies outside the domain required by the operation.
    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    /// Coefficient vector supported on the wrong eigenfamily.
    #[error("family mismatch: {0}")]
    FamilyMismatch(String),

    /// The spectral shift sits on the spectrum where the request needs it off.
    #[error("resonant shift: {0}")]
    Resonance(String),

    /// Fredholm alternative violated: the right-hand side is not orthogonal
    /// to the kernel of the shifted operator.
    #[error("non-solvable: {0}")]
    NonSolvable(String),

    /// Invalid input configuration.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Serialization format parse failure.
    #[error("parse error: {0}")]
    Parse(String),

    /// Document violates the field-spec schema.
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    /// Serialized file carries an unsupported format version.
    #[error("format version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: String, found: String },

    /// Serialized file failed its checksum.
    #[error("checksum failure: stored {stored}, computed {computed}")]
    Checksum { stored: String, computed: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
