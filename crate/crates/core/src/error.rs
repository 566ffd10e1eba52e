//! Error types shared across the workbench.

use thiserror::Error;

/// Errors produced by generator validation, analysis, and the quantum
/// construction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Structurally malformed generator spec (duplicates, empty sets,
    /// probabilities outside (0, 1], ...).
    #[error("malformed generator spec: {0}")]
    Spec(String),

    /// A state's outgoing probabilities do not sum to one.
    #[error("state '{state}': outgoing probabilities sum to {sum}, expected 1")]
    RowSum { state: String, sum: f64 },

    /// The support digraph is not strongly connected.
    #[error("generator is reducible: state '{unreached}' is not reachable from '{from}'")]
    Reducibility { from: String, unreached: String },

    /// A transition or word references an unknown state or symbol.
    #[error("unknown {kind} '{name}'")]
    Alphabet { kind: &'static str, name: String },

    /// Operation requires a unifilar generator.
    #[error("generator is not unifilar")]
    NotUnifilar,

    /// A word-enumeration or state-count budget was exceeded.
    #[error("resource budget exceeded: {0}")]
    Resource(String),

    /// Dissipation fell below the information-processing second-law bound,
    /// which signals an upstream numerical bug.
    #[error("work bound violated: dissipation {0} below -1e-6")]
    BoundViolation(f64),

    /// Invalid encoding scheme for the given generator.
    #[error("invalid encoding: {0}")]
    Encoding(String),

    /// The overlap fixed-point iteration did not converge.
    #[error("overlap iteration did not converge within {0} steps")]
    Convergence(usize),

    /// A matrix expected to be positive semidefinite had an eigenvalue
    /// below -1e-9.
    #[error("spectrum error: eigenvalue {0} below -1e-9")]
    Spectrum(f64),

    /// Gram(Y) differed from Gram(A) when building the channel isometry.
    #[error("isometry consistency violated: max |Gram(Y) - Gram(A)| = {0}")]
    Consistency(f64),

    /// Matrix dimensions do not match the expected shape.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A density matrix trace deviated from one.
    #[error("trace deviates from 1 by {0}")]
    Trace(f64),

    /// Parameter outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to meet its internal tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
