//! Workbench for comparing classical and quantum implementations of hidden
//! Markov generators.
//!
//! Given an edge-emitting HMM generator of a stationary stochastic process,
//! this crate validates and classifies it, computes the memory cost
//! (dimension and entropy) and per-step work cost of its classical
//! implementation, constructs a quantum implementation (memory-state
//! overlaps, Gram spectra, explicit embeddings, and the transition isometry
//! with a decohering output register and a discarded auxiliary register),
//! and computes the corresponding quantum costs. The renewal module builds
//! the Simple Nonunifilar Source generator family used throughout the test
//! suites.

pub mod classical;
pub mod error;
pub mod generator;
pub mod numeric;
pub mod quantum;
pub mod renewal;
pub mod spectra;

pub use error::{Error, Result};
pub use generator::{Generator, GeneratorSpec, TransitionSpec, Word};
pub use quantum::{EncodingScheme, GramMatrix};
pub use renewal::RenewalFamily;
