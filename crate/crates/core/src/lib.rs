//! HHL linear-solver workbench.
//!
//! Solves `A|x⟩ = |b⟩` with the HHL algorithm on an exact statevector
//! simulator and extracts the correlation energy `E = −b†A⁻¹b`. Scaling
//! strategies, clock-qubit fixing, native-gate synthesis and a circuit
//! optimizer live in their own modules; [`workbench`] wires them together.
//!
//! Qubit ordering is little-endian throughout: qubit `q` is bit `q` of a
//! basis index.

pub mod circuit;
pub mod error;
pub mod fixing;
pub mod hhl;
pub mod linalg;
pub mod optimizer;
pub mod problem;
pub mod scaling;
pub mod statevector;
pub mod unitary;
pub mod workbench;

pub use error::{Error, Result};
