//! Quadratic Bell-type entanglement witness equivalent to the
//! positive-partial-transpose criterion, for qubit ⊗ qubit and
//! qubit ⊗ qutrit states.
//!
//! Local measurements are the tetrahedron POVM on the qubit and a 9-outcome
//! simplex POVM on the qutrit, each rotated by a local unitary. From the
//! joint outcome probabilities one forms three linear combinations
//! `Y₁, Y₂, Y₃`; the state is entangled iff `Y₁² + Y₂² − Y₃² > 0` for some
//! choice of local rotations.

pub mod error;
pub mod linalg;
pub mod optimize;
pub mod povm;
pub mod sampler;
pub mod states;
pub mod sweep;
pub mod unitaries;
pub mod witness;

#[cfg(test)]
mod oracle;

pub use error::{Error, Result};
pub use linalg::{BipartiteDims, ComplexMatrix};
pub use states::DensityMatrix;
