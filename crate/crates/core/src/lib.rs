//! Generalized Pauli operators on a single qudit and the machinery built on them.
//!
//! * [`linalg`]: dense complex vectors and matrices over computational-basis
//!   indexed spaces, Kronecker products, roots of unity and seeded random states.
//! * [`weyl`]: the shift/phase (Weyl pair) operators, the d² operators
//!   `E_{i,j} = X_i Z_j`, and decomposition of any d×d matrix in that basis.
//! * [`channel`]: a system–environment coupling described by a γ table, the
//!   Pauli error weights it induces, environment measurement and correction.
//! * [`teleport`]: single-qudit teleportation through a generalized Bell pair.
//!
//! Conventions used throughout:
//!
//! * `ω = exp(+2πi/d)`.
//! * Composite index order is left factor most significant:
//!   `|i⟩⊗|j⟩ ↦ i·d₂ + j`.
//! * Pauli coefficients are stored at `i·d + j`.

pub mod channel;
mod error;
pub mod linalg;
pub mod teleport;
pub mod weyl;

pub use error::{Error, Result};
pub use linalg::{
    basis_ket, omega, random_state, root_of_unity, ComplexMatrix, ComplexVector, Dimension,
    StateVector,
};
pub use num_complex::Complex64;
pub use weyl::{PauliCoefficients, PauliIndex};

/// Tolerance for algebraic identities (unitarity, orthogonality, closed forms).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Tolerance for protocol outputs and round-trips.
pub const PROTOCOL_TOL: f64 = 1e-10;
