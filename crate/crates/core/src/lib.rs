//! Numerical laboratory for the driven Jaynes–Cummings model viewed as a
//! two-band lattice in Fock space.
//!
//! The crate builds the ladder, SSH and deformed-oscillator Hamiltonians as
//! dense matrices on a shared `{cell ⊗ sublattice}` basis, diagonalizes them,
//! identifies and fits topological edge states, and evolves states under
//! Lindblad dynamics or quantum trajectories to test the coherent-state
//! pointer property.
//!
//! Basis ordering is cell-major everywhere: `(A,0), (B,0), (A,1), (B,1), …`,
//! so index `2m` is `|A,m⟩` and `2m+1` is `|B,m⟩`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod export;
pub mod fock;
pub mod hamiltonian;
pub mod linalg;
pub mod par;
pub mod spectra;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Complex amplitude vector over some basis (Fock or ladder).
pub type StateVector = nalgebra::DVector<C64>;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Index of `|A, m⟩` in the cell-major ladder basis.
#[inline]
pub fn site_a(cell: usize) -> usize {
    2 * cell
}

/// Index of `|B, m⟩` in the cell-major ladder basis.
#[inline]
pub fn site_b(cell: usize) -> usize {
    2 * cell + 1
}
