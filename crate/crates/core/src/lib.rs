//! Finite-dimensional fermions realized on Spin(2n+1).
//!
//! The crate builds the Fock space of `n` fermionic modes, its Clifford
//! generators and the half-spin representation of so(2n+1), verifies the
//! enveloping-algebra identities behind the quasi-Hamiltonian exactly, and
//! checks a Feynman-Kac representation of the quasi-Hamiltonian semigroup by
//! Monte Carlo over a diffusion on Spin(2n+1).

pub mod clifford;
pub mod error;
pub mod estimate;
pub mod feynman_kac;
pub mod fock;
pub mod hamiltonian;
pub mod matrix;
pub mod parallel;
pub mod sde;
pub mod so_algebra;
pub mod spin_group;
pub mod uea;

pub use error::{Error, Result};
pub use estimate::McEstimate;
pub use matrix::{OperatorMatrix, Rep, C64};
pub use parallel::Execution;
