//! Desk-scale simulator and verification suite for a quantum algorithm that
//! estimates a handful of low-order eigenvalues (ground and excited state
//! energies) of the finite-difference Schrodinger operator
//! `M_h = -1/2 Δ_h + V_h` on the d-dimensional unit cube.
//!
//! The pipeline: discretize the operator on a tensor grid
//! ([`grid`], [`hamiltonian`]), construct a set of trial eigenvectors of the
//! unperturbed Laplacian ([`trial`]), run quantum phase estimation on each
//! trial vector ([`qpe`]) either via the exact outcome distribution or via a
//! Suzuki-Trotter statevector simulation ([`splitting`]), and select outcomes
//! into strictly increasing energy estimates ([`algorithm`]). A classical
//! dense eigensolver ([`spectrum`]) provides ground truth at small sizes.

pub mod algorithm;
pub mod config;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod qpe;
pub mod report;
pub mod rng;
pub mod sine;
pub mod spectrum;
pub mod splitting;
pub mod trial;

pub use error::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
