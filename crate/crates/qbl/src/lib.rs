//! Quadratic bosonic Lindbladians (QBLs) on one-dimensional chains.
//!
//! A QBL is a Markovian master equation with a quadratic bosonic Hamiltonian
//! and Lindblad operators linear in the mode operators. First and second
//! moments then close on themselves, so the full dissipative dynamics of an
//! `N`-mode chain reduces to dense 2N×2N linear algebra on the dynamical
//! matrix `G`. This crate builds the standard lattice models (the bosonic
//! Kitaev chain with onsite or next-nearest-neighbor damping, plus custom
//! stencils), and provides
//!
//! - rapidity spectra, stability/metastability classification, bulk band
//!   curves of the Bloch symbol, and winding numbers ([`spectral`]);
//! - ε-pseudospectra on complex-plane grids, pseudospectral abscissas,
//!   transient-growth bounds, and the bulk numerical-abscissa constant Ω
//!   ([`pseudospectrum`]);
//! - moment evolution, Gaussian steady states, propagator norms, linear
//!   mixing times, and transient-amplification experiments ([`dynamics`]);
//! - Majorana-boson edge modes: closed forms, pseudoeigenvector detection,
//!   residual/commutator certification, quasi-steady states, and disorder
//!   sweeps ([`modes`]);
//! - two-time correlators, susceptibilities, and steady-state power spectra
//!   ([`response`]);
//! - a brute-force truncated-Fock-space integrator that serves as ground
//!   truth for every sign and normalization convention ([`oracle`]).
//!
//! All matrices are dense complex `f64`; the supported envelope is chains of
//! up to 64 modes (2N ≤ 128).

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;
/// Dense complex matrix.
pub type CMatrix = Array2<C64>;
/// Dense complex vector.
pub type CVector = Array1<C64>;

pub mod dynamics;
mod linalg;
pub mod models;
pub mod modes;
pub mod nambu;
pub mod oracle;
pub mod pseudospectrum;
pub mod response;
pub mod spectral;

pub use linalg::{linear_fit, op_norm_2, sigma_min, LinearFit};

/// Errors produced by the crate.
#[derive(Debug, thiserror::Error)]
pub enum QblError {
    /// A structural invariant of an input matrix or vector is violated.
    #[error("structure violation: {0}")]
    Structure(String),
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A dense linear-algebra routine failed.
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    /// A numerical procedure failed to meet its contract.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<ndarray_linalg::error::LinalgError> for QblError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        QblError::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QblError>;
