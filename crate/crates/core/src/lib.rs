//! Steady-state AC-field sensing with periodically kicked Ising chains.
//!
//! * [`freefermion`]: exact mode-by-mode Floquet dynamics of the periodic
//!   transverse-field Ising chain.
//! * [`gaussian`]: Majorana covariance of spin blocks, Gaussian quantum
//!   Fisher information and explicit small-block density matrices.
//! * [`ed`]: exact diagonalization of the long-range variant.
//! * [`metrology`]: Fisher information, scaling fits and Bayesian estimation.

pub mod ed;
pub mod error;
pub mod freefermion;
pub mod gaussian;
pub mod linalg;
pub mod majorana;
pub mod metrology;
pub mod params;
pub mod pipeline;
pub mod su2;

pub use error::{Result, SenseError, Violation};
pub use params::{kgrid, validate, BlockSpec, InitialState, ModelParams, PulseShape, ValidatedParams};

pub use num_complex::Complex64;
