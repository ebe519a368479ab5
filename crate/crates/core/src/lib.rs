//! Informationally complete quantum measurements and their tomographic
//! efficiency.
//!
//! The crate is organised bottom-up:
//!
//! - [`opspace`]: Hilbert–Schmidt geometry of operators, double-ket
//!   vectorization and dense superoperators.
//! - [`measurements`]: POVM construction (SICs, generalized SICs, complete
//!   MUB, the qubit cube, random minimal IC measurements), validation and
//!   outcome purities.
//! - [`tomo`]: frame superoperators, reconstruction operators, scaled MSE
//!   formulas and the IC → tight IC → balanced → generalized SIC ladder.
//! - [`lie`]: structure constants of an operator basis and their complete
//!   antisymmetry.
//! - [`sim`]: Monte Carlo tomography with the linear estimator.
//! - [`io`]: JSON file formats shared with the command-line front end.
//!
//! Operators are dense `d × d` complex matrices; superoperators are dense
//! `d² × d²` matrices acting on column-stacked operator kets.

// NaN-rejecting guards are written as `!(x > tol)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod lie;
pub mod measurements;
pub mod opspace;
pub mod random;
pub mod sim;
pub mod tol;
pub mod tomo;

pub use error::{Error, Result};
pub use lie::StructureTensor;
pub use measurements::{Povm, PurityReport, ValidationReport};
pub use opspace::{DensityState, Operator, OperatorKet, Superoperator};
pub use sim::{Experiment, SimResult};
pub use tomo::{ReconstructionSet, TomoDiagnostics};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
