//! Spectra and pseudospectra of truncated non-selfadjoint operators.

// Validation uses `!(x > 0.0)` style checks so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blockops;
pub mod error;
pub mod fourier_pde;
pub mod numlin;
pub mod pseudo;
pub mod study;
pub mod toeplitz;

pub use error::{Result, SpeclabError};
pub use numlin::{ComplexMatrix, ComplexPoint};
pub use pseudo::{ContourSet, GridSpec, PseudospectrumField};
