//! Collective three-level heat engines reduced to SU(3) irrep blocks.

pub mod engine;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod schur_weyl;
pub mod spectra;
pub mod su3;
pub mod thermo;

pub use error::{EngineError, Result};
