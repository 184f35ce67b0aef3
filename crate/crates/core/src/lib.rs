//! Internal (center-of-mass frame) density functional theory for 1D
//! few-body systems with two particle species.

pub mod eigen;
pub mod energy;
pub mod exact;
pub mod cli;
pub mod error;
pub mod grid;
pub mod hartree;
pub mod jacobi;
pub mod limits;
pub mod ks;
pub mod system;
pub mod tensor;

pub use error::{Error, Result};
