//! Exact computation of the W-constraint tau function of an ADE singularity
//! via twisted modules of lattice vertex algebras.

pub mod error;
pub mod fock;
pub mod linalg;
pub mod numfield;
pub mod poly;
pub mod rootdata;
pub mod tausolver;
pub mod twist;

pub use error::{Error, Result};
pub use numfield::{CycScalar, Rational};
