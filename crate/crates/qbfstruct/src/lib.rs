//! Structural parameters for quantified Boolean formulas.

pub mod error;
pub mod formula;
pub mod gen;
pub mod graphs;
pub mod kernel;
pub mod saw;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use formula::{Assignment, Lit, Matrix, Qbf, Quant, Var};
