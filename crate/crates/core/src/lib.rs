//! Vector-lattice-valued charges on ℕ, partition filters, measure
//! decompositions and depth-bounded verifiers for filter-convergence results.

pub mod decompose;
pub mod error;
pub mod filters;
pub mod harness;
pub mod lattice;
pub mod measures;
pub mod regulators;
pub mod suite;
pub mod text;

pub use error::{Error, Result};
