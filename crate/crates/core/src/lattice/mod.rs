//! Exact vector-lattice arithmetic over ℚ^d, regulators and order convergence.

mod dsequence;
mod element;
mod interval;
pub mod rational;
mod regulator;
mod sequence;
mod verdict;

pub use dsequence::{domination, weak_sigma_distributivity_probe, DSequence};
pub use element::{inf_finite, sup_finite, LatticeElement};
pub use interval::ValueInterval;
pub use rational::Rational;
pub use regulator::Regulator;
pub use sequence::{o_convergence_check, Piece, Sequence};
pub use verdict::{Outcome, Verdict, Witness};
