//! Finitely additive vector-valued measures on atoms and a dyadic segment.

mod charge;
mod checks;
mod family;
mod segment;

pub use charge::{AtomicSpace, Charge, ChargeAtInfinity, DiffusePiece, GeometricTerm, SBoundedness, Variation};
pub use checks::{
    brute_force_ac_moduli, check_absolutely_continuous, check_continuous, check_purely_finitely_additive, check_singular,
    continuity_moduli, extract_sigma_subsequence, DisjointFamily, BRUTE_FORCE_ATOMS, CONTINUITY_LEVELS,
};
pub use family::{
    charge_tail_bound, evaluate, linear_geometric_envelope, linear_geometric_sup_from, tail_union, Family, Functional, PartKind,
    Rate,
};
pub use segment::{DyadicInterval, Region, Segment};

#[cfg(test)]
mod tests;
