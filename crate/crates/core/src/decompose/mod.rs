//! Lebesgue, Sobczyk–Hammer and Yosida–Hewett decompositions with certificates.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::{self, SetDescriptor};
use crate::measures::{
    check_absolutely_continuous, check_continuous, check_purely_finitely_additive, check_singular, Charge, Region,
};
use crate::lattice::{Verdict, Witness};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionKind {
    Lebesgue,
    SobczykHammer,
    YosidaHewett,
}

impl fmt::Display for DecompositionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecompositionKind::Lebesgue => "lebesgue",
            DecompositionKind::SobczykHammer => "sobczyk-hammer",
            DecompositionKind::YosidaHewett => "yosida-hewett",
        })
    }
}

/// `m = part_a + part_b`, with the set that separates them when there is one.
///
/// Lebesgue: `part_a ≪ ν`, `part_b ⊥ ν`. Sobczyk–Hammer: `part_a`
/// continuous, `part_b` atomic. Yosida–Hewett: `part_a` countably additive,
/// `part_b` purely finitely additive.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub kind: DecompositionKind,
    pub part_a: Charge,
    pub part_b: Charge,
    pub witness_set: Option<Region>,
    pub certificates: Vec<(String, Verdict)>,
}

impl Decomposition {
    /// Every certificate Holds.
    pub fn certified(&self) -> bool {
        self.certificates.iter().all(|(_, v)| v.is_holds())
    }

    /// `part_a + part_b`.
    pub fn resum(&self) -> Result<Charge> {
        self.part_a.add(&self.part_b)
    }
}

fn nonnegative(nu: &Charge) -> Result<()> {
    let ok = nu.points().values().all(|w| w.is_nonneg())
        && nu.geometric_terms().iter().all(|t| t.coef.is_nonneg())
        && nu.diffuse_pieces().iter().all(|p| p.density.is_nonneg())
        && nu.charge().map_or(true, |c| c.value.is_nonneg());
    if !ok {
        return Err(Error::Precondition("the reference measure must be nonnegative".into()));
    }
    if nu.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: nu.dim() });
    }
    Ok(())
}

/// Atoms and pieces where `ν` is positive.
pub fn lebesgue_set(nu: &Charge) -> Region {
    Region::new(nu.atomic_support(), nu.diffuse_support())
}

/// `m^< = m` on `E`, `m^⊥ = m` off `E`, with `E` where `ν` is positive.
/// A charge of `m` goes to `m^<` when `ν` has one along the same filter,
/// else to `m^⊥`.
pub fn lebesgue_decompose(m: &Charge, nu: &Charge, depth: u64) -> Result<Decomposition> {
    nonnegative(nu)?;
    lebesgue_with_set(m, nu, &lebesgue_set(nu), depth)
}

/// Lebesgue split along a given set, e.g. one shared by a family.
pub fn lebesgue_with_set(m: &Charge, nu: &Charge, e: &Region, depth: u64) -> Result<Decomposition> {
    if m.space() != nu.space() {
        return Err(Error::UnsupportedCombination(format!("spaces {} and {}", m.space(), nu.space())));
    }
    let charged_nu = match (m.charge(), nu.charge()) {
        (Some(a), Some(b)) if a.filter != b.filter => {
            return Err(Error::UnsupportedCombination(format!("charges along {} and {}", a.filter, b.filter)))
        }
        (_, Some(_)) => true,
        _ => false,
    };
    let sigma = m.sigma_part();
    let mut part_a = sigma.restrict(e, depth)?;
    let mut part_b = sigma.restrict(&e.complement(), depth)?;
    if charged_nu {
        part_a = part_a.add(&m.charge_part())?;
    } else {
        part_b = part_b.add(&m.charge_part())?;
    }
    let certificates = vec![
        ("absolutely continuous".to_string(), check_absolutely_continuous(&part_a, nu, depth)?),
        ("singular".to_string(), check_singular(&part_b, nu, depth)?),
    ];
    Ok(Decomposition { kind: DecompositionKind::Lebesgue, part_a, part_b, witness_set: Some(e.clone()), certificates })
}

/// `m^s` is the density, `m^a` the atoms and the charge.
pub fn sobczyk_hammer_decompose(m: &Charge, depth: u64) -> Result<Decomposition> {
    sobczyk_hammer_with_set(m, &Region::diffuse(m.diffuse_support()), depth)
}

/// Sobczyk–Hammer split along a part of the segment covering the density.
pub fn sobczyk_hammer_with_set(m: &Charge, v: &Region, depth: u64) -> Result<Decomposition> {
    if !m.diffuse_support().minus(&v.segment).is_empty() || !filters::is_certainly_empty(&v.atoms) {
        return Err(Error::Precondition("the set must be a part of the segment covering the density".into()));
    }
    let part_a = m.diffuse_part();
    let part_b = m.atomic_part().add(&m.charge_part())?;
    let certificates = vec![
        ("continuous".to_string(), check_continuous(&part_a, depth)?),
        ("atomic".to_string(), check_atomic(&part_b, depth)?),
    ];
    Ok(Decomposition { kind: DecompositionKind::SobczykHammer, part_a, part_b, witness_set: Some(v.clone()), certificates })
}

/// Largest partition size scanned for the charge.
const PARTITION_SCAN: u64 = 32;

/// Atomicity: no density; every atom is indivisible; a charge lands on
/// exactly one piece of every measured finite partition scanned.
pub fn check_atomic(m: &Charge, depth: u64) -> Result<Verdict> {
    let depth = depth.max(1);
    if let Some(p) = m.diffuse_pieces().first() {
        return Ok(Verdict::fails(Witness::labeled("piece", Witness::Note(p.interval.to_string())), depth));
    }
    if let Some(c) = m.charge() {
        let f = &c.filter;
        for k in 1..=depth.min(PARTITION_SCAN) {
            let head: Vec<SetDescriptor> = (0..k)
                .map(|i| SetDescriptor::block_union(f.clone(), SetDescriptor::singleton(f.first_block() + i)))
                .collect();
            let rest = SetDescriptor::block_union(f.clone(), SetDescriptor::tail_from(f.first_block() + k))
                .intersect(SetDescriptor::tail_from(1));
            let pieces: Vec<SetDescriptor> = head.into_iter().chain([rest]).collect();
            let in_f = pieces.iter().filter(|p| filters::in_filter(f, p, depth).is_holds()).count();
            if in_f != 1 {
                return Ok(Verdict::fails(Witness::labeled("partition size", Witness::Index(k + 1)), depth));
            }
        }
    }
    let mut atoms: Vec<u64> = m.points().keys().copied().filter(|&k| k <= depth).collect();
    for t in m.geometric_terms() {
        atoms.extend((1..=depth).filter(|&k| t.support.contains(k)));
    }
    atoms.sort_unstable();
    atoms.dedup();
    Ok(Verdict::holds(Witness::labeled("indivisible atoms", Witness::Indices(atoms)), depth))
}

/// `m_0` is the charge at infinity, `m − m_0` the atoms and the density.
pub fn yosida_hewett_decompose(m: &Charge, depth: u64) -> Result<Decomposition> {
    let part_a = m.sigma_part();
    let part_b = m.charge_part();
    let certificates = vec![
        ("countably additive".to_string(), check_countably_additive(&part_a, depth)?),
        ("purely finitely additive".to_string(), check_purely_finitely_additive(&part_b, depth)?),
    ];
    Ok(Decomposition { kind: DecompositionKind::YosidaHewett, part_a, part_b, witness_set: None, certificates })
}

/// Countable additivity along the singletons: the total lies within the
/// singleton sum to `depth` plus the tail envelope, and no charge.
pub fn check_countably_additive(m: &Charge, depth: u64) -> Result<Verdict> {
    let depth = depth.max(1);
    if let Some(c) = m.charge() {
        return Ok(Verdict::fails(Witness::labeled("charge", Witness::Element(c.value.clone())), depth));
    }
    let atoms = Region::points(SetDescriptor::all());
    let total = m.evaluate(&atoms, depth)?;
    let head = (1..=depth).fold(crate::lattice::LatticeElement::zero(m.dim()), |acc, k| &acc + &m.weight(k));
    let tail = m.evaluate(&Region::points(SetDescriptor::tail_from(depth + 1)), depth)?;
    if !total.overlaps(&tail.add_exact(&head)) {
        return Ok(Verdict::fails(Witness::labeled("singleton sum", Witness::Index(depth)), depth));
    }
    Ok(Verdict::holds(Witness::labeled("singleton sums enclose the total to", Witness::Index(depth)), depth))
}

/// The union of the witness sets of several decompositions.
pub fn union_witness<'a>(decs: impl IntoIterator<Item = &'a Decomposition>) -> Region {
    decs.into_iter().filter_map(|d| d.witness_set.as_ref()).fold(Region::empty(), |acc, r| acc.union(r))
}
