use std::fmt;

use num_traits::{One, Zero};

use super::charge::{AtomicSpace, Charge};
use super::segment::{DyadicInterval, Region};
use crate::error::{Error, Result};
use crate::filters::{self, PartitionFilter, SetDescriptor};
use crate::lattice::rational::{self, Rational};
use crate::lattice::{LatticeElement, Regulator, Verdict, Witness};

/// Largest finite space whose subsets are enumerated.
pub const BRUTE_FORCE_ATOMS: u64 = 20;

/// Deepest dyadic level whose piece masses are checked.
pub const CONTINUITY_LEVELS: u64 = 20;

fn same_space(m: &Charge, nu: &Charge) -> Result<()> {
    if m.space() != nu.space() {
        return Err(Error::UnsupportedCombination(format!("spaces {} and {}", m.space(), nu.space())));
    }
    if nu.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: nu.dim() });
    }
    if let (Some(a), Some(b)) = (m.charge(), nu.charge()) {
        if a.filter != b.filter {
            return Err(Error::UnsupportedCombination(format!("charges along {} and {}", a.filter, b.filter)));
        }
    }
    Ok(())
}

fn piece_note(i: &DyadicInterval) -> Witness {
    Witness::labeled("piece", Witness::Note(i.to_string()))
}

/// Atoms of `m` inside `s` whose `nu` weight test fails, up to `depth`.
fn first_atom(m: &Charge, s: &SetDescriptor, depth: u64, bad: impl Fn(u64) -> bool) -> Option<u64> {
    let listed = m.points().keys().copied().filter(|&k| s.contains(k));
    let scanned = (1..=depth).filter(|&k| s.contains(k) && !m.weight(k).is_zero());
    let mut all: Vec<u64> = listed.chain(scanned).collect();
    all.sort_unstable();
    all.into_iter().find(|&k| bad(k))
}

/// Absolute continuity `m ≪ ν`.
///
/// Atoms and pieces where `ν` vanishes must carry no mass of `m`; a charge
/// of `m` needs a charge of `ν` along the same filter. On small finite
/// spaces the moduli `p_n` are enumerated and must reach zero.
pub fn check_absolutely_continuous(m: &Charge, nu: &Charge, depth: u64) -> Result<Verdict> {
    same_space(m, nu)?;
    let depth = depth.max(1);
    let null = |k: u64| nu.weight(k).is_zero();
    if let Some(k) = first_atom(m, &m.atomic_support(), depth, null) {
        return Ok(Verdict::fails(Witness::labeled("atom", Witness::Index(k)), depth));
    }
    let nu_seg = nu.diffuse_support();
    for p in m.diffuse_pieces() {
        let uncovered = super::segment::Segment::from_intervals([p.interval]).minus(&nu_seg);
        if let Some(i) = uncovered.parts().first() {
            return Ok(Verdict::fails(piece_note(i), depth));
        }
    }
    if m.charge().is_some() && nu.charge().is_none() {
        let tail = SetDescriptor::tail_from(depth + 1);
        return Ok(Verdict::fails(Witness::labeled("charged tail", Witness::Set(tail)), depth));
    }
    let beyond = m
        .geometric_terms()
        .iter()
        .map(|t| t.support.clone().intersect(SetDescriptor::tail_from(depth + 1)).minus(nu.atomic_support()))
        .any(|s| !filters::is_certainly_empty(&s));
    if beyond {
        return Ok(Verdict::unknown(depth));
    }
    if let AtomicSpace::FiniteAtoms(n) = m.space() {
        if n <= BRUTE_FORCE_ATOMS {
            let least = (1..=n).map(|k| nu.weight(k).coord(0).clone()).filter(|w| !w.is_zero()).min();
            let n0 = match least {
                Some(w) => rational::ceil_u64(&(Rational::one() / w)).unwrap_or(1) + 1,
                None => 1,
            };
            let moduli = brute_force_ac_moduli(m, nu, n0)?;
            if !moduli[n0 as usize - 1].is_zero() {
                return Ok(Verdict::fails(Witness::labeled("modulus", Witness::Index(n0)), depth));
            }
            return Ok(Verdict::holds(Witness::labeled("moduli vanish from", Witness::Index(n0)), depth));
        }
    }
    Ok(Verdict::holds(Witness::Note("ν-null atoms and pieces carry no mass".into()), depth))
}

/// `p_n = sup{|m(A)| : ν(A) <= 1/n}` for `n = 1..=count`, by enumerating
/// every subset of a finite space.
pub fn brute_force_ac_moduli(m: &Charge, nu: &Charge, count: u64) -> Result<Vec<LatticeElement>> {
    let AtomicSpace::FiniteAtoms(n) = m.space() else {
        return Err(Error::Precondition("moduli are enumerated on finite spaces only".into()));
    };
    if n > BRUTE_FORCE_ATOMS {
        return Err(Error::Precondition(format!("{n} atoms exceed the enumeration limit")));
    }
    same_space(m, nu)?;
    let wm: Vec<LatticeElement> = (1..=n).map(|k| m.weight(k)).collect();
    let wn: Vec<Rational> = (1..=n).map(|k| nu.weight(k).coord(0).clone()).collect();
    let mut subsets: Vec<(Rational, LatticeElement)> = Vec::with_capacity(1 << n);
    let mut mass = LatticeElement::zero(m.dim());
    let mut size = Rational::zero();
    let mut inside = vec![false; n as usize];
    subsets.push((size.clone(), mass.clone()));
    for g in 1u64..(1 << n) {
        let bit = g.trailing_zeros() as usize;
        if inside[bit] {
            mass = &mass - &wm[bit];
            size -= &wn[bit];
        } else {
            mass = &mass + &wm[bit];
            size += &wn[bit];
        }
        inside[bit] = !inside[bit];
        subsets.push((size.clone(), mass.abs()));
    }
    Ok((1..=count)
        .map(|j| {
            let cap = rational::rat(1, j as i64);
            subsets.iter().filter(|(s, _)| *s <= cap).fold(LatticeElement::zero(m.dim()), |acc, (_, v)| acc.sup(v))
        })
        .collect())
}

/// Mutual singularity, with the witness `F` carrying `m` and null for `ν`.
///
/// A charge of `m` against a chargeless `ν` is singular through the sets
/// `A_k = F ∪ {n >= k}`: `ν(A_k) → 0` and `m` vanishes off `A_k` on measured sets.
pub fn check_singular(m: &Charge, nu: &Charge, depth: u64) -> Result<Verdict> {
    same_space(m, nu)?;
    let depth = depth.max(1);
    let carrying = |k: u64| !nu.weight(k).is_zero();
    if let Some(k) = first_atom(m, &m.atomic_support(), depth, carrying) {
        return Ok(Verdict::fails(Witness::labeled("atom", Witness::Index(k)), depth));
    }
    let shared = m.diffuse_support().intersect(&nu.diffuse_support());
    if let Some(i) = shared.parts().first() {
        return Ok(Verdict::fails(piece_note(i), depth));
    }
    let f = m.atomic_support();
    let overlap = f.clone().intersect(nu.atomic_support()).intersect(SetDescriptor::tail_from(depth + 1));
    if !filters::is_certainly_empty(&overlap) {
        return Ok(Verdict::unknown(depth));
    }
    match (m.charge(), nu.charge()) {
        (Some(c), Some(_)) => Ok(Verdict::fails(Witness::labeled("shared charge", Witness::Note(c.filter.to_string())), depth)),
        (Some(_), None) => Ok(Verdict::holds(Witness::labeled("A_k = F ∪ tail from k, F", Witness::Set(f)), depth)),
        (None, Some(c)) => {
            if !filters::in_ideal(&c.filter, &f, depth).is_holds() {
                return Ok(Verdict::unknown(depth));
            }
            Ok(Verdict::holds(Witness::labeled("F", Witness::Set(f)), depth))
        }
        (None, None) => Ok(Verdict::holds(Witness::labeled("F", Witness::Set(f)), depth)),
    }
}

/// Continuity of `v(m)`: level-`n` dyadic partitions of the density have
/// pieces of mass at most `max|density|·2⁻ⁿ`; an atom or a charge cannot be split.
pub fn check_continuous(m: &Charge, depth: u64) -> Result<Verdict> {
    let depth = depth.max(1);
    if let Some(k) = m.points().keys().next() {
        return Ok(Verdict::fails(Witness::labeled("atom", Witness::Index(*k)), depth));
    }
    for t in m.geometric_terms() {
        if let Some(k) = filters::least_member(&t.support) {
            return Ok(Verdict::fails(Witness::labeled("atom", Witness::Index(k)), depth));
        }
    }
    if let Some(c) = m.charge() {
        return Ok(Verdict::fails(Witness::labeled("charge", Witness::Element(c.value.clone())), depth));
    }
    let levels = depth.min(CONTINUITY_LEVELS);
    let bound = m.max_density();
    for (n, mass) in continuity_moduli(m, levels).iter().enumerate() {
        let p = bound.scale(&rational::pow(&rational::rat(1, 2), n as u64 + 1));
        if !mass.le(&p) {
            return Ok(Verdict::fails(Witness::labeled("level", Witness::Index(n as u64 + 1)), depth));
        }
    }
    Ok(Verdict::holds(Witness::labeled("p_n = max|density|·2^-n to level", Witness::Index(levels)), depth))
}

/// Largest `v(m)` mass of a level-`n` dyadic interval, `n = 1..=levels`.
pub fn continuity_moduli(m: &Charge, levels: u64) -> Vec<LatticeElement> {
    (1..=levels as u32)
        .map(|n| {
            let mut by_cell: std::collections::BTreeMap<DyadicInterval, LatticeElement> = Default::default();
            let mut best = LatticeElement::zero(m.dim());
            for p in m.diffuse_pieces() {
                let d = p.density.abs();
                if p.interval.level >= n {
                    let cell = p.interval.ancestor(n);
                    let add = d.scale(&p.interval.length());
                    let v = match by_cell.get(&cell) {
                        Some(v) => v + &add,
                        None => add,
                    };
                    by_cell.insert(cell, v);
                } else {
                    best = best.sup(&d.scale(&rational::pow(&rational::rat(1, 2), n as u64)));
                }
            }
            by_cell.values().fold(best, |acc, v| acc.sup(v))
        })
        .collect()
}

/// Pure finite additivity: no mass on atoms or pieces. The zero measure counts.
pub fn check_purely_finitely_additive(m: &Charge, depth: u64) -> Result<Verdict> {
    let depth = depth.max(1);
    if let Some(k) = m.points().keys().next() {
        return Ok(Verdict::fails(Witness::labeled("atom", Witness::Index(*k)), depth));
    }
    for t in m.geometric_terms() {
        if let Some(k) = filters::least_member(&t.support) {
            return Ok(Verdict::fails(Witness::labeled("atom", Witness::Index(k)), depth));
        }
    }
    if let Some(p) = m.diffuse_pieces().first() {
        return Ok(Verdict::fails(piece_note(&p.interval), depth));
    }
    match m.charge() {
        Some(c) => Ok(Verdict::holds(Witness::labeled("charge", Witness::Element(c.value.clone())), depth)),
        None => Ok(Verdict::holds(Witness::Note("zero measure".into()), depth)),
    }
}

/// A sequence `H_1, H_2, …` of pairwise disjoint atom sets.
#[derive(Clone, PartialEq, Debug)]
pub enum DisjointFamily {
    /// `H_j = {j}`
    Singletons,
    /// `H_j` is the `j`-th block of the filter.
    Blocks(PartitionFilter),
    /// Listed sets; `H_j` is empty past the end.
    Explicit(Vec<SetDescriptor>),
}

impl DisjointFamily {
    pub fn member(&self, j: u64) -> SetDescriptor {
        match self {
            DisjointFamily::Singletons => SetDescriptor::singleton(j),
            DisjointFamily::Blocks(f) => SetDescriptor::block_union(f.clone(), SetDescriptor::singleton(f.first_block() + j - 1)),
            DisjointFamily::Explicit(v) => v.get(j as usize - 1).cloned().unwrap_or_else(SetDescriptor::empty),
        }
    }

    /// Members `1..=count` are pairwise disjoint on points up to `bound`.
    pub fn check_disjoint(&self, count: u64, bound: u64) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        (1..=count).all(|j| self.member(j).members_up_to(bound).into_iter().all(|p| seen.insert(p)))
    }
}

impl fmt::Display for DisjointFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisjointFamily::Singletons => f.write_str("singletons"),
            DisjointFamily::Blocks(p) => write!(f, "(blocks-of {p})"),
            DisjointFamily::Explicit(v) => {
                f.write_str("(sets")?;
                for s in v {
                    write!(f, " {s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Indices searched past the previous choice before giving up.
const SELECTION_WINDOW: u64 = 1 << 12;

/// Increasing indices `n_1 < n_2 < …` (at most `depth`) such that
/// `v(m)(H_{n_l}) <= q(l)` for every measure, so that the tails from `k` on
/// stay below `q(k)`.
pub fn extract_sigma_subsequence(ms: &[Charge], h: &DisjointFamily, q: &Regulator, depth: u64) -> Result<Vec<u64>> {
    let mut chosen = vec![];
    let mut prev = 0u64;
    for l in 1..=depth {
        let bound = q.eval(l);
        let mut found = None;
        for n in prev + 1..=prev + SELECTION_WINDOW {
            let set = h.member(n);
            let mut ok = true;
            for m in ms {
                let v = m.variation(&Region::points(set.clone()), depth)?;
                if !v.total.upper.le(&bound) {
                    ok = false;
                    break;
                }
            }
            if ok {
                found = Some(n);
                break;
            }
        }
        let n = found.ok_or(Error::SelectionBlocked { index: l })?;
        chosen.push(n);
        prev = n;
    }
    Ok(chosen)
}
