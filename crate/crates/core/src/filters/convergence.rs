use num_traits::{One, Signed};

use super::descriptor::SetDescriptor;
use super::partition::PartitionFilter;
use super::{in_ideal, is_stationary};
use crate::error::{Error, Result};
use crate::lattice::{LatticeElement, Piece, Regulator, Sequence, Verdict, Witness};

/// Finite parts are listed point by point up to this index.
const ENUMERATE_CAP: u64 = 1 << 12;

/// The bad indices at level `p`: `surely` certainly violate
/// `|x_k − limit| <= r(p)`, `possibly` may.
#[derive(Clone, Debug)]
pub struct ExceptionalSet {
    pub level: u64,
    pub surely: SetDescriptor,
    pub possibly: SetDescriptor,
}

/// Exceptional sets for levels `1..=depth`.
pub fn exceptional_sets(x: &Sequence, limit: &LatticeElement, r: &Regulator, depth: u64) -> Result<Vec<ExceptionalSet>> {
    if x.dim() != limit.dim() || r.dim() != limit.dim() {
        return Err(Error::DimensionMismatch { expected: limit.dim(), found: x.dim().max(r.dim()) });
    }
    (1..=depth.max(1)).map(|p| level_set(x, limit, &r.eval(p), p, depth)).collect()
}

/// The exceptional set for one explicit bound.
pub fn exceptional_set_at(
    x: &Sequence,
    limit: &LatticeElement,
    bound: &LatticeElement,
    level: u64,
    depth: u64,
) -> Result<ExceptionalSet> {
    if x.dim() != limit.dim() || bound.dim() != limit.dim() {
        return Err(Error::DimensionMismatch { expected: limit.dim(), found: x.dim().max(bound.dim()) });
    }
    level_set(x, limit, bound, level, depth)
}

fn level_set(x: &Sequence, limit: &LatticeElement, bound: &LatticeElement, p: u64, depth: u64) -> Result<ExceptionalSet> {
    let bad = |k: u64| !x.term(k).add_exact(&-limit).abs_lower().le(bound);
    let unsure = |k: u64| !x.term(k).add_exact(&-limit).abs_upper().le(bound);
    let Some(pieces) = x.pieces() else {
        let surely = SetDescriptor::finite((1..=depth).filter(|&k| bad(k)));
        let good = SetDescriptor::finite((1..=depth).filter(|&k| !unsure(k)));
        return Ok(ExceptionalSet { level: p, surely, possibly: good.complement() });
    };
    let mut surely = SetDescriptor::empty();
    let mut possibly = SetDescriptor::empty();
    for piece in pieces {
        let (s, q) = piece_sets(piece, limit, bound, &bad, &unsure);
        surely = surely.union(s);
        possibly = possibly.union(q);
    }
    Ok(ExceptionalSet { level: p, surely: surely.simplified(), possibly: possibly.simplified() })
}

fn piece_sets(
    piece: &Piece,
    limit: &LatticeElement,
    bound: &LatticeElement,
    bad: &dyn Fn(u64) -> bool,
    unsure: &dyn Fn(u64) -> bool,
) -> (SetDescriptor, SetDescriptor) {
    let region = &piece.region;
    let delta = piece.target.add_exact(&-limit);
    let slack = bound - &delta.abs_upper();
    // good from index `k0` on
    if slack.is_nonneg() {
        if let Ok(k0) = piece.envelope.least_index_below(&slack) {
            return finite_part(region, k0, bad, unsure);
        }
    }
    // certainly bad from some index on, in a component where the target is too far
    let far = delta.abs_lower();
    for i in 0..far.dim() {
        let gap = far.coord(i) - bound.coord(i);
        if !gap.is_positive() {
            continue;
        }
        let half = gap / crate::lattice::rational::int(2);
        let mut target: Vec<_> = piece.envelope.eval(1).coords().iter().map(|c| c + crate::lattice::Rational::one()).collect();
        target[i] = half;
        let target = LatticeElement::new(target).expect("nonempty");
        if let Ok(k1) = piece.envelope.least_index_below(&target) {
            let (early, _) = finite_part(region, k1, bad, unsure);
            let surely = region.clone().intersect(SetDescriptor::tail_from(k1)).union(early);
            return (surely, region.clone());
        }
    }
    let (early, _) = finite_part(region, ENUMERATE_CAP.min(64), bad, unsure);
    (early, region.clone())
}

/// Bad indices of `region` below `k0`, listed when small.
fn finite_part(
    region: &SetDescriptor,
    k0: u64,
    bad: &dyn Fn(u64) -> bool,
    unsure: &dyn Fn(u64) -> bool,
) -> (SetDescriptor, SetDescriptor) {
    if k0 <= ENUMERATE_CAP {
        let members = region.members_up_to(k0.saturating_sub(1));
        let surely = SetDescriptor::finite(members.iter().copied().filter(|&k| bad(k)));
        let possibly = SetDescriptor::finite(members.into_iter().filter(|&k| unsure(k)));
        (surely, possibly)
    } else {
        let members = region.members_up_to(ENUMERATE_CAP);
        let surely = SetDescriptor::finite(members.into_iter().filter(|&k| bad(k)));
        (surely, region.clone().intersect(SetDescriptor::below(k0)))
    }
}

/// Convergence along the filter: for each level `p <= depth` the indices
/// where `|x_k − limit| <= r(p)` fails must lie in the dual ideal.
///
/// Holds when every possibly-bad set is in the ideal, Fails with the first
/// level whose surely-bad set is stationary, Unknown otherwise.
pub fn filter_o_convergence(
    f: &PartitionFilter,
    x: &Sequence,
    limit: &LatticeElement,
    r: &Regulator,
    depth: u64,
) -> Result<Verdict> {
    let depth = depth.max(1);
    let sets = exceptional_sets(x, limit, r, depth)?;
    for e in &sets {
        if is_stationary(f, &e.surely, depth).is_holds() {
            return Ok(Verdict::fails(Witness::labeled(format!("level {}", e.level), Witness::Set(e.surely.clone())), depth));
        }
    }
    let mut table = vec![];
    for e in sets {
        if !in_ideal(f, &e.possibly, depth).is_holds() {
            return Ok(Verdict::unknown(depth));
        }
        table.push((e.level, e.possibly));
    }
    Ok(Verdict::holds(Witness::Table(table), depth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rational::rat;
    use crate::lattice::o_convergence_check;

    fn one() -> LatticeElement {
        LatticeElement::from_ints(&[1])
    }

    fn halves() -> Regulator {
        Regulator::geometric(one(), rat(1, 2)).unwrap()
    }

    #[test]
    fn geometric_converges_along_cofinite() {
        let x = Sequence::geometric(one(), rat(1, 2)).unwrap();
        let v = filter_o_convergence(&PartitionFilter::Singletons, &x, &LatticeElement::zero(1), &halves(), 20).unwrap();
        assert!(v.is_holds(), "{v}");
    }

    #[test]
    fn evens_indicator_fails() {
        let x = Sequence::switch(SetDescriptor::evens(), Sequence::constant(one()), Sequence::constant(LatticeElement::zero(1)));
        let v = filter_o_convergence(&PartitionFilter::Singletons, &x, &LatticeElement::zero(1), &halves(), 10).unwrap();
        assert!(v.is_fails());
        assert_eq!(v.witness.unwrap().to_string(), "level 1: (arith 0 2)");
    }

    #[test]
    fn one_dyadic_block_is_negligible() {
        let d = PartitionFilter::DyadicValuationBlocks;
        let block1 = SetDescriptor::block_union(d.clone(), SetDescriptor::singleton(1));
        let tail = Sequence::geometric(one(), rat(1, 2)).unwrap();
        let x = Sequence::switch(block1, Sequence::constant(one()), tail);
        let v = filter_o_convergence(&d, &x, &LatticeElement::zero(1), &halves(), 12).unwrap();
        assert!(v.is_holds(), "{v}");
        let v = filter_o_convergence(&PartitionFilter::Singletons, &x, &LatticeElement::zero(1), &halves(), 12).unwrap();
        assert!(v.is_fails());
    }

    #[test]
    fn harmonic_needs_reindexing_for_order_check() {
        let x = Sequence::harmonic(one()).unwrap();
        let zero = LatticeElement::zero(1);
        let cofinite = filter_o_convergence(&PartitionFilter::Singletons, &x, &zero, &halves(), 30).unwrap();
        assert!(cofinite.is_holds());
        assert!(o_convergence_check(&x, &zero, &halves(), 30).unwrap().is_fails());
        let h = Regulator::harmonic(one()).unwrap();
        assert!(o_convergence_check(&x, &zero, &h, 30).unwrap().is_holds());
    }
}
