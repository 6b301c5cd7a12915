//! Sets of naturals, partition filters and their dual ideals.

mod analysis;
mod convergence;
mod descriptor;
mod partition;

use std::sync::Arc;

pub use convergence::{exceptional_set_at, exceptional_sets, filter_o_convergence, ExceptionalSet};
pub use descriptor::{NamedPredicate, SetDescriptor};
pub use partition::{LengthRule, PartitionFilter};

use crate::error::{Error, Result};
use crate::lattice::{Verdict, Witness};

/// Largest point scanned when a set can only be sampled.
pub const SAMPLE_CAP: u64 = 1 << 20;

fn sample_bound(f: &PartitionFilter, depth: u64) -> u64 {
    let last = f.first_block() + depth.saturating_sub(1);
    f.witness_bound(last.min(63)).clamp(depth.max(1), SAMPLE_CAP)
}

/// Whether `h` meets only finitely many blocks of `f`.
///
/// Exact unless the descriptor is opaque or its structure is outside the
/// analysed fragment, in which case points up to a bound are sampled.
pub fn in_ideal(f: &PartitionFilter, h: &SetDescriptor, depth: u64) -> Verdict {
    let want = depth.max(1) as usize;
    match analysis::decide_image_finite(f, h) {
        Some(true) => {
            let w = match analysis::finite_image(f, h) {
                Some(blocks) => Witness::labeled("blocks", Witness::Indices(blocks)),
                None => Witness::Note("finitely many blocks".into()),
            };
            Verdict::holds(w, depth)
        }
        Some(false) => {
            let blocks = analysis::blocks_met(f, h, want, SAMPLE_CAP);
            Verdict::fails(Witness::labeled("blocks", Witness::Indices(blocks)), depth)
        }
        None => {
            let blocks = analysis::blocks_met(f, h, want, sample_bound(f, depth));
            if blocks.len() >= want {
                Verdict::fails(Witness::labeled("blocks", Witness::Indices(blocks)), depth)
            } else {
                Verdict::unknown(depth)
            }
        }
    }
}

/// Whether the set is provably empty; `false` when undecided.
pub fn is_certainly_empty(s: &SetDescriptor) -> bool {
    analysis::decide_empty(s) == Some(true)
}

/// Whether the set is provably finite; `None` when undecided.
pub fn decide_finite(s: &SetDescriptor) -> Option<bool> {
    analysis::decide_finite(s)
}

/// `Σ_{k ∈ s} ρᵏ` exactly, when `s` is a small eventually periodic set.
pub fn exact_geometric_sum(s: &SetDescriptor, ratio: &crate::lattice::Rational) -> Option<crate::lattice::Rational> {
    analysis::geometric_sum(s, ratio)
}

/// Least member, searching exactly where possible and up to `SAMPLE_CAP` otherwise.
pub fn least_member(s: &SetDescriptor) -> Option<u64> {
    if is_certainly_empty(s) {
        return None;
    }
    (1..=SAMPLE_CAP).find(|&n| s.contains(n))
}

/// Membership of `a` in the filter itself.
pub fn in_filter(f: &PartitionFilter, a: &SetDescriptor, depth: u64) -> Verdict {
    in_ideal(f, &a.clone().complement(), depth)
}

/// `h` is stationary when it is not in the dual ideal; the witness lists
/// blocks met by `h`.
pub fn is_stationary(f: &PartitionFilter, h: &SetDescriptor, depth: u64) -> Verdict {
    in_ideal(f, h, depth).negate()
}

/// One point of `j` in every block that `j` meets: the least one.
pub fn select_sparse_stationary(f: &PartitionFilter, j: &SetDescriptor, depth: u64) -> Result<SetDescriptor> {
    if !is_stationary(f, j, depth).is_holds() {
        return Err(Error::NotStationary { depth });
    }
    Ok(match f {
        PartitionFilter::Singletons => j.clone(),
        _ => SetDescriptor::first_in_blocks(f.clone(), j.clone()),
    })
}

/// A stationary `J ⊆ i` with `J \ a` finite for every `a` in `sets`.
///
/// Starts from the sparse selection and removes, for each `a`, the
/// finitely many selected points outside it.
pub fn diagonal_witness(
    f: &PartitionFilter,
    sets: &[SetDescriptor],
    i: &SetDescriptor,
    depth: u64,
) -> Result<SetDescriptor> {
    let sparse = select_sparse_stationary(f, i, depth)?;
    let mut removed = std::collections::BTreeSet::new();
    for (n, a) in sets.iter().enumerate().take(depth as usize) {
        let outside = a.clone().complement();
        if !in_ideal(f, &outside, depth).is_holds() {
            return Err(Error::Precondition(format!("set {} is not in the filter", n + 1)));
        }
        let blocks = analysis::finite_image(f, &outside).ok_or_else(|| Error::Construction {
            depth,
            detail: format!("blocks outside set {} are not enumerable", n + 1),
        })?;
        for k in blocks {
            if let Some(p) = least_in_block(f, &sparse, k) {
                if !a.contains(p) {
                    removed.insert(p);
                }
            }
        }
    }
    if removed.is_empty() {
        return Ok(sparse);
    }
    Ok(sparse.minus(SetDescriptor::Finite(removed)))
}

fn least_in_block(f: &PartitionFilter, s: &SetDescriptor, k: u64) -> Option<u64> {
    let start = f.block_start(k)?;
    if f.has_finite_blocks() {
        f.block_members(k, u64::MAX).into_iter().find(|&n| s.contains(n))
    } else {
        (0..SAMPLE_CAP).map(|j| start.saturating_mul(2 * j + 1)).take_while(|&n| n < u64::MAX).find(|&n| s.contains(n))
    }
}

/// A partition `{D_k}` of an infinite set into finite pieces.
#[derive(Clone)]
pub struct Block {
    pub of: SetDescriptor,
    pieces: Arc<dyn Fn(u64) -> SetDescriptor + Send + Sync>,
}

impl Block {
    pub fn new(of: SetDescriptor, pieces: impl Fn(u64) -> SetDescriptor + Send + Sync + 'static) -> Self {
        Self { of, pieces: Arc::new(pieces) }
    }

    /// The blocks of a finite-block filter restricted to `of`.
    pub fn from_filter(f: &PartitionFilter, of: SetDescriptor) -> Result<Self> {
        if !f.has_finite_blocks() {
            return Err(Error::UnsupportedCombination("dyadic blocks are infinite".into()));
        }
        let (f, s) = (f.clone(), of.clone());
        Ok(Self::new(of, move |k| SetDescriptor::finite(f.block_members(k, u64::MAX)).intersect(s.clone())))
    }

    pub fn piece(&self, k: u64) -> SetDescriptor {
        (self.pieces)(k)
    }

    /// Pieces `1..=depth` are disjoint, inside `of`, and cover `of ∩ [1, bound]`
    /// where `bound` is the largest point they reach.
    pub fn check(&self, depth: u64) -> Verdict {
        let mut owner = std::collections::BTreeMap::new();
        for k in 1..=depth {
            let piece = self.piece(k);
            let pts = match analysis::eventually_periodic(&piece) {
                Some(_) if analysis::decide_finite(&piece) == Some(true) => piece.members_up_to(SAMPLE_CAP),
                _ => return Verdict::fails(Witness::labeled("infinite piece", Witness::Index(k)), depth),
            };
            for p in pts {
                if !self.of.contains(p) || owner.insert(p, k).is_some() {
                    return Verdict::fails(Witness::Pair(k, p), depth);
                }
            }
        }
        let bound = owner.keys().next_back().copied().unwrap_or(0);
        match (1..=bound).find(|&n| self.of.contains(n) && !owner.contains_key(&n)) {
            Some(_) => Verdict::unknown(depth),
            None => Verdict::holds(Witness::Index(bound), depth),
        }
    }
}
