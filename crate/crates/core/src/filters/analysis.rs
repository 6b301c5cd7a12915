//! Exact finiteness decisions for descriptors.
//!
//! Most descriptors denote eventually periodic sets. Dyadic blocks are not
//! periodic, so those sets are lifted to a profile indexed by the 2-adic
//! valuation `v`: level `v` is the set of odd `o` with `2^v·o` in the set,
//! and the sequence of levels is itself eventually periodic in `v`.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::lattice::rational::{self, Rational};

use super::descriptor::SetDescriptor;
use super::partition::{LengthRule, PartitionFilter};

const MAX_PERIOD: u64 = 1 << 22;
const MAX_CELLS: u64 = 1 << 24;

/// An eventually periodic subset of `{0, 1, 2, ...}`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct EpSet {
    prefix: Vec<bool>,
    pattern: Vec<bool>,
}

impl EpSet {
    fn threshold(&self) -> u64 {
        self.prefix.len() as u64
    }

    fn period(&self) -> u64 {
        self.pattern.len() as u64
    }

    fn constant(value: bool) -> Self {
        Self { prefix: vec![], pattern: vec![value] }
    }

    fn from_fn(threshold: u64, period: u64, f: impl Fn(u64) -> bool) -> Option<Self> {
        if period == 0 || period > MAX_PERIOD || threshold > MAX_PERIOD {
            return None;
        }
        let prefix = (0..threshold).map(&f).collect();
        let shift = (period - threshold % period) % period;
        let pattern = (0..period).map(|r| f(threshold + (r + shift) % period)).collect();
        Some(Self { prefix, pattern })
    }

    fn from_finite(s: &BTreeSet<u64>) -> Option<Self> {
        let t = s.last().map_or(0, |m| m + 1);
        Self::from_fn(t, 1, |n| s.contains(&n))
    }

    pub(crate) fn contains(&self, n: u64) -> bool {
        match self.prefix.get(n as usize) {
            Some(&b) => b,
            None => self.pattern[(n % self.period()) as usize],
        }
    }

    fn complement(&self) -> Self {
        Self {
            prefix: self.prefix.iter().map(|b| !b).collect(),
            pattern: self.pattern.iter().map(|b| !b).collect(),
        }
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Option<Self> {
        let t = self.threshold().max(other.threshold());
        let p = self.period().lcm(&other.period());
        Self::from_fn(t, p, |n| op(self.contains(n), other.contains(n)))
    }

    /// Constant tail value, if the periodic part is constant.
    fn tail_constant(&self) -> Option<bool> {
        let first = self.pattern[0];
        self.pattern.iter().all(|&b| b == first).then_some(first)
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.tail_constant() == Some(false)
    }

    /// Members; only meaningful when finite.
    fn finite_members(&self) -> Vec<u64> {
        self.prefix.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect()
    }

    /// Odd members: whether there are infinitely many.
    fn odd_infinite(&self) -> bool {
        let p = self.period();
        self.pattern
            .iter()
            .enumerate()
            .any(|(r, &b)| b && (p % 2 == 1 || r % 2 == 1))
    }

    fn odd_nonempty(&self) -> bool {
        self.odd_infinite() || self.prefix.iter().enumerate().any(|(i, &b)| b && i % 2 == 1)
    }

    fn least_odd(&self) -> Option<u64> {
        let t = self.threshold();
        (0..t + 2 * self.period()).find(|&n| n % 2 == 1 && self.contains(n))
    }

    fn odd_members(&self) -> Vec<u64> {
        self.finite_members().into_iter().filter(|o| o % 2 == 1).collect()
    }
}

fn all_constant(set: &EpSet) -> Option<bool> {
    set.tail_constant()
}

/// Eventually periodic form of a descriptor, when it has one small enough.
pub(crate) fn eventually_periodic(desc: &SetDescriptor) -> Option<EpSet> {
    use SetDescriptor as D;
    match desc {
        D::Finite(s) => EpSet::from_finite(s),
        D::ArithProg { start, step } => EpSet::from_fn(*start, *step, |n| desc.contains(n)),
        D::DyadicValuation(v) => {
            if *v > 20 {
                return None;
            }
            EpSet::from_fn(1, 1 << (v + 1), |n| desc.contains(n))
        }
        D::BlockUnion { filter, indices } => {
            let idx = eventually_periodic(indices)?;
            block_union_ep(filter, &idx, desc)
        }
        D::FirstInBlocks { filter, within } => {
            let j = eventually_periodic(within)?;
            first_in_blocks_ep(filter, &j, desc)
        }
        D::Complement(s) => Some(eventually_periodic(s)?.complement()),
        D::Union(a, b) => eventually_periodic(a)?.combine(&eventually_periodic(b)?, |x, y| x || y),
        D::Intersection(a, b) => eventually_periodic(a)?.combine(&eventually_periodic(b)?, |x, y| x && y),
        D::Predicate(_) => None,
    }
}

fn block_union_ep(f: &PartitionFilter, idx: &EpSet, desc: &SetDescriptor) -> Option<EpSet> {
    let member = |n: u64| desc.contains(n);
    match f {
        PartitionFilter::Singletons => EpSet::from_fn(idx.threshold().max(1), idx.period(), member),
        PartitionFilter::Ranges(LengthRule { slope: 0, offset }) => {
            let t = idx.threshold().checked_mul(*offset)? + 1;
            EpSet::from_fn(t, offset.checked_mul(idx.period())?, member)
        }
        PartitionFilter::Ranges(rule) => {
            all_constant(idx)?;
            EpSet::from_fn(rule.start(idx.threshold().max(1)), 1, member)
        }
        PartitionFilter::TableWithTailRule(t) => {
            EpSet::from_fn(t.len() as u64 + 1 + idx.threshold(), idx.period(), member)
        }
        PartitionFilter::DyadicValuationBlocks => {
            all_constant(idx)?;
            let t = idx.threshold();
            if t > 20 {
                return None;
            }
            EpSet::from_fn(1, 1 << (t + 1), member)
        }
    }
}

fn first_in_blocks_ep(f: &PartitionFilter, j: &EpSet, desc: &SetDescriptor) -> Option<EpSet> {
    match f {
        PartitionFilter::Singletons => EpSet::from_fn(j.threshold().max(1), j.period(), |n| n > 0 && j.contains(n)),
        PartitionFilter::Ranges(LengthRule { slope: 0, offset }) => {
            let t = (j.threshold() / offset + 2).checked_mul(*offset)? + 1;
            let p = offset.lcm(&j.period());
            if t.checked_mul(*offset)? > MAX_CELLS {
                return None;
            }
            EpSet::from_fn(t, p, |n| desc.contains(n))
        }
        PartitionFilter::TableWithTailRule(t) => {
            EpSet::from_fn(j.threshold().max(t.len() as u64 + 1), j.period(), |n| desc.contains(n))
        }
        PartitionFilter::Ranges(_) | PartitionFilter::DyadicValuationBlocks => {
            if !j.is_finite() {
                return None;
            }
            let mut firsts = std::collections::BTreeMap::new();
            for n in j.finite_members().into_iter().filter(|&n| n > 0) {
                firsts.entry(f.block_of(n)).or_insert(n);
            }
            EpSet::from_finite(&firsts.into_values().collect())
        }
    }
}

/// Level sets by 2-adic valuation; `explicit[v]` for `v < v0`, then `cycle`
/// repeats.
#[derive(Clone, Debug)]
pub(crate) struct DyadicProfile {
    explicit: Vec<EpSet>,
    cycle: Vec<EpSet>,
}

impl DyadicProfile {
    fn level(&self, v: u64) -> &EpSet {
        let v0 = self.explicit.len() as u64;
        if v < v0 {
            &self.explicit[v as usize]
        } else {
            &self.cycle[((v - v0) % self.cycle.len() as u64) as usize]
        }
    }

    fn from_levels(v0: u64, cycle_len: u64, f: impl Fn(u64) -> Option<EpSet>) -> Option<Self> {
        if cycle_len == 0 || v0 > 64 || cycle_len > MAX_PERIOD {
            return None;
        }
        let explicit = (0..v0).map(&f).collect::<Option<Vec<_>>>()?;
        let cycle = (v0..v0 + cycle_len).map(&f).collect::<Option<Vec<_>>>()?;
        let cells: u64 = explicit.iter().chain(&cycle).map(|e| e.period() + e.threshold()).sum();
        (cells <= MAX_CELLS).then_some(Self { explicit, cycle })
    }

    fn from_ep(s: &EpSet) -> Option<Self> {
        let p = s.period();
        let e = p.trailing_zeros() as u64;
        let odd = p >> e;
        let t = s.threshold();
        let log_t = 64 - t.saturating_sub(1).leading_zeros() as u64;
        let v0 = e.max(log_t);
        let c = multiplicative_order_of_two(odd)?;
        if c.checked_mul(p)? > MAX_CELLS {
            return None;
        }
        Self::from_levels(v0, c, |v| {
            if v < v0 {
                let scale = 1u64 << v;
                let to = t.div_ceil(scale);
                EpSet::from_fn(to, p, |o| o.checked_mul(scale).is_some_and(|n| s.contains(n)))
            } else {
                let m = pow2_mod(v, p);
                EpSet::from_fn(0, p, |o| s.pattern[((m as u128 * o as u128) % p as u128) as usize])
            }
        })
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool + Copy) -> Option<Self> {
        let v0 = self.explicit.len().max(other.explicit.len()) as u64;
        let c = (self.cycle.len() as u64).lcm(&(other.cycle.len() as u64));
        Self::from_levels(v0, c, |v| self.level(v).combine(other.level(v), op))
    }

    fn complement(&self) -> Self {
        Self {
            explicit: self.explicit.iter().map(EpSet::complement).collect(),
            cycle: self.cycle.iter().map(EpSet::complement).collect(),
        }
    }

    /// Whether the underlying set meets only finitely many levels.
    fn image_finite(&self) -> bool {
        self.cycle.iter().all(|l| !l.odd_nonempty())
    }

    fn is_finite(&self) -> bool {
        self.image_finite() && self.explicit.iter().all(|l| !l.odd_infinite())
    }

    /// Nonempty levels among the first `count` found, scanning `v` upward.
    fn nonempty_levels(&self, count: usize) -> Vec<u64> {
        let horizon = self.explicit.len() as u64 + self.cycle.len() as u64 * (count as u64 + 1);
        (0..horizon).filter(|&v| self.level(v).odd_nonempty()).take(count).collect()
    }

    fn finite_members(&self) -> Option<Vec<u64>> {
        let mut out = vec![];
        for (v, level) in self.explicit.iter().enumerate() {
            for o in level.odd_members() {
                out.push(o.checked_mul(1u64.checked_shl(v as u32)?)?);
            }
        }
        out.sort_unstable();
        Some(out)
    }
}

fn pow2_mod(v: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut acc, mut base, mut e) = (1u128, 2u128 % m as u128, v);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m as u128;
        }
        base = base * base % m as u128;
        e >>= 1;
    }
    acc as u64
}

fn multiplicative_order_of_two(odd: u64) -> Option<u64> {
    if odd == 1 {
        return Some(1);
    }
    let mut x = 2 % odd;
    for k in 1..=odd {
        if x == 1 {
            return Some(k);
        }
        x = x * 2 % odd;
    }
    None
}

fn singleton_or_empty(x: Option<u64>) -> EpSet {
    match x {
        Some(o) => EpSet::from_finite(&BTreeSet::from([o])).expect("small"),
        None => EpSet::constant(false),
    }
}

pub(crate) fn profile(desc: &SetDescriptor) -> Option<DyadicProfile> {
    use SetDescriptor as D;
    match desc {
        D::BlockUnion { filter: PartitionFilter::DyadicValuationBlocks, indices } => {
            let idx = eventually_periodic(indices)?;
            DyadicProfile::from_levels(idx.threshold(), idx.period(), |v| Some(EpSet::constant(idx.contains(v))))
        }
        D::FirstInBlocks { filter: PartitionFilter::DyadicValuationBlocks, within } => {
            let p = profile(within)?;
            Some(DyadicProfile {
                explicit: p.explicit.iter().map(|l| singleton_or_empty(l.least_odd())).collect(),
                cycle: p.cycle.iter().map(|l| singleton_or_empty(l.least_odd())).collect(),
            })
        }
        D::Complement(s) => Some(profile(s)?.complement()),
        D::Union(a, b) => profile(a)?.combine(&profile(b)?, |x, y| x || y),
        D::Intersection(a, b) => profile(a)?.combine(&profile(b)?, |x, y| x && y),
        _ => DyadicProfile::from_ep(&eventually_periodic(desc)?),
    }
}

/// Exact decision of whether the set (ignoring 0) is empty.
pub(crate) fn decide_empty(desc: &SetDescriptor) -> Option<bool> {
    if let Some(e) = eventually_periodic(desc) {
        return Some(e.is_finite() && e.finite_members().iter().all(|&n| n == 0));
    }
    let p = profile(desc)?;
    Some(p.is_finite() && p.finite_members()?.is_empty())
}

/// Structural decision of whether the complement is finite.
fn decide_cofinite(desc: &SetDescriptor) -> Option<bool> {
    use SetDescriptor as D;
    match desc {
        D::ArithProg { step, .. } => Some(*step == 1),
        D::Finite(_) => Some(false),
        D::Complement(s) => decide_finite(s),
        D::Union(a, b) => (decide_cofinite(a) == Some(true) || decide_cofinite(b) == Some(true)).then_some(true),
        D::Intersection(a, b) => match (decide_cofinite(a), decide_cofinite(b)) {
            (Some(true), Some(true)) => Some(true),
            (Some(true), _) => decide_cofinite(b),
            (_, Some(true)) => decide_cofinite(a),
            _ => None,
        },
        _ => eventually_periodic(desc).map(|e| e.complement().is_finite()),
    }
}

/// Exact decision of whether the set is finite.
pub(crate) fn decide_finite(desc: &SetDescriptor) -> Option<bool> {
    use SetDescriptor as D;
    if let Some(e) = eventually_periodic(desc) {
        return Some(e.is_finite());
    }
    if let Some(p) = profile(desc) {
        return Some(p.is_finite());
    }
    match desc {
        D::Finite(_) => Some(true),
        D::ArithProg { .. } => Some(false),
        D::Union(a, b) => match (decide_finite(a), decide_finite(b)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        D::Intersection(a, b) => {
            if decide_finite(a) == Some(true) || decide_finite(b) == Some(true) {
                Some(true)
            } else if decide_cofinite(a) == Some(true) {
                decide_finite(b)
            } else if decide_cofinite(b) == Some(true) {
                decide_finite(a)
            } else {
                None
            }
        }
        D::Complement(s) => decide_cofinite(s),
        D::FirstInBlocks { filter, within } if filter.has_finite_blocks() => decide_finite(within),
        D::FirstInBlocks { within, .. } => decide_image_finite(&PartitionFilter::DyadicValuationBlocks, within),
        D::BlockUnion { filter, indices } if filter.has_finite_blocks() => decide_finite(indices),
        _ => None,
    }
}

/// Exact decision of whether the set meets finitely many blocks of `f`.
pub(crate) fn decide_image_finite(f: &PartitionFilter, desc: &SetDescriptor) -> Option<bool> {
    use SetDescriptor as D;
    if f.has_finite_blocks() {
        return decide_finite(desc);
    }
    if let Some(p) = profile(desc) {
        return Some(p.image_finite());
    }
    if decide_finite(desc) == Some(true) {
        return Some(true);
    }
    match desc {
        D::Finite(_) => Some(true),
        D::Union(a, b) => match (decide_image_finite(f, a), decide_image_finite(f, b)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        D::Intersection(a, b) => {
            if decide_image_finite(f, a) == Some(true) || decide_image_finite(f, b) == Some(true) {
                Some(true)
            } else if decide_cofinite(a) == Some(true) {
                decide_image_finite(f, b)
            } else if decide_cofinite(b) == Some(true) {
                decide_image_finite(f, a)
            } else {
                None
            }
        }
        D::Complement(s) => (decide_image_finite(f, s) == Some(true)).then_some(false),
        D::FirstInBlocks { filter, within } if filter == f => decide_image_finite(f, within),
        D::BlockUnion { filter, indices } if filter == f => decide_finite(indices),
        _ => None,
    }
}

/// Block indices met by a set whose image is finite, when enumerable.
pub(crate) fn finite_image(f: &PartitionFilter, desc: &SetDescriptor) -> Option<Vec<u64>> {
    let mut blocks: Vec<u64> = if f.has_finite_blocks() {
        let members = match eventually_periodic(desc) {
            Some(e) if e.is_finite() => e.finite_members(),
            Some(_) => return None,
            None => {
                let p = profile(desc)?;
                if !p.is_finite() {
                    return None;
                }
                p.finite_members()?
            }
        };
        members.into_iter().filter(|&n| n > 0).map(|n| f.block_of(n)).collect()
    } else {
        let p = profile(desc)?;
        if !p.image_finite() {
            return None;
        }
        (0..p.explicit.len() as u64).filter(|&v| p.level(v).odd_nonempty()).collect()
    };
    blocks.sort_unstable();
    blocks.dedup();
    Some(blocks)
}

/// Up to `count` block indices met by an infinite-image set, exactly when
/// a profile is available, else by scanning points up to `scan`.
pub(crate) fn blocks_met(f: &PartitionFilter, desc: &SetDescriptor, count: usize, scan: u64) -> Vec<u64> {
    if !f.has_finite_blocks() {
        if let Some(p) = profile(desc) {
            return p.nonempty_levels(count);
        }
    }
    let mut seen = BTreeSet::new();
    let mut order = vec![];
    for n in 1..=scan {
        if desc.contains(n) && seen.insert(f.block_of(n)) {
            order.push(f.block_of(n));
            if order.len() >= count {
                break;
            }
        }
    }
    order
}

/// `Σ_{k ∈ desc, k >= 1} ρᵏ` in closed form, for small eventually periodic sets.
pub(crate) fn geometric_sum(desc: &SetDescriptor, ratio: &Rational) -> Option<Rational> {
    const CAP: u64 = 1 << 12;
    if decide_empty(desc) == Some(true) {
        return Some(Rational::zero());
    }
    let e = eventually_periodic(desc)?;
    let (t, p) = (e.threshold().max(1), e.period());
    if t + p > CAP {
        return None;
    }
    let mut sum = Rational::zero();
    for n in 1..t {
        if e.contains(n) {
            sum += rational::pow(ratio, n);
        }
    }
    let cycle = Rational::one() - rational::pow(ratio, p);
    for n in t..t + p {
        if e.contains(n) {
            sum += rational::pow(ratio, n) / &cycle;
        }
    }
    Some(sum)
}
