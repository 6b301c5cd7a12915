use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::partition::PartitionFilter;

/// A named membership test. Sets built from one are opaque: membership is
/// decidable pointwise but ideal membership is only sampled.
#[derive(Clone)]
pub struct NamedPredicate {
    name: String,
    test: Arc<dyn Fn(u64) -> bool + Send + Sync>,
}

impl NamedPredicate {
    pub fn new(name: impl Into<String>, test: impl Fn(u64) -> bool + Send + Sync + 'static) -> Self {
        Self { name: name.into(), test: Arc::new(test) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Predicates available to the text format.
    pub fn builtin(name: &str) -> Option<Self> {
        let p = match name {
            "squares" => Self::new(name, |n| {
                let r = (n as f64).sqrt() as u64;
                (r.saturating_sub(1)..=r + 1).any(|x| x * x == n)
            }),
            "primes" => Self::new(name, |n| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)),
            "powers-of-two" => Self::new(name, |n| n.is_power_of_two()),
            _ => return None,
        };
        Some(p)
    }

    pub fn test(&self, n: u64) -> bool {
        (self.test)(n)
    }
}

impl PartialEq for NamedPredicate {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl fmt::Debug for NamedPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Predicate({})", self.name)
    }
}

/// Symbolic subset of ℕ = {1, 2, ...}.
#[derive(Clone, Debug, PartialEq)]
pub enum SetDescriptor {
    Finite(BTreeSet<u64>),
    /// `start, start + step, start + 2·step, ...`
    ArithProg { start: u64, step: u64 },
    /// `{n : 2^v exactly divides n}`
    DyadicValuation(u32),
    /// Union of the blocks of `filter` whose index lies in `indices`.
    BlockUnion { filter: PartitionFilter, indices: Box<SetDescriptor> },
    /// The least element of `within ∩ A_k` for every block `A_k` it meets.
    FirstInBlocks { filter: PartitionFilter, within: Box<SetDescriptor> },
    Complement(Box<SetDescriptor>),
    Union(Box<SetDescriptor>, Box<SetDescriptor>),
    Intersection(Box<SetDescriptor>, Box<SetDescriptor>),
    Predicate(NamedPredicate),
}

impl SetDescriptor {
    pub fn empty() -> Self {
        SetDescriptor::Finite(BTreeSet::new())
    }

    pub fn all() -> Self {
        SetDescriptor::Complement(Box::new(Self::empty()))
    }

    pub fn finite(xs: impl IntoIterator<Item = u64>) -> Self {
        SetDescriptor::Finite(xs.into_iter().collect())
    }

    pub fn singleton(n: u64) -> Self {
        Self::finite([n])
    }

    /// `{1, ..., n}`
    pub fn prefix(n: u64) -> Self {
        Self::finite(1..=n)
    }

    /// `{n, n+1, ...}`
    pub fn tail_from(n: u64) -> Self {
        SetDescriptor::ArithProg { start: n.max(1), step: 1 }
    }

    /// `{1, ..., n-1}` without listing its members.
    pub fn below(n: u64) -> Self {
        Self::tail_from(1).minus(Self::tail_from(n))
    }

    pub fn evens() -> Self {
        SetDescriptor::ArithProg { start: 0, step: 2 }
    }

    pub fn odds() -> Self {
        SetDescriptor::ArithProg { start: 1, step: 2 }
    }

    pub fn arith(start: u64, step: u64) -> Self {
        assert!(step > 0, "progression step must be positive");
        SetDescriptor::ArithProg { start, step }
    }

    pub fn block_union(filter: PartitionFilter, indices: SetDescriptor) -> Self {
        SetDescriptor::BlockUnion { filter, indices: Box::new(indices) }
    }

    pub fn first_in_blocks(filter: PartitionFilter, within: SetDescriptor) -> Self {
        SetDescriptor::FirstInBlocks { filter, within: Box::new(within) }
    }

    pub fn complement(self) -> Self {
        SetDescriptor::Complement(Box::new(self))
    }

    pub fn union(self, other: SetDescriptor) -> Self {
        SetDescriptor::Union(Box::new(self), Box::new(other))
    }

    pub fn intersect(self, other: SetDescriptor) -> Self {
        SetDescriptor::Intersection(Box::new(self), Box::new(other))
    }

    pub fn minus(self, other: SetDescriptor) -> Self {
        self.intersect(other.complement())
    }

    /// Membership. Sets of points live in {1, 2, ...}; 0 only matters for
    /// sets of block indices, where the dyadic filter has a block 0.
    pub fn contains(&self, n: u64) -> bool {
        match self {
            SetDescriptor::Finite(s) => s.contains(&n),
            SetDescriptor::ArithProg { start, step } => n >= *start && (n - start) % step == 0,
            SetDescriptor::DyadicValuation(v) => n > 0 && n.trailing_zeros() == *v,
            SetDescriptor::BlockUnion { filter, indices } => n > 0 && indices.contains(filter.block_of(n)),
            SetDescriptor::FirstInBlocks { filter, within } => {
                n > 0 && within.contains(n) && filter.block_members_below(n).all(|m| !within.contains(m))
            }
            SetDescriptor::Complement(s) => !s.contains(n),
            SetDescriptor::Union(a, b) => a.contains(n) || b.contains(n),
            SetDescriptor::Intersection(a, b) => a.contains(n) && b.contains(n),
            SetDescriptor::Predicate(p) => p.test(n),
        }
    }

    /// Whether any node is an opaque predicate.
    pub fn is_opaque(&self) -> bool {
        match self {
            SetDescriptor::Predicate(_) => true,
            SetDescriptor::BlockUnion { indices: s, .. }
            | SetDescriptor::FirstInBlocks { within: s, .. }
            | SetDescriptor::Complement(s) => s.is_opaque(),
            SetDescriptor::Union(a, b) | SetDescriptor::Intersection(a, b) => a.is_opaque() || b.is_opaque(),
            _ => false,
        }
    }

    /// Whether this is ℕ itself as far as points `>= 1` go.
    fn is_full(&self) -> bool {
        match self {
            SetDescriptor::Complement(s) => matches!(&**s, SetDescriptor::Finite(x) if x.iter().all(|&n| n == 0)),
            SetDescriptor::ArithProg { start, step } => *start <= 1 && *step == 1,
            _ => false,
        }
    }

    fn is_void(&self) -> bool {
        matches!(self, SetDescriptor::Finite(x) if x.iter().all(|&n| n == 0))
    }

    /// Removes trivial operands (ℕ in intersections, ∅ in unions) and
    /// merges finite unions; membership on `{1, 2, ...}` is unchanged.
    pub fn simplified(self) -> Self {
        use SetDescriptor as D;
        match self {
            D::Union(a, b) => {
                let (a, b) = (a.simplified(), b.simplified());
                match (a, b) {
                    (x, y) if x.is_void() => y,
                    (x, y) if y.is_void() => x,
                    (x, _) if x.is_full() => x,
                    (_, y) if y.is_full() => y,
                    (D::Finite(x), D::Finite(y)) => D::Finite(&x | &y),
                    (x, y) => x.union(y),
                }
            }
            D::Intersection(a, b) => {
                let (a, b) = (a.simplified(), b.simplified());
                match (a, b) {
                    (x, y) if x.is_full() => y,
                    (x, y) if y.is_full() => x,
                    (x, _) if x.is_void() => D::empty(),
                    (_, y) if y.is_void() => D::empty(),
                    (D::Finite(x), D::Finite(y)) => D::Finite(&x & &y),
                    (x, y) => x.intersect(y),
                }
            }
            D::Complement(s) => match s.simplified() {
                D::Complement(t) => *t,
                t => t.complement(),
            },
            D::BlockUnion { filter, indices } => D::block_union(filter, indices.simplified()),
            D::FirstInBlocks { filter, within } => D::first_in_blocks(filter, within.simplified()),
            other => other,
        }
    }

    /// Members in `[1, bound]`.
    pub fn members_up_to(&self, bound: u64) -> Vec<u64> {
        match self {
            SetDescriptor::Finite(s) => s.range(..=bound).copied().collect(),
            _ => (1..=bound).filter(|&n| self.contains(n)).collect(),
        }
    }

    pub fn is_subset_up_to(&self, other: &SetDescriptor, bound: u64) -> bool {
        (1..=bound).all(|n| !self.contains(n) || other.contains(n))
    }
}

impl fmt::Display for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetDescriptor::Finite(s) => {
                f.write_str("(finite")?;
                for n in s {
                    write!(f, " {n}")?;
                }
                f.write_str(")")
            }
            SetDescriptor::ArithProg { start, step } => write!(f, "(arith {start} {step})"),
            SetDescriptor::DyadicValuation(v) => write!(f, "(valuation {v})"),
            SetDescriptor::BlockUnion { filter, indices } => write!(f, "(blocks {filter} {indices})"),
            SetDescriptor::FirstInBlocks { filter, within } => write!(f, "(first-in {filter} {within})"),
            SetDescriptor::Complement(s) => write!(f, "(not {s})"),
            SetDescriptor::Union(a, b) => write!(f, "(or {a} {b})"),
            SetDescriptor::Intersection(a, b) => write!(f, "(and {a} {b})"),
            SetDescriptor::Predicate(p) => write!(f, "(pred {})", p.name()),
        }
    }
}
