use std::fmt;

use crate::error::{Error, Result};
use crate::filters::SetDescriptor;
use crate::lattice::rational::{self, Rational};

/// `[index/2^level, (index+1)/2^level)`
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub const MAX_LEVEL: u32 = 62;

    pub fn new(level: u32, index: u64) -> Result<Self> {
        if level > Self::MAX_LEVEL || index >= 1u64 << level {
            return Err(Error::InvalidValue(format!("no dyadic interval {index}/2^{level}")));
        }
        Ok(Self { level, index })
    }

    pub fn unit() -> Self {
        Self { level: 0, index: 0 }
    }

    pub fn length(&self) -> Rational {
        rational::pow(&rational::rat(1, 2), self.level as u64)
    }

    pub fn children(&self) -> [Self; 2] {
        let level = self.level + 1;
        [Self { level, index: 2 * self.index }, Self { level, index: 2 * self.index + 1 }]
    }

    /// The ancestor at a coarser level.
    pub fn ancestor(&self, level: u32) -> Self {
        debug_assert!(level <= self.level);
        Self { level, index: self.index >> (self.level - level) }
    }

    pub fn contains(&self, other: &Self) -> bool {
        other.level >= self.level && other.ancestor(self.level) == *self
    }

    /// Dyadic intervals are nested or disjoint; the smaller one if nested.
    pub fn meet(&self, other: &Self) -> Option<Self> {
        if self.contains(other) {
            Some(*other)
        } else if other.contains(self) {
            Some(*self)
        } else {
            None
        }
    }

    /// Partition of `self` into `inner` and the siblings along the path to it.
    pub fn split_around(&self, inner: &Self) -> Vec<Self> {
        debug_assert!(self.contains(inner));
        let mut out = vec![];
        let mut cur = *self;
        while cur != *inner {
            let [a, b] = cur.children();
            if a.contains(inner) {
                out.push(b);
                cur = a;
            } else {
                out.push(a);
                cur = b;
            }
        }
        out.push(*inner);
        out
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(dy {} {})", self.level, self.index)
    }
}

/// A finite union of dyadic intervals of `[0, 1)`, kept disjoint and sorted.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Segment {
    parts: Vec<DyadicInterval>,
}

impl Segment {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self { parts: vec![DyadicInterval::unit()] }
    }

    /// Union of arbitrary dyadic intervals.
    pub fn from_intervals(xs: impl IntoIterator<Item = DyadicInterval>) -> Self {
        let mut xs: Vec<_> = xs.into_iter().collect();
        xs.sort_by_key(|i| i.level);
        let mut kept: Vec<DyadicInterval> = vec![];
        for x in xs {
            if !kept.iter().any(|k| k.contains(&x)) {
                kept.push(x);
            }
        }
        let mut s = Self { parts: kept };
        s.canonicalize();
        s
    }

    /// Sorts by left endpoint and merges sibling pairs.
    fn canonicalize(&mut self) {
        loop {
            self.parts.sort_by(|a, b| left(a).cmp(&left(b)).then(a.level.cmp(&b.level)));
            let pos = self.parts.windows(2).position(|w| {
                w[0].level == w[1].level && w[0].level > 0 && w[0].index % 2 == 0 && w[1].index == w[0].index + 1
            });
            match pos {
                Some(i) => {
                    let parent = self.parts[i].ancestor(self.parts[i].level - 1);
                    self.parts.splice(i..i + 2, [parent]);
                }
                None => break,
            }
        }
    }

    pub fn parts(&self) -> &[DyadicInterval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn length(&self) -> Rational {
        self.parts.iter().map(DyadicInterval::length).sum()
    }

    /// Length of `self ∩ i`.
    pub fn overlap(&self, i: &DyadicInterval) -> Rational {
        self.parts.iter().filter_map(|p| p.meet(i)).map(|m| m.length()).sum()
    }

    pub fn intersect(&self, other: &Segment) -> Segment {
        Self::from_intervals(self.parts.iter().flat_map(|a| other.parts.iter().filter_map(move |b| a.meet(b))))
    }

    pub fn union(&self, other: &Segment) -> Segment {
        Self::from_intervals(self.parts.iter().chain(&other.parts).copied())
    }

    pub fn complement(&self) -> Segment {
        fn go(node: DyadicInterval, parts: &[DyadicInterval], out: &mut Vec<DyadicInterval>) {
            if parts.iter().any(|p| p.contains(&node)) {
                return;
            }
            if !parts.iter().any(|p| node.contains(p)) {
                out.push(node);
                return;
            }
            for c in node.children() {
                go(c, parts, out);
            }
        }
        let mut out = vec![];
        go(DyadicInterval::unit(), &self.parts, &mut out);
        Self::from_intervals(out)
    }

    pub fn minus(&self, other: &Segment) -> Segment {
        self.intersect(&other.complement())
    }
}

/// Left endpoint scaled to a common level, for ordering.
fn left(i: &DyadicInterval) -> u128 {
    (i.index as u128) << (DyadicInterval::MAX_LEVEL - i.level)
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(segment")?;
        for p in &self.parts {
            write!(f, " {p}")?;
        }
        f.write_str(")")
    }
}

/// A measurable set of the hybrid space: atoms plus a part of `[0, 1)`.
#[derive(Clone, PartialEq, Debug)]
pub struct Region {
    pub atoms: SetDescriptor,
    pub segment: Segment,
}

impl Region {
    pub fn new(atoms: SetDescriptor, segment: Segment) -> Self {
        Self { atoms, segment }
    }

    /// Atoms only.
    pub fn points(atoms: SetDescriptor) -> Self {
        Self { atoms, segment: Segment::empty() }
    }

    pub fn diffuse(segment: Segment) -> Self {
        Self { atoms: SetDescriptor::empty(), segment }
    }

    pub fn whole() -> Self {
        Self { atoms: SetDescriptor::all(), segment: Segment::full() }
    }

    pub fn empty() -> Self {
        Self { atoms: SetDescriptor::empty(), segment: Segment::empty() }
    }

    pub fn complement(&self) -> Self {
        Self { atoms: self.atoms.clone().complement().simplified(), segment: self.segment.complement() }
    }

    pub fn union(&self, other: &Region) -> Self {
        Self { atoms: self.atoms.clone().union(other.atoms.clone()).simplified(), segment: self.segment.union(&other.segment) }
    }

    pub fn intersect(&self, other: &Region) -> Self {
        Self {
            atoms: self.atoms.clone().intersect(other.atoms.clone()).simplified(),
            segment: self.segment.intersect(&other.segment),
        }
    }

    pub fn minus(&self, other: &Region) -> Self {
        self.intersect(&other.complement())
    }
}

impl From<SetDescriptor> for Region {
    fn from(atoms: SetDescriptor) -> Self {
        Self::points(atoms)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.segment.is_empty() {
            write!(f, "{}", self.atoms)
        } else {
            write!(f, "(region {} {})", self.atoms, self.segment)
        }
    }
}
