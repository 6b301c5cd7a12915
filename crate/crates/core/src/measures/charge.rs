use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::segment::{DyadicInterval, Region, Segment};
use crate::error::{Error, Result};
use crate::filters::{self, PartitionFilter, SetDescriptor};
use crate::lattice::rational::{self, Rational};
use crate::lattice::{LatticeElement, Regulator, ValueInterval};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AtomicSpace {
    /// Atoms `1..=n`.
    FiniteAtoms(u64),
    /// Atoms indexed by ℕ.
    CountableAtoms,
}

impl AtomicSpace {
    pub fn has_atom(&self, k: u64) -> bool {
        match self {
            AtomicSpace::FiniteAtoms(n) => (1..=*n).contains(&k),
            AtomicSpace::CountableAtoms => k >= 1,
        }
    }

    /// The atoms as a set.
    pub fn atoms(&self) -> SetDescriptor {
        match self {
            AtomicSpace::FiniteAtoms(n) => SetDescriptor::prefix(*n),
            AtomicSpace::CountableAtoms => SetDescriptor::tail_from(1),
        }
    }
}

impl fmt::Display for AtomicSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicSpace::FiniteAtoms(n) => write!(f, "(atoms {n})"),
            AtomicSpace::CountableAtoms => f.write_str("countable"),
        }
    }
}

/// Weights `coef·ρᵏ` on the atoms `k` of `support`.
#[derive(Clone, PartialEq, Debug)]
pub struct GeometricTerm {
    pub support: SetDescriptor,
    pub coef: LatticeElement,
    pub ratio: Rational,
}

/// Constant density on a dyadic interval.
#[derive(Clone, PartialEq, Debug)]
pub struct DiffusePiece {
    pub interval: DyadicInterval,
    pub density: LatticeElement,
}

/// `A ↦ value` for `A` in the filter, `0` for `A` in its dual ideal.
#[derive(Clone, PartialEq, Debug)]
pub struct ChargeAtInfinity {
    pub value: LatticeElement,
    pub filter: PartitionFilter,
}

/// A finitely additive measure: atoms, a step density on `[0, 1)` and an
/// optional charge at infinity.
#[derive(Clone, PartialEq, Debug)]
pub struct Charge {
    space: AtomicSpace,
    dim: usize,
    points: BTreeMap<u64, LatticeElement>,
    geometric: Vec<GeometricTerm>,
    diffuse: Vec<DiffusePiece>,
    charge: Option<ChargeAtInfinity>,
}

/// `v(m)`, `v⁺(m)` and `v⁻(m)` of one region.
#[derive(Clone, PartialEq, Debug)]
pub struct Variation {
    pub total: ValueInterval,
    pub positive: ValueInterval,
    pub negative: ValueInterval,
}

impl Charge {
    pub fn zero(space: AtomicSpace, dim: usize) -> Self {
        Self { space, dim, points: BTreeMap::new(), geometric: vec![], diffuse: vec![], charge: None }
    }

    /// Point masses; repeated indices add up.
    pub fn atoms(space: AtomicSpace, dim: usize, weights: impl IntoIterator<Item = (u64, LatticeElement)>) -> Result<Self> {
        let mut m = Self::zero(space, dim);
        for (k, w) in weights {
            m.check(&w)?;
            if !space.has_atom(k) {
                return Err(Error::InvalidValue(format!("atom {k} is not in {space}")));
            }
            let sum = match m.points.remove(&k) {
                Some(v) => &v + &w,
                None => w,
            };
            if !sum.is_zero() {
                m.points.insert(k, sum);
            }
        }
        Ok(m)
    }

    /// Atoms `1..=n` with the given weights.
    pub fn finite(weights: Vec<LatticeElement>) -> Result<Self> {
        let dim = weights.first().ok_or(Error::EmptyInput)?.dim();
        Self::atoms(AtomicSpace::FiniteAtoms(weights.len() as u64), dim, (1..).zip(weights))
    }

    /// Weights `coef·ρᵏ` on `support`.
    pub fn geometric(support: SetDescriptor, coef: LatticeElement, ratio: Rational) -> Result<Self> {
        Self::zero(AtomicSpace::CountableAtoms, coef.dim()).with_geometric(support, coef, ratio)
    }

    /// A pure step density.
    pub fn diffuse(space: AtomicSpace, dim: usize, pieces: impl IntoIterator<Item = (DyadicInterval, LatticeElement)>) -> Result<Self> {
        let mut m = Self::zero(space, dim);
        for (i, d) in pieces {
            m = m.with_diffuse(i, d)?;
        }
        Ok(m)
    }

    /// A pure charge at infinity on the countable atoms.
    pub fn charge_only(value: LatticeElement, filter: PartitionFilter) -> Self {
        let dim = value.dim();
        let charge = if value.is_zero() { None } else { Some(ChargeAtInfinity { value, filter }) };
        Self { charge, ..Self::zero(AtomicSpace::CountableAtoms, dim) }
    }

    pub fn with_point(self, k: u64, w: LatticeElement) -> Result<Self> {
        self.check(&w)?;
        if !self.space.has_atom(k) {
            return Err(Error::InvalidValue(format!("atom {k} is not in {}", self.space)));
        }
        self.add(&Self::atoms(self.space, self.dim, [(k, w)])?)
    }

    pub fn with_geometric(self, support: SetDescriptor, coef: LatticeElement, ratio: Rational) -> Result<Self> {
        self.check(&coef)?;
        if self.space != AtomicSpace::CountableAtoms {
            return Err(Error::UnsupportedCombination("geometric weights need countable atoms".into()));
        }
        if !(ratio > Rational::zero() && ratio < Rational::one()) {
            return Err(Error::InvalidValue(format!("ratio {ratio} is not in (0, 1)")));
        }
        let support = support.intersect(SetDescriptor::tail_from(1)).simplified();
        let term = GeometricTerm { support, coef, ratio };
        self.add(&Self { geometric: vec![term], ..Self::zero(self.space, self.dim) })
    }

    pub fn with_diffuse(self, interval: DyadicInterval, density: LatticeElement) -> Result<Self> {
        self.check(&density)?;
        let piece = DiffusePiece { interval, density };
        self.add(&Self { diffuse: vec![piece], ..Self::zero(self.space, self.dim) })
    }

    pub fn with_charge(self, value: LatticeElement, filter: PartitionFilter) -> Result<Self> {
        self.check(&value)?;
        if self.space != AtomicSpace::CountableAtoms {
            return Err(Error::UnsupportedCombination("a charge at infinity needs countable atoms".into()));
        }
        self.add(&Self::charge_only(value, filter))
    }

    fn check(&self, x: &LatticeElement) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        Ok(())
    }

    pub fn space(&self) -> AtomicSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &BTreeMap<u64, LatticeElement> {
        &self.points
    }

    pub fn geometric_terms(&self) -> &[GeometricTerm] {
        &self.geometric
    }

    pub fn diffuse_pieces(&self) -> &[DiffusePiece] {
        &self.diffuse
    }

    pub fn charge(&self) -> Option<&ChargeAtInfinity> {
        self.charge.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.points.is_empty() && self.geometric.is_empty() && self.diffuse.is_empty() && self.charge.is_none()
    }

    pub fn has_atomic_part(&self) -> bool {
        !self.points.is_empty() || !self.geometric.is_empty()
    }

    /// `m({k})`.
    pub fn weight(&self, k: u64) -> LatticeElement {
        let mut w = self.points.get(&k).cloned().unwrap_or_else(|| LatticeElement::zero(self.dim));
        for t in &self.geometric {
            if k >= 1 && t.support.contains(k) {
                w = &w + &t.coef.scale(&rational::pow(&t.ratio, k));
            }
        }
        w
    }

    /// The atomic part alone.
    pub fn atomic_part(&self) -> Self {
        Self { diffuse: vec![], charge: None, ..self.clone() }
    }

    /// The step density alone.
    pub fn diffuse_part(&self) -> Self {
        Self { diffuse: self.diffuse.clone(), ..Self::zero(self.space, self.dim) }
    }

    /// Atoms and density, without the charge.
    pub fn sigma_part(&self) -> Self {
        Self { charge: None, ..self.clone() }
    }

    /// The charge at infinity alone.
    pub fn charge_part(&self) -> Self {
        Self { charge: self.charge.clone(), ..Self::zero(self.space, self.dim) }
    }

    pub fn add(&self, other: &Charge) -> Result<Charge> {
        if self.space != other.space {
            return Err(Error::UnsupportedCombination(format!("charges on {} and {}", self.space, other.space)));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut points = self.points.clone();
        for (k, w) in &other.points {
            let sum = match points.get(k) {
                Some(v) => v + w,
                None => w.clone(),
            };
            if sum.is_zero() {
                points.remove(k);
            } else {
                points.insert(*k, sum);
            }
        }
        let mut geometric = self.geometric.clone();
        for t in &other.geometric {
            match geometric.iter_mut().find(|g| g.support == t.support && g.ratio == t.ratio) {
                Some(g) => g.coef = &g.coef + &t.coef,
                None => geometric.push(t.clone()),
            }
        }
        geometric.retain(|g| !g.coef.is_zero() && !filters::is_certainly_empty(&g.support));
        let diffuse = add_pieces(&self.diffuse, &other.diffuse);
        let charge = match (&self.charge, &other.charge) {
            (Some(a), Some(b)) if a.filter != b.filter => {
                return Err(Error::UnsupportedCombination(format!("charges along {} and {}", a.filter, b.filter)))
            }
            (Some(a), Some(b)) => {
                let value = &a.value + &b.value;
                (!value.is_zero()).then(|| ChargeAtInfinity { value, filter: a.filter.clone() })
            }
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        Ok(Charge { space: self.space, dim: self.dim, points, geometric, diffuse, charge })
    }

    pub fn scale(&self, k: &Rational) -> Charge {
        if k.is_zero() {
            return Self::zero(self.space, self.dim);
        }
        Charge {
            space: self.space,
            dim: self.dim,
            points: self.points.iter().map(|(i, w)| (*i, w.scale(k))).collect(),
            geometric: self.geometric.iter().map(|t| GeometricTerm { coef: t.coef.scale(k), ..t.clone() }).collect(),
            diffuse: self.diffuse.iter().map(|p| DiffusePiece { interval: p.interval, density: p.density.scale(k) }).collect(),
            charge: self.charge.as_ref().map(|c| ChargeAtInfinity { value: c.value.scale(k), filter: c.filter.clone() }),
        }
    }

    pub fn neg(&self) -> Charge {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &Charge) -> Result<Charge> {
        self.add(&other.neg())
    }

    /// `m` restricted to a region: `A ↦ m(A ∩ region)`.
    pub fn restrict(&self, region: &Region, depth: u64) -> Result<Charge> {
        let atoms = &region.atoms;
        let points = self.points.iter().filter(|(k, _)| atoms.contains(**k)).map(|(k, w)| (*k, w.clone())).collect();
        let geometric = self
            .geometric
            .iter()
            .map(|t| GeometricTerm { support: t.support.clone().intersect(atoms.clone()).simplified(), ..t.clone() })
            .filter(|t| !filters::is_certainly_empty(&t.support))
            .collect();
        let mut diffuse = vec![];
        for p in &self.diffuse {
            for part in region.segment.parts() {
                if let Some(i) = part.meet(&p.interval) {
                    diffuse.push(DiffusePiece { interval: i, density: p.density.clone() });
                }
            }
        }
        let charge = match &self.charge {
            Some(c) => charge_indicator(c, atoms, depth)?.then(|| c.clone()),
            None => None,
        };
        Ok(Charge { space: self.space, dim: self.dim, points, geometric, diffuse, charge })
    }

    /// `m(region)` with countable sums truncated at `depth` and the rest
    /// enclosed by the tail envelope.
    pub fn evaluate(&self, region: &Region, depth: u64) -> Result<ValueInterval> {
        let atoms = &region.atoms;
        let mut exact = LatticeElement::zero(self.dim);
        for k in self.listed_in(atoms) {
            exact = &exact + &self.points[&k];
        }
        for p in &self.diffuse {
            exact = &exact + &p.density.scale(&region.segment.overlap(&p.interval));
        }
        if let Some(c) = &self.charge {
            if charge_indicator(c, atoms, depth)? {
                exact = &exact + &c.value;
            }
        }
        let mut out = ValueInterval::exact(exact);
        for t in &self.geometric {
            let s = t.support.clone().intersect(atoms.clone());
            out = out.add(&geometric_sum(&s, &t.coef, &t.ratio, depth));
        }
        Ok(out)
    }

    /// Shorthand for `evaluate` on an atom set.
    pub fn eval_set(&self, a: &SetDescriptor, depth: u64) -> Result<ValueInterval> {
        self.evaluate(&Region::points(a.clone()), depth)
    }

    /// Listed points inside `atoms`.
    fn listed_in(&self, atoms: &SetDescriptor) -> Vec<u64> {
        match atoms {
            SetDescriptor::Finite(s) if s.len() < self.points.len() => {
                s.iter().copied().filter(|k| self.points.contains_key(k)).collect()
            }
            _ => self.points.keys().copied().filter(|k| atoms.contains(*k)).collect(),
        }
    }

    /// Variations computed from the structure: `|w_k|` per atom, `|density|`
    /// per piece and `|c|` for the charge, with their positive and negative
    /// parts for `v⁺` and `v⁻`.
    pub fn variation(&self, region: &Region, depth: u64) -> Result<Variation> {
        for (i, a) in self.geometric.iter().enumerate() {
            for b in &self.geometric[i + 1..] {
                if !filters::is_certainly_empty(&a.support.clone().intersect(b.support.clone())) {
                    return Err(Error::UnsupportedCombination("overlapping geometric supports".into()));
                }
            }
        }
        let parts: [fn(&LatticeElement) -> LatticeElement; 3] = [LatticeElement::abs, LatticeElement::pos_part, LatticeElement::neg_part];
        let mut out = vec![];
        for part in parts {
            let mut exact = LatticeElement::zero(self.dim);
            let listed = self.listed_in(&region.atoms);
            for &k in &listed {
                exact = &exact + &part(&self.weight(k));
            }
            for p in &self.diffuse {
                exact = &exact + &part(&p.density).scale(&region.segment.overlap(&p.interval));
            }
            if let Some(c) = &self.charge {
                if charge_indicator(c, &region.atoms, depth)? {
                    exact = &exact + &part(&c.value);
                }
            }
            let mut v = ValueInterval::exact(exact);
            for t in &self.geometric {
                let s = t.support.clone().intersect(region.atoms.clone()).minus(SetDescriptor::finite(listed.iter().copied()));
                v = v.add(&geometric_sum(&s, &part(&t.coef), &t.ratio, depth));
            }
            out.push(v);
        }
        let negative = out.pop().expect("three parts");
        let positive = out.pop().expect("three parts");
        let total = out.pop().expect("three parts");
        Ok(Variation { total, positive, negative })
    }

    /// `|m({k})| <= envelope(k)` for every atom `k`.
    pub fn envelope(&self) -> Regulator {
        let mut r = Regulator::geometric(self.points_constant(|w| w.abs()), rational::rat(1, 2)).expect("nonnegative");
        for t in &self.geometric {
            let g = Regulator::geometric(t.coef.abs(), t.ratio.clone()).expect("validated ratio");
            r = r.plus(g).expect("same dimension");
        }
        r
    }

    /// Least `C` with `f(w_k) <= C·2⁻ᵏ` for all listed atoms.
    fn points_constant(&self, f: impl Fn(&LatticeElement) -> LatticeElement) -> LatticeElement {
        let mut c = LatticeElement::zero(self.dim);
        for (k, w) in &self.points {
            c = c.sup(&f(w).scale(&rational::pow(&rational::int(2), *k)));
        }
        c
    }

    /// Total variation of the step density.
    pub fn diffuse_mass(&self) -> LatticeElement {
        let mut v = LatticeElement::zero(self.dim);
        for p in &self.diffuse {
            v = &v + &p.density.abs().scale(&p.interval.length());
        }
        v
    }

    /// Largest `|density|` over the pieces.
    pub fn max_density(&self) -> LatticeElement {
        self.diffuse.iter().fold(LatticeElement::zero(self.dim), |acc, p| acc.sup(&p.density.abs()))
    }

    /// The part of `[0, 1)` where the density is nonzero.
    pub fn diffuse_support(&self) -> Segment {
        Segment::from_intervals(self.diffuse.iter().map(|p| p.interval))
    }

    /// Atoms carrying weight: listed points and geometric supports.
    pub fn atomic_support(&self) -> SetDescriptor {
        let listed = SetDescriptor::finite(self.points.keys().copied());
        self.geometric.iter().fold(listed, |acc, t| acc.union(t.support.clone())).simplified()
    }

    /// Tail `Σ_{k >= n} |w_k|` of the listed points, exactly.
    pub fn points_tail(&self, n: u64) -> LatticeElement {
        self.points.range(n..).fold(LatticeElement::zero(self.dim), |acc, (_, w)| &acc + &w.abs())
    }

    /// Regulator of s-boundedness for the atoms and the density; a charge is
    /// reported separately.
    pub fn s_boundedness_certificate(&self) -> SBoundedness {
        let mut c = LatticeElement::zero(self.dim);
        for k in self.points.keys() {
            c = c.sup(&self.points_tail(*k).scale(&rational::pow(&rational::int(2), *k)));
        }
        let mut r = Regulator::geometric(c, rational::rat(1, 2)).expect("nonnegative");
        for t in &self.geometric {
            let one = Rational::one();
            let coef = t.coef.abs().scale(&(&one / (&one - &t.ratio)));
            r = r.plus(Regulator::geometric(coef, t.ratio.clone()).expect("validated ratio")).expect("same dimension");
        }
        if !self.diffuse.is_empty() {
            r = r.plus(Regulator::geometric(self.diffuse_mass(), rational::rat(1, 2)).expect("nonnegative")).expect("same dimension");
        }
        SBoundedness { regulator: r, charge: self.charge.as_ref().map(|c| c.value.abs()) }
    }
}

/// `p_n` bounds `|m(F_k)|` for all late members `F_k` of a disjoint family,
/// up to the charge: at most one member of such a family lies in the filter,
/// and that member may carry `charge` on top.
#[derive(Clone, PartialEq, Debug)]
pub struct SBoundedness {
    pub regulator: Regulator,
    pub charge: Option<LatticeElement>,
}

fn charge_indicator(c: &ChargeAtInfinity, atoms: &SetDescriptor, depth: u64) -> Result<bool> {
    if filters::in_filter(&c.filter, atoms, depth).is_holds() {
        Ok(true)
    } else if filters::in_ideal(&c.filter, atoms, depth).is_holds() {
        Ok(false)
    } else {
        Err(Error::NotMeasurable { set: atoms.to_string(), filter: c.filter.to_string() })
    }
}

/// `Σ_{k ∈ s} coef·ρᵏ`, exact when possible, else truncated at `depth`.
fn geometric_sum(s: &SetDescriptor, coef: &LatticeElement, ratio: &Rational, depth: u64) -> ValueInterval {
    if let Some(sum) = filters::exact_geometric_sum(s, ratio) {
        return ValueInterval::exact(coef.scale(&sum));
    }
    let mut partial = Rational::zero();
    let mut p = Rational::one();
    for k in 1..=depth {
        p = &p * ratio;
        if s.contains(k) {
            partial += &p;
        }
    }
    let base = ValueInterval::exact(coef.scale(&partial));
    if filters::is_certainly_empty(&s.clone().intersect(SetDescriptor::tail_from(depth + 1))) {
        return base;
    }
    let one = Rational::one();
    let tail = coef.scale(&(&(&p * ratio) / (&one - ratio)));
    let zero = LatticeElement::zero(coef.dim());
    base.add(&ValueInterval::new(tail.inf(&zero), tail.sup(&zero)).expect("ordered"))
}

/// Sum of two disjoint piece lists, refined to a common partition.
fn add_pieces(a: &[DiffusePiece], b: &[DiffusePiece]) -> Vec<DiffusePiece> {
    let cuts: Vec<DyadicInterval> = a.iter().chain(b).map(|p| p.interval).collect();
    let mut acc: BTreeMap<DyadicInterval, LatticeElement> = BTreeMap::new();
    for p in a.iter().chain(b) {
        for leaf in refine(p.interval, &cuts) {
            let d = match acc.get(&leaf) {
                Some(v) => v + &p.density,
                None => p.density.clone(),
            };
            acc.insert(leaf, d);
        }
    }
    acc.into_iter().filter(|(_, d)| !d.is_zero()).map(|(interval, density)| DiffusePiece { interval, density }).collect()
}

/// Splits `i` until no cut lies strictly inside a part.
fn refine(i: DyadicInterval, cuts: &[DyadicInterval]) -> Vec<DyadicInterval> {
    match cuts.iter().find(|c| **c != i && i.contains(c)) {
        None => vec![i],
        Some(_) => i.children().into_iter().flat_map(|c| refine(c, cuts)).collect(),
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(charge {} {}", self.space, self.dim)?;
        for (k, w) in &self.points {
            write!(f, " (point {k} {w})")?;
        }
        for t in &self.geometric {
            write!(f, " (geometric {} {} {})", t.support, t.coef, rational::to_pq(&t.ratio))?;
        }
        for p in &self.diffuse {
            write!(f, " (density {} {})", p.interval, p.density)?;
        }
        if let Some(c) = &self.charge {
            write!(f, " (at-infinity {} {})", c.value, c.filter)?;
        }
        f.write_str(")")
    }
}
