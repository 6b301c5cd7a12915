use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed, Zero};

use super::charge::{AtomicSpace, Charge};
use super::checks::DisjointFamily;
use super::segment::{Region, Segment};
use crate::error::{Error, Result};
use crate::filters::{self, PartitionFilter, SetDescriptor};
use crate::lattice::rational::{self, Rational};
use crate::lattice::{LatticeElement, Piece, Regulator, Sequence, ValueInterval};

/// Decay of a perturbation: `ρⁿ` or `1/n`.
#[derive(Clone, PartialEq, Debug)]
pub enum Rate {
    Geometric(Rational),
    Harmonic,
}

impl Rate {
    pub fn factor(&self, n: u64) -> Rational {
        match self {
            Rate::Geometric(r) => rational::pow(r, n.max(1)),
            Rate::Harmonic => rational::rat(1, n.max(1) as i64),
        }
    }

    /// `n ↦ coef·factor(n)`
    pub fn envelope(&self, coef: LatticeElement) -> Result<Regulator> {
        match self {
            Rate::Geometric(r) => Regulator::geometric(coef, r.clone()),
            Rate::Harmonic => Regulator::harmonic(coef),
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Geometric(r) => write!(f, "(rate {})", rational::to_pq(r)),
            Rate::Harmonic => f.write_str("harmonic"),
        }
    }
}

/// A sequence of measures `n ↦ m_n` (`n >= 1`) in closed form.
#[derive(Clone, PartialEq, Debug)]
pub enum Family {
    /// `m_n = m`
    Constant(Charge),
    /// `m_n = base + rate(n)·direction`
    Perturbed { base: Charge, direction: Charge, rate: Rate },
    /// `m_n({k}) = coef·ratioⁿ` for `k <= n` in `support`, else 0.
    ScaledPrefix { support: SetDescriptor, coef: LatticeElement, ratio: Rational },
    /// `m_n = coef·δ_n`
    PointMass { coef: LatticeElement },
    /// `inside` for `n` in `region`, `outside` elsewhere.
    Switch { region: SetDescriptor, inside: Box<Family>, outside: Box<Family> },
    Sum(Box<Family>, Box<Family>),
    Scaled(Box<Family>, Rational),
}

/// A scalar-per-component quantity of a measure, viewed along the family.
#[derive(Clone, Debug)]
pub enum Functional {
    /// `m(R)`
    Value(Region),
    /// `v(m)(R)`
    Variation(Region),
    /// `⋁_k |m(H_k)|`
    Sup(DisjointFamily),
}

/// Which part of every member to keep.
#[derive(Clone, Debug)]
pub enum PartKind {
    Restrict(Region),
    Sigma,
    ChargeOnly,
    Diffuse,
    Atomic,
}

impl Family {
    pub fn zero(space: AtomicSpace, dim: usize) -> Self {
        Family::Constant(Charge::zero(space, dim))
    }

    pub fn switch(region: SetDescriptor, inside: Family, outside: Family) -> Self {
        Family::Switch { region, inside: Box::new(inside), outside: Box::new(outside) }
    }

    pub fn plus(self, other: Family) -> Self {
        Family::Sum(Box::new(self), Box::new(other))
    }

    pub fn scaled(self, k: Rational) -> Self {
        Family::Scaled(Box::new(self), k)
    }

    /// `n ↦ m_n − limit`
    pub fn minus(self, limit: &Charge) -> Self {
        self.plus(Family::Constant(limit.neg()))
    }

    pub fn dim(&self) -> usize {
        match self {
            Family::Constant(m) | Family::Perturbed { base: m, .. } => m.dim(),
            Family::ScaledPrefix { coef, .. } | Family::PointMass { coef } => coef.dim(),
            Family::Switch { inside, .. } => inside.dim(),
            Family::Sum(a, _) | Family::Scaled(a, _) => a.dim(),
        }
    }

    pub fn space(&self) -> AtomicSpace {
        match self {
            Family::Constant(m) | Family::Perturbed { base: m, .. } => m.space(),
            Family::ScaledPrefix { .. } | Family::PointMass { .. } => AtomicSpace::CountableAtoms,
            Family::Switch { inside, .. } => inside.space(),
            Family::Sum(a, _) | Family::Scaled(a, _) => a.space(),
        }
    }

    /// Shared space and dimension, valid rates.
    pub fn validate(&self) -> Result<()> {
        let (space, dim) = (self.space(), self.dim());
        let check = |m: &Charge| -> Result<()> {
            if m.space() != space {
                return Err(Error::UnsupportedCombination(format!("spaces {} and {}", m.space(), space)));
            }
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
            }
            Ok(())
        };
        match self {
            Family::Constant(m) => check(m),
            Family::Perturbed { base, direction, rate } => {
                check(base)?;
                check(direction)?;
                rate.envelope(LatticeElement::zero(dim)).map(|_| ())
            }
            Family::ScaledPrefix { ratio, .. } => {
                if !ratio.is_positive() || *ratio >= Rational::one() {
                    return Err(Error::InvalidValue(format!("ratio {} not in (0, 1)", rational::to_pq(ratio))));
                }
                Ok(())
            }
            Family::PointMass { .. } => Ok(()),
            Family::Switch { inside: a, outside: b, .. } | Family::Sum(a, b) => {
                a.validate()?;
                b.validate()?;
                if (a.space(), a.dim()) != (b.space(), b.dim()) {
                    return Err(Error::UnsupportedCombination("members of different shapes".into()));
                }
                Ok(())
            }
            Family::Scaled(a, _) => a.validate(),
        }
    }

    pub fn member(&self, n: u64) -> Result<Charge> {
        match self {
            Family::Constant(m) => Ok(m.clone()),
            Family::Perturbed { base, direction, rate } => base.add(&direction.scale(&rate.factor(n))),
            Family::ScaledPrefix { support, coef, ratio } => {
                let w = coef.scale(&rational::pow(ratio, n));
                Charge::atoms(AtomicSpace::CountableAtoms, coef.dim(), support.members_up_to(n).into_iter().map(|k| (k, w.clone())))
            }
            Family::PointMass { coef } => Charge::atoms(AtomicSpace::CountableAtoms, coef.dim(), [(n, coef.clone())]),
            Family::Switch { region, inside, outside } => {
                if region.contains(n) {
                    inside.member(n)
                } else {
                    outside.member(n)
                }
            }
            Family::Sum(a, b) => a.member(n)?.add(&b.member(n)?),
            Family::Scaled(a, k) => Ok(a.member(n)?.scale(k)),
        }
    }

    /// Every member has no charge at infinity.
    pub fn is_chargeless(&self) -> bool {
        match self {
            Family::Constant(m) => m.charge().is_none(),
            Family::Perturbed { base, direction, .. } => base.charge().is_none() && direction.charge().is_none(),
            Family::ScaledPrefix { .. } | Family::PointMass { .. } => true,
            Family::Switch { inside: a, outside: b, .. } | Family::Sum(a, b) => a.is_chargeless() && b.is_chargeless(),
            Family::Scaled(a, _) => a.is_chargeless(),
        }
    }

    /// Where some member may carry density.
    pub fn diffuse_support(&self) -> Segment {
        match self {
            Family::Constant(m) => m.diffuse_support(),
            Family::Perturbed { base, direction, .. } => base.diffuse_support().union(&direction.diffuse_support()),
            Family::ScaledPrefix { .. } | Family::PointMass { .. } => Segment::empty(),
            Family::Switch { inside: a, outside: b, .. } | Family::Sum(a, b) => a.diffuse_support().union(&b.diffuse_support()),
            Family::Scaled(a, _) => a.diffuse_support(),
        }
    }

    /// Index sets on which the family switches form.
    pub fn switch_regions(&self) -> Vec<SetDescriptor> {
        match self {
            Family::Switch { region, inside, outside } => {
                let mut v = vec![region.clone()];
                v.extend(inside.switch_regions());
                v.extend(outside.switch_regions());
                v
            }
            Family::Sum(a, b) => {
                let mut v = a.switch_regions();
                v.extend(b.switch_regions());
                v
            }
            Family::Scaled(a, _) => a.switch_regions(),
            _ => vec![],
        }
    }

    /// `n ↦ part(m_n)`
    pub fn part(&self, kind: &PartKind, depth: u64) -> Result<Family> {
        let zero = || Family::zero(AtomicSpace::CountableAtoms, self.dim());
        Ok(match self {
            Family::Constant(m) => Family::Constant(apply_part(m, kind, depth)?),
            Family::Perturbed { base, direction, rate } => Family::Perturbed {
                base: apply_part(base, kind, depth)?,
                direction: apply_part(direction, kind, depth)?,
                rate: rate.clone(),
            },
            Family::ScaledPrefix { support, coef, ratio } => match kind {
                PartKind::Restrict(r) => Family::ScaledPrefix {
                    support: support.clone().intersect(r.atoms.clone()).simplified(),
                    coef: coef.clone(),
                    ratio: ratio.clone(),
                },
                PartKind::Sigma | PartKind::Atomic => self.clone(),
                PartKind::ChargeOnly | PartKind::Diffuse => zero(),
            },
            Family::PointMass { .. } => match kind {
                PartKind::Restrict(r) => Family::switch(r.atoms.clone(), self.clone(), zero()),
                PartKind::Sigma | PartKind::Atomic => self.clone(),
                PartKind::ChargeOnly | PartKind::Diffuse => zero(),
            },
            Family::Switch { region, inside, outside } => {
                Family::switch(region.clone(), inside.part(kind, depth)?, outside.part(kind, depth)?)
            }
            Family::Sum(a, b) => a.part(kind, depth)?.plus(b.part(kind, depth)?),
            Family::Scaled(a, k) => a.part(kind, depth)?.scaled(k.clone()),
        })
    }

    /// `n ↦ φ(m_n)` with pieces from the closed forms.
    pub fn sequence(&self, phi: &Functional, depth: u64) -> Result<Sequence> {
        let pieces = self.pieces(phi, depth)?;
        let (family, phi2) = (self.clone(), phi.clone());
        let cache: Arc<Mutex<HashMap<u64, ValueInterval>>> = Arc::default();
        let dim = self.dim();
        let term = move |n: u64| {
            if let Some(v) = cache.lock().expect("cache").get(&n) {
                return v.clone();
            }
            let v = family
                .member(n)
                .and_then(|m| evaluate(&m, &phi2, depth))
                .unwrap_or_else(|_| unbounded(dim));
            cache.lock().expect("cache").insert(n, v.clone());
            v
        };
        Ok(Sequence::open(dim, term).with_pieces(pieces))
    }

    fn pieces(&self, phi: &Functional, depth: u64) -> Result<Vec<Piece>> {
        let dim = self.dim();
        let all = SetDescriptor::all;
        let nonneg = !matches!(phi, Functional::Value(_));
        Ok(match self {
            Family::Constant(m) => {
                vec![Piece { region: all(), target: evaluate(m, phi, depth)?, envelope: Regulator::zero(dim) }]
            }
            Family::Perturbed { base, direction, rate } => {
                let d = evaluate(direction, phi, depth)?.abs_upper();
                vec![Piece { region: all(), target: evaluate(base, phi, depth)?, envelope: rate.envelope(d)? }]
            }
            Family::ScaledPrefix { coef, ratio, .. } => {
                let envelope = match phi {
                    Functional::Sup(DisjointFamily::Singletons) => Regulator::geometric(coef.abs(), ratio.clone())?,
                    _ => linear_geometric_envelope(coef.abs(), ratio)?,
                };
                vec![Piece { region: all(), target: ValueInterval::zero(dim), envelope }]
            }
            Family::PointMass { coef } => {
                let (hit, c) = match phi {
                    Functional::Value(r) => (r.atoms.clone(), coef.clone()),
                    Functional::Variation(r) => (r.atoms.clone(), coef.abs()),
                    Functional::Sup(h) => (covered(h), coef.abs()),
                };
                vec![
                    Piece { region: hit.clone(), target: ValueInterval::exact(c), envelope: Regulator::zero(dim) },
                    Piece { region: all().minus(hit), target: ValueInterval::zero(dim), envelope: Regulator::zero(dim) },
                ]
            }
            Family::Switch { region, inside, outside } => {
                let mut v: Vec<Piece> = inside
                    .pieces(phi, depth)?
                    .into_iter()
                    .map(|p| Piece { region: p.region.intersect(region.clone()), ..p })
                    .collect();
                v.extend(
                    outside.pieces(phi, depth)?.into_iter().map(|p| Piece { region: p.region.minus(region.clone()), ..p }),
                );
                v
            }
            Family::Sum(a, b) => {
                let (pa, pb) = (a.pieces(phi, depth)?, b.pieces(phi, depth)?);
                let mut v = vec![];
                for p in &pa {
                    for q in &pb {
                        let target = if nonneg {
                            ValueInterval::new(LatticeElement::zero(dim), &p.target.upper + &q.target.upper)?
                        } else {
                            p.target.add(&q.target)
                        };
                        v.push(Piece {
                            region: p.region.clone().intersect(q.region.clone()),
                            target,
                            envelope: p.envelope.clone().plus(q.envelope.clone())?,
                        });
                    }
                }
                v
            }
            Family::Scaled(a, k) => {
                let k = if nonneg { k.abs() } else { k.clone() };
                a.pieces(phi, depth)?
                    .into_iter()
                    .map(|p| {
                        let envelope = if k.is_zero() { Regulator::zero(dim) } else { p.envelope.scaled(k.abs())? };
                        Ok(Piece { region: p.region, target: p.target.scale(&k), envelope })
                    })
                    .collect::<Result<_>>()?
            }
        })
    }

    /// Upper bound on `sup_{n ∈ indices} sup_{j >= from} |m_n(H_j)|`.
    pub fn tail_sup_bound(&self, h: &DisjointFamily, from: u64, indices: &SetDescriptor, depth: u64) -> Result<LatticeElement> {
        let dim = self.dim();
        if filters::is_certainly_empty(indices) {
            return Ok(LatticeElement::zero(dim));
        }
        let first = || filters::least_member(indices).unwrap_or(1);
        match self {
            Family::Constant(m) => charge_tail_bound(m, h, from, depth),
            Family::Perturbed { base, direction, rate } => {
                let d = charge_tail_bound(direction, h, from, depth)?.scale(&rate.factor(first()));
                Ok(&charge_tail_bound(base, h, from, depth)? + &d)
            }
            Family::ScaledPrefix { support, coef, ratio } => {
                let s = support.clone().intersect(tail_union(h, from));
                if filters::is_certainly_empty(&s) {
                    return Ok(LatticeElement::zero(dim));
                }
                let start = filters::least_member(&s).unwrap_or(1).max(first());
                let sup = match h {
                    DisjointFamily::Singletons => rational::pow(ratio, start),
                    _ => linear_geometric_sup_from(ratio, start),
                };
                Ok(coef.abs().scale(&sup))
            }
            Family::PointMass { coef } => {
                let hit = indices.clone().intersect(tail_union(h, from));
                Ok(if filters::is_certainly_empty(&hit) { LatticeElement::zero(dim) } else { coef.abs() })
            }
            Family::Switch { region, inside, outside } => {
                let a = inside.tail_sup_bound(h, from, &indices.clone().intersect(region.clone()), depth)?;
                let b = outside.tail_sup_bound(h, from, &indices.clone().minus(region.clone()), depth)?;
                Ok(a.sup(&b))
            }
            Family::Sum(a, b) => Ok(&a.tail_sup_bound(h, from, indices, depth)? + &b.tail_sup_bound(h, from, indices, depth)?),
            Family::Scaled(a, k) => Ok(a.tail_sup_bound(h, from, indices, depth)?.scale(&k.abs())),
        }
    }

    /// Upper bound on `sup_n v(m_n)(R)`.
    pub fn variation_sup_bound(&self, region: &Region, depth: u64) -> Result<LatticeElement> {
        match self {
            Family::Constant(m) => Ok(m.variation(region, depth)?.total.upper),
            Family::Perturbed { base, direction, rate } => {
                let d = direction.variation(region, depth)?.total.upper.scale(&rate.factor(1));
                Ok(&base.variation(region, depth)?.total.upper + &d)
            }
            Family::ScaledPrefix { coef, ratio, .. } => Ok(coef.abs().scale(&linear_geometric_sup_from(ratio, 1))),
            Family::PointMass { coef } => Ok(coef.abs()),
            Family::Switch { inside, outside, .. } => {
                Ok(inside.variation_sup_bound(region, depth)?.sup(&outside.variation_sup_bound(region, depth)?))
            }
            Family::Sum(a, b) => Ok(&a.variation_sup_bound(region, depth)? + &b.variation_sup_bound(region, depth)?),
            Family::Scaled(a, k) => Ok(a.variation_sup_bound(region, depth)?.scale(&k.abs())),
        }
    }
}

fn apply_part(m: &Charge, kind: &PartKind, depth: u64) -> Result<Charge> {
    match kind {
        PartKind::Restrict(r) => m.restrict(r, depth),
        PartKind::Sigma => Ok(m.sigma_part()),
        PartKind::ChargeOnly => Ok(m.charge_part()),
        PartKind::Diffuse => Ok(m.diffuse_part()),
        PartKind::Atomic => Ok(m.atomic_part()),
    }
}

fn unbounded(dim: usize) -> ValueInterval {
    let big = LatticeElement::splat(dim, rational::int(i64::MAX));
    ValueInterval::new(-&big, big).expect("ordered")
}

/// `φ(m)` for one measure.
pub fn evaluate(m: &Charge, phi: &Functional, depth: u64) -> Result<ValueInterval> {
    match phi {
        Functional::Value(r) => m.evaluate(r, depth),
        Functional::Variation(r) => Ok(m.variation(r, depth)?.total),
        Functional::Sup(h) => sup_over(m, h, depth),
    }
}

/// `⋁_k |m(H_k)|`: members up to `depth` exactly, the rest by the tail bound.
fn sup_over(m: &Charge, h: &DisjointFamily, depth: u64) -> Result<ValueInterval> {
    let count = match h {
        DisjointFamily::Explicit(v) => v.len() as u64,
        _ => depth,
    };
    let mut lower = LatticeElement::zero(m.dim());
    let mut upper = LatticeElement::zero(m.dim());
    for k in 1..=count {
        let v = m.eval_set(&h.member(k), depth)?;
        lower = lower.sup(&v.abs_lower());
        upper = upper.sup(&v.abs_upper());
    }
    match h {
        DisjointFamily::Explicit(_) => {}
        DisjointFamily::Singletons if m.charge().is_none() => {
            // |m({j})| <= |w_j| + Σ |c|·ρʲ past the enumerated members
            let mut geo = LatticeElement::zero(m.dim());
            for t in m.geometric_terms() {
                geo = &geo + &t.coef.abs().scale(&rational::pow(&t.ratio, count + 1));
            }
            for (_, w) in m.points().range(count + 1..) {
                lower = lower.sup(&(&w.abs() - &geo));
                upper = upper.sup(&(&w.abs() + &geo));
            }
            upper = upper.sup(&geo);
        }
        _ => upper = upper.sup(&charge_tail_bound(m, h, count + 1, depth)?),
    }
    ValueInterval::new(lower, upper)
}

/// `⋃_{j >= from} H_j`
pub fn tail_union(h: &DisjointFamily, from: u64) -> SetDescriptor {
    let from = from.max(1);
    match h {
        DisjointFamily::Singletons => SetDescriptor::tail_from(from),
        DisjointFamily::Blocks(f) => {
            SetDescriptor::block_union(f.clone(), SetDescriptor::tail_from(f.first_block() + from - 1))
        }
        DisjointFamily::Explicit(v) => v
            .iter()
            .skip(from as usize - 1)
            .fold(SetDescriptor::empty(), |acc, s| acc.union(s.clone()))
            .simplified(),
    }
}

fn covered(h: &DisjointFamily) -> SetDescriptor {
    match h {
        DisjointFamily::Explicit(_) => tail_union(h, 1),
        _ => SetDescriptor::all(),
    }
}

/// Upper bound on `sup_{j >= from} |m(H_j)|`.
pub fn charge_tail_bound(m: &Charge, h: &DisjointFamily, from: u64, depth: u64) -> Result<LatticeElement> {
    if let DisjointFamily::Explicit(v) = h {
        let mut out = LatticeElement::zero(m.dim());
        for s in v.iter().skip(from.max(1) as usize - 1) {
            out = out.sup(&m.eval_set(s, depth)?.abs_upper());
        }
        return Ok(out);
    }
    if let Some(c) = m.charge() {
        if !members_negligible(h, &c.filter) {
            return Err(Error::NotMeasurable { set: h.to_string(), filter: c.filter.to_string() });
        }
    }
    let t = Region::points(tail_union(h, from));
    Ok(m.atomic_part().variation(&t, depth)?.total.upper)
}

/// Every member of the family lies in the dual ideal of `f`.
fn members_negligible(h: &DisjointFamily, f: &PartitionFilter) -> bool {
    match h {
        DisjointFamily::Singletons => true,
        DisjointFamily::Blocks(g) => g.has_finite_blocks() || g == f,
        DisjointFamily::Explicit(_) => false,
    }
}

/// `K·σⁿ >= n·ρⁿ` for all `n`, with `σ = (1 + ρ)/2`.
pub fn linear_geometric_envelope(coef: LatticeElement, ratio: &Rational) -> Result<Regulator> {
    let one = Rational::one();
    let sigma = (&one + ratio) / rational::int(2);
    let t = ratio / &sigma;
    let k = linear_geometric_sup_from(&t, 1);
    Regulator::geometric(coef.scale(&k), sigma)
}

/// `max_{n >= start} n·ρⁿ`
pub fn linear_geometric_sup_from(ratio: &Rational, start: u64) -> Rational {
    let one = Rational::one();
    // n·ρⁿ increases while n <= ρ/(1 − ρ)
    let turn = rational::ceil_u64(&(ratio / (&one - ratio))).unwrap_or(u64::MAX / 2);
    let n = start.max(1).max(turn);
    [n.saturating_sub(1).max(start.max(1)), n, n + 1]
        .into_iter()
        .map(|k| rational::int(k as i64) * rational::pow(ratio, k))
        .max()
        .expect("nonempty")
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Constant(m) => write!(f, "(constant {m})"),
            Family::Perturbed { base, direction, rate } => write!(f, "(perturbed {base} {direction} {rate})"),
            Family::ScaledPrefix { support, coef, ratio } => {
                write!(f, "(scaled-prefix {support} {coef} {})", rational::to_pq(ratio))
            }
            Family::PointMass { coef } => write!(f, "(point-mass {coef})"),
            Family::Switch { region, inside, outside } => write!(f, "(switch {region} {inside} {outside})"),
            Family::Sum(a, b) => write!(f, "(sum {a} {b})"),
            Family::Scaled(a, k) => write!(f, "(scaled {a} {})", rational::to_pq(k)),
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::lattice::rational::{int, rat};

    fn one() -> LatticeElement {
        LatticeElement::from_ints(&[1])
    }

    fn mu() -> Charge {
        Charge::geometric(SetDescriptor::all(), one(), rat(1, 2)).unwrap().with_point(3, LatticeElement::from_ints(&[-2])).unwrap()
    }

    fn arb_family() -> impl Strategy<Value = Family> {
        let leaf = prop_oneof![
            (-3i64..4).prop_map(|c| Family::Constant(mu().scale(&int(c)))),
            (1i64..4).prop_map(|d| Family::Perturbed { base: mu(), direction: mu().scale(&rat(-1, d)), rate: Rate::Geometric(rat(1, d + 1)) }),
            Just(Family::Perturbed { base: mu(), direction: mu(), rate: Rate::Harmonic }),
            (-2i64..3).prop_map(|c| Family::PointMass { coef: LatticeElement::from_ints(&[c]) }),
            (1i64..4).prop_map(|q| Family::ScaledPrefix { support: SetDescriptor::odds(), coef: one(), ratio: rat(1, q + 1) }),
        ];
        leaf.prop_recursive(2, 6, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.plus(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Family::switch(SetDescriptor::evens(), a, b)),
                (inner, -2i64..3).prop_map(|(a, k)| a.scaled(int(k))),
            ]
        })
    }

    #[test]
    fn linear_geometric_bounds() {
        let r = rat(1, 2);
        assert_eq!(linear_geometric_sup_from(&r, 1), rat(1, 2));
        assert_eq!(linear_geometric_sup_from(&r, 3), rat(3, 8));
        let env = linear_geometric_envelope(one(), &rat(9, 10)).unwrap();
        for n in 1..400u64 {
            let x = int(n as i64) * rational::pow(&rat(9, 10), n);
            assert!(LatticeElement::scalar(x).le(&env.eval(n)));
        }
    }

    #[test]
    fn parts_commute_with_members() {
        let fam = Family::switch(SetDescriptor::evens(), Family::PointMass { coef: one() }, Family::Constant(mu()));
        let r = Region::points(SetDescriptor::prefix(6));
        let part = fam.part(&PartKind::Restrict(r.clone()), 10).unwrap();
        for n in 1..=12 {
            assert_eq!(part.member(n).unwrap(), fam.member(n).unwrap().restrict(&r, 10).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pieces_enclose_terms(fam in arb_family()) {
            let sets = [SetDescriptor::evens(), SetDescriptor::prefix(5)];
            for a in sets {
                let r = Region::points(a);
                for phi in [Functional::Value(r.clone()), Functional::Variation(r)] {
                    prop_assert!(fam.sequence(&phi, 12).unwrap().check_pieces(24));
                }
            }
            prop_assert!(fam.sequence(&Functional::Sup(DisjointFamily::Singletons), 12).unwrap().check_pieces(24));
        }

        #[test]
        fn tail_bounds_are_sound(fam in arb_family(), from in 1u64..8) {
            let bound = fam.tail_sup_bound(&DisjointFamily::Singletons, from, &SetDescriptor::all(), 12).unwrap();
            for n in 1..=16 {
                let m = fam.member(n).unwrap();
                for j in from..from + 16 {
                    prop_assert!(m.eval_set(&SetDescriptor::singleton(j), 12).unwrap().abs_upper().le(&bound));
                }
            }
            let vb = fam.variation_sup_bound(&Region::whole(), 12).unwrap();
            for n in 1..=16 {
                prop_assert!(fam.member(n).unwrap().variation(&Region::whole(), 12).unwrap().total.lower.le(&vb));
            }
        }
    }
}
