use std::sync::Arc;

use num_traits::{Signed, Zero};

use super::element::LatticeElement;
use super::interval::ValueInterval;
use super::rational::Rational;
use super::regulator::Regulator;
use super::verdict::{Verdict, Witness};
use crate::error::Result;
use crate::filters::SetDescriptor;

/// On `region`, every term lies within `envelope(k)` of `target`.
#[derive(Clone, Debug)]
pub struct Piece {
    pub region: SetDescriptor,
    pub target: ValueInterval,
    pub envelope: Regulator,
}

impl Piece {
    /// Bound on `|x_k − limit|` for `k` in the region.
    pub fn distance_upper(&self, limit: &LatticeElement, k: u64) -> LatticeElement {
        &self.target.add_exact(&-limit).abs_upper() + &self.envelope.eval(k)
    }
}

/// A sequence `k ↦ x_k` (`k >= 1`) of interval-valued terms.
///
/// Structured sequences carry pieces covering ℕ; they certify everything
/// beyond a truncation depth. Open-form sequences carry none.
#[derive(Clone)]
pub struct Sequence {
    dim: usize,
    term: Arc<dyn Fn(u64) -> ValueInterval + Send + Sync>,
    pieces: Option<Vec<Piece>>,
}

impl std::fmt::Debug for Sequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Sequence").field("dim", &self.dim).field("pieces", &self.pieces).finish()
    }
}

impl Sequence {
    /// An open-form sequence.
    pub fn open(dim: usize, term: impl Fn(u64) -> ValueInterval + Send + Sync + 'static) -> Self {
        Self { dim, term: Arc::new(term), pieces: None }
    }

    pub fn open_exact(dim: usize, term: impl Fn(u64) -> LatticeElement + Send + Sync + 'static) -> Self {
        Self::open(dim, move |k| ValueInterval::exact(term(k)))
    }

    pub fn with_pieces(mut self, pieces: Vec<Piece>) -> Self {
        self.pieces = Some(pieces);
        self
    }

    pub fn constant(c: LatticeElement) -> Self {
        let dim = c.dim();
        let v = ValueInterval::exact(c);
        let piece = Piece { region: SetDescriptor::all(), target: v.clone(), envelope: Regulator::zero(dim) };
        Self::open(dim, move |_| v.clone()).with_pieces(vec![piece])
    }

    /// `k ↦ c·ρᵏ`
    pub fn geometric(c: LatticeElement, ratio: Rational) -> Result<Self> {
        let dim = c.dim();
        let envelope = Regulator::geometric(c.abs(), ratio.clone())?;
        let piece = Piece { region: SetDescriptor::all(), target: ValueInterval::zero(dim), envelope };
        Ok(Self::open_exact(dim, move |k| c.scale(&super::rational::pow(&ratio, k))).with_pieces(vec![piece]))
    }

    /// `k ↦ c/k`
    pub fn harmonic(c: LatticeElement) -> Result<Self> {
        let dim = c.dim();
        let envelope = Regulator::harmonic(c.abs())?;
        let piece = Piece { region: SetDescriptor::all(), target: ValueInterval::zero(dim), envelope };
        Ok(Self::open_exact(dim, move |k| c.scale(&super::rational::rat(1, k as i64))).with_pieces(vec![piece]))
    }

    /// `inside` on `region`, `outside` elsewhere.
    pub fn switch(region: SetDescriptor, inside: Sequence, outside: Sequence) -> Self {
        let pieces = match (&inside.pieces, &outside.pieces) {
            (Some(a), Some(b)) => {
                let mut v: Vec<Piece> = a
                    .iter()
                    .map(|p| Piece { region: p.region.clone().intersect(region.clone()), ..p.clone() })
                    .collect();
                v.extend(b.iter().map(|p| Piece { region: p.region.clone().minus(region.clone()), ..p.clone() }));
                Some(v)
            }
            _ => None,
        };
        let dim = inside.dim;
        let r = region.clone();
        let term = move |k: u64| if r.contains(k) { inside.term(k) } else { outside.term(k) };
        Self { dim, term: Arc::new(term), pieces }
    }

    pub fn plus(&self, other: &Sequence) -> Result<Self> {
        if self.dim != other.dim {
            return Err(crate::error::Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let pieces = match (&self.pieces, &other.pieces) {
            (Some(a), Some(b)) => {
                let mut v = vec![];
                for p in a {
                    for q in b {
                        v.push(Piece {
                            region: p.region.clone().intersect(q.region.clone()),
                            target: p.target.add(&q.target),
                            envelope: p.envelope.clone().plus(q.envelope.clone())?,
                        });
                    }
                }
                Some(v)
            }
            _ => None,
        };
        let (a, b) = (self.clone(), other.clone());
        Ok(Self { dim: self.dim, term: Arc::new(move |k| a.term(k).add(&b.term(k))), pieces })
    }

    pub fn scale(&self, factor: &Rational) -> Result<Self> {
        let pieces = match &self.pieces {
            Some(ps) if factor.is_zero() => Some(
                ps.iter()
                    .map(|p| Piece { region: p.region.clone(), target: ValueInterval::zero(self.dim), envelope: Regulator::zero(self.dim) })
                    .collect(),
            ),
            Some(ps) => Some(
                ps.iter()
                    .map(|p| {
                        Ok(Piece {
                            region: p.region.clone(),
                            target: p.target.scale(factor),
                            envelope: p.envelope.clone().scaled(factor.abs())?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let (a, k) = (self.clone(), factor.clone());
        Ok(Self { dim: self.dim, term: Arc::new(move |n| a.term(n).scale(&k)), pieces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn term(&self, k: u64) -> ValueInterval {
        (self.term)(k)
    }

    pub fn pieces(&self) -> Option<&[Piece]> {
        self.pieces.as_deref()
    }

    /// Terms `1..=depth` respect their pieces' bounds.
    pub fn check_pieces(&self, depth: u64) -> bool {
        let Some(ps) = &self.pieces else { return true };
        (1..=depth).all(|k| {
            let x = self.term(k);
            let hits: Vec<_> = ps.iter().filter(|p| p.region.contains(k)).collect();
            hits.len() == 1 && {
                let p = hits[0];
                p.target.widen(&p.envelope.eval(k)).contains_interval(&x)
            }
        })
    }
}

/// Order convergence of `x` to `limit` regulated by `r`, truncated at `depth`.
///
/// Holds when `|x_k − limit| <= r(n)` for all `n <= k <= depth` and the
/// pieces bound every later term by `r(depth)`. Fails with `(n, k)` when a
/// term is certainly too far. Otherwise Unknown.
pub fn o_convergence_check(x: &Sequence, limit: &LatticeElement, r: &Regulator, depth: u64) -> Result<Verdict> {
    let dim = limit.dim();
    if x.dim() != dim {
        return Err(crate::error::Error::DimensionMismatch { expected: dim, found: x.dim() });
    }
    if r.dim() != dim {
        return Err(crate::error::Error::DimensionMismatch { expected: dim, found: r.dim() });
    }
    let depth = depth.max(1);
    let dist: Vec<ValueInterval> = (1..=depth).map(|k| x.term(k).add_exact(&-limit)).collect();
    let lower: Vec<LatticeElement> = dist.iter().map(ValueInterval::abs_lower).collect();
    let upper: Vec<LatticeElement> = dist.iter().map(ValueInterval::abs_upper).collect();
    let regs: Vec<LatticeElement> = (1..=depth).map(|n| r.eval(n)).collect();

    // suffix maxima of the certain lower bounds
    let mut suffix = lower.clone();
    for i in (0..suffix.len().saturating_sub(1)).rev() {
        suffix[i] = suffix[i].sup(&suffix[i + 1]);
    }
    for n in 0..depth as usize {
        if !suffix[n].le(&regs[n]) {
            let k = (n..depth as usize).find(|&k| !lower[k].le(&regs[n])).expect("suffix max attained");
            return Ok(Verdict::fails(Witness::Pair(n as u64 + 1, k as u64 + 1), depth));
        }
    }

    let mut suffix = upper;
    for i in (0..suffix.len().saturating_sub(1)).rev() {
        suffix[i] = suffix[i].sup(&suffix[i + 1]);
    }
    if (0..depth as usize).any(|n| !suffix[n].le(&regs[n])) {
        return Ok(Verdict::unknown(depth));
    }
    let Some(pieces) = x.pieces() else { return Ok(Verdict::unknown(depth)) };
    let last = &regs[depth as usize - 1];
    let beyond = SetDescriptor::tail_from(depth + 1);
    for p in pieces {
        let tail = p.region.clone().intersect(beyond.clone());
        if crate::filters::is_certainly_empty(&tail) {
            continue;
        }
        if !p.distance_upper(limit, depth + 1).le(last) {
            return Ok(Verdict::unknown(depth));
        }
    }
    Ok(Verdict::holds(Witness::labeled("tail certified beyond", Witness::Index(depth)), depth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rational::{int, rat};

    fn one() -> LatticeElement {
        LatticeElement::from_ints(&[1])
    }

    fn halves() -> Regulator {
        Regulator::geometric(one(), rat(1, 2)).unwrap()
    }

    #[test]
    fn geometric_converges() {
        let x = Sequence::geometric(one(), rat(1, 2)).unwrap();
        let v = o_convergence_check(&x, &LatticeElement::zero(1), &halves(), 30).unwrap();
        assert!(v.is_holds(), "{v}");
    }

    #[test]
    fn constant_fails_at_first_index() {
        let x = Sequence::constant(LatticeElement::scalar(rat(1, 3)));
        let v = o_convergence_check(&x, &LatticeElement::zero(1), &halves(), 10).unwrap();
        assert!(v.is_fails());
        // 1/3 <= 1/2 but not <= 1/4
        assert_eq!(v.witness, Some(Witness::Pair(2, 2)));
    }

    #[test]
    fn harmonic_against_halves() {
        let x = Sequence::harmonic(one()).unwrap();
        let v = o_convergence_check(&x, &LatticeElement::zero(1), &halves(), 50).unwrap();
        let Some(Witness::Pair(n, k)) = v.witness else { panic!("{v}") };
        assert!(rat(1, k as i64) > crate::lattice::rational::pow(&rat(1, 2), n));
    }

    #[test]
    fn open_form_is_never_holds() {
        let x = Sequence::open_exact(1, |k| LatticeElement::scalar(crate::lattice::rational::pow(&rat(1, 2), k)));
        let v = o_convergence_check(&x, &LatticeElement::zero(1), &halves(), 20).unwrap();
        assert!(v.is_unknown());
    }

    #[test]
    fn switch_and_plus_keep_pieces_sound() {
        let a = Sequence::geometric(LatticeElement::from_ints(&[2, -1]), rat(1, 3)).unwrap();
        let b = Sequence::constant(LatticeElement::from_ints(&[1, 1]));
        let s = Sequence::switch(SetDescriptor::evens(), a.clone(), b.clone());
        assert!(s.check_pieces(40));
        assert!(a.plus(&b).unwrap().check_pieces(40));
        assert!(s.scale(&int(-3)).unwrap().check_pieces(40));
    }
}
