use std::fmt;

use num_traits::{One, Signed, Zero};

use super::element::LatticeElement;
use super::rational::{self, Rational};
use crate::error::{Error, Result};

/// A closed-form (o)-sequence: nonincreasing, nonnegative, infimum zero.
///
/// Indices start at 1; `eval(0)` is read as `eval(1)`. Coefficients may be
/// zero, which gives the zero regulator in those components.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Regulator {
    /// `n ↦ coef / n`
    Harmonic { coef: LatticeElement },
    /// `n ↦ coef · ratioⁿ`
    Geometric { coef: LatticeElement, ratio: Rational },
    /// `n ↦ factor · base(n)`
    Scaled { base: Box<Regulator>, factor: Rational },
    Sum(Box<Regulator>, Box<Regulator>),
    /// `n ↦ base(n + offset)`
    Shifted { base: Box<Regulator>, offset: u64 },
    /// `n ↦ base(n) ∧ cap`
    Capped { base: Box<Regulator>, cap: LatticeElement },
}

impl Regulator {
    pub fn harmonic(coef: LatticeElement) -> Result<Self> {
        let r = Regulator::Harmonic { coef };
        r.validate()?;
        Ok(r)
    }

    pub fn geometric(coef: LatticeElement, ratio: Rational) -> Result<Self> {
        let r = Regulator::Geometric { coef, ratio };
        r.validate()?;
        Ok(r)
    }

    pub fn zero(dim: usize) -> Self {
        Regulator::Geometric { coef: LatticeElement::zero(dim), ratio: rational::rat(1, 2) }
    }

    pub fn scaled(self, factor: Rational) -> Result<Self> {
        let r = Regulator::Scaled { base: Box::new(self), factor };
        r.validate()?;
        Ok(r)
    }

    pub fn plus(self, other: Regulator) -> Result<Self> {
        let r = Regulator::Sum(Box::new(self), Box::new(other));
        r.validate()?;
        Ok(r)
    }

    pub fn shifted(self, offset: u64) -> Self {
        Regulator::Shifted { base: Box::new(self), offset }
    }

    pub fn capped(self, cap: LatticeElement) -> Result<Self> {
        let r = Regulator::Capped { base: Box::new(self), cap };
        r.validate()?;
        Ok(r)
    }

    /// Closed form of `n ↦ Σ_{j ≥ n} base(j)`; only geometric-type bases have one.
    pub fn tail(&self) -> Result<Self> {
        match self {
            Regulator::Geometric { coef, ratio } => {
                let k = Rational::one() / (Rational::one() - ratio);
                Ok(Regulator::Geometric { coef: coef.scale(&k), ratio: ratio.clone() })
            }
            Regulator::Harmonic { coef } if coef.is_zero() => Ok(self.clone()),
            Regulator::Harmonic { .. } => Err(Error::InvalidRegulator("harmonic tail diverges".into())),
            Regulator::Scaled { base, factor } => base.tail()?.scaled(factor.clone()),
            Regulator::Sum(a, b) => a.tail()?.plus(b.tail()?),
            Regulator::Shifted { base, offset } => Ok(base.tail()?.shifted(*offset)),
            Regulator::Capped { .. } => Err(Error::InvalidRegulator("capped regulator has no closed-form tail".into())),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Regulator::Harmonic { coef } | Regulator::Geometric { coef, .. } => coef.dim(),
            Regulator::Scaled { base, .. } | Regulator::Shifted { base, .. } | Regulator::Capped { base, .. } => base.dim(),
            Regulator::Sum(a, _) => a.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Regulator::Harmonic { coef } => nonneg(coef),
            Regulator::Geometric { coef, ratio } => {
                nonneg(coef)?;
                if !ratio.is_positive() || *ratio >= Rational::one() {
                    return Err(Error::InvalidRegulator(format!("ratio {ratio} outside (0,1)")));
                }
                Ok(())
            }
            Regulator::Scaled { base, factor } => {
                if !factor.is_positive() {
                    return Err(Error::InvalidRegulator(format!("scale factor {factor} must be positive")));
                }
                base.validate()
            }
            Regulator::Sum(a, b) => {
                a.validate()?;
                b.validate()?;
                if a.dim() != b.dim() {
                    return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
                }
                Ok(())
            }
            Regulator::Shifted { base, .. } => base.validate(),
            Regulator::Capped { base, cap } => {
                base.validate()?;
                nonneg(cap)?;
                if cap.dim() != base.dim() {
                    return Err(Error::DimensionMismatch { expected: base.dim(), found: cap.dim() });
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, n: u64) -> LatticeElement {
        let n = n.max(1);
        match self {
            Regulator::Harmonic { coef } => coef.scale(&(Rational::one() / rational::int(n as i64))),
            Regulator::Geometric { coef, ratio } => {
                if coef.is_zero() {
                    coef.clone()
                } else {
                    coef.scale(&rational::pow(ratio, n))
                }
            }
            Regulator::Scaled { base, factor } => base.eval(n).scale(factor),
            Regulator::Sum(a, b) => &a.eval(n) + &b.eval(n),
            Regulator::Shifted { base, offset } => base.eval(n.saturating_add(*offset)),
            Regulator::Capped { base, cap } => base.eval(n).inf(cap),
        }
    }

    /// Whether component `i` is identically zero.
    pub fn is_component_zero(&self, i: usize) -> bool {
        match self {
            Regulator::Harmonic { coef } | Regulator::Geometric { coef, .. } => coef.coord(i).is_zero(),
            Regulator::Scaled { base, .. } | Regulator::Shifted { base, .. } => base.is_component_zero(i),
            Regulator::Sum(a, b) => a.is_component_zero(i) && b.is_component_zero(i),
            Regulator::Capped { base, cap } => cap.coord(i).is_zero() || base.is_component_zero(i),
        }
    }

    pub fn is_zero(&self) -> bool {
        (0..self.dim()).all(|i| self.is_component_zero(i))
    }

    /// Least `n >= 1` with `eval(n) <= target`, or an error when some
    /// component of the target is zero while the regulator stays positive.
    pub fn least_index_below(&self, target: &LatticeElement) -> Result<u64> {
        target.check_dim(&self.eval(1))?;
        for i in 0..self.dim() {
            if !target.coord(i).is_positive() && !self.is_component_zero(i) {
                return Err(Error::NoSuchMap { component: i });
            }
        }
        if let Some(n) = self.closed_form_index(target) {
            return Ok(n);
        }
        if self.eval(1).le(target) {
            return Ok(1);
        }
        let mut hi: u64 = 2;
        while !self.eval(hi).le(target) {
            hi = hi.checked_mul(2).ok_or_else(|| Error::Overflow("regulator index search".into()))?;
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.eval(mid).le(target) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    fn closed_form_index(&self, target: &LatticeElement) -> Option<u64> {
        match self {
            Regulator::Harmonic { coef } => {
                let mut n = 1u64;
                for (c, t) in coef.coords().iter().zip(target.coords()) {
                    if c.is_zero() {
                        continue;
                    }
                    n = n.max(rational::ceil_u64(&(c / t))?);
                }
                Some(n)
            }
            Regulator::Geometric { coef, ratio } => {
                let mut n = 1u64;
                for (c, t) in coef.coords().iter().zip(target.coords()) {
                    if c.is_zero() || c * ratio <= *t {
                        continue;
                    }
                    // float estimate, then exact correction
                    let est = (rational::to_f64(&(c / t))).ln() / (1.0 / rational::to_f64(ratio)).ln();
                    let mut k = if est.is_finite() && est > 1.0 { est.floor() as u64 } else { 1 };
                    k = k.saturating_sub(2).max(1);
                    while c * rational::pow(ratio, k) > *t {
                        k += 1;
                    }
                    while k > 1 && c * rational::pow(ratio, k - 1) <= *t {
                        k -= 1;
                    }
                    n = n.max(k);
                }
                Some(n)
            }
            _ => None,
        }
    }
}

fn nonneg(x: &LatticeElement) -> Result<()> {
    if !x.is_nonneg() {
        return Err(Error::InvalidRegulator(format!("coefficient {x} must be nonnegative")));
    }
    Ok(())
}

impl fmt::Display for Regulator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regulator::Harmonic { coef } => write!(f, "(harmonic {coef})"),
            Regulator::Geometric { coef, ratio } => write!(f, "(geometric {coef} {ratio})"),
            Regulator::Scaled { base, factor } => write!(f, "(scaled {base} {factor})"),
            Regulator::Sum(a, b) => write!(f, "(sum {a} {b})"),
            Regulator::Shifted { base, offset } => write!(f, "(shifted {base} {offset})"),
            Regulator::Capped { base, cap } => write!(f, "(capped {base} {cap})"),
        }
    }
}
