use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::element::LatticeElement;
use super::rational::{self, Rational};
use crate::error::{Error, Result};

/// Componentwise interval `[lower, upper]` bracketing a truncated countable sum.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ValueInterval {
    pub lower: LatticeElement,
    pub upper: LatticeElement,
}

impl ValueInterval {
    pub fn new(lower: LatticeElement, upper: LatticeElement) -> Result<Self> {
        lower.check_dim(&upper)?;
        if !lower.le(&upper) {
            return Err(Error::InvalidValue(format!("interval lower {lower} exceeds upper {upper}")));
        }
        Ok(Self { lower, upper })
    }

    pub fn exact(x: LatticeElement) -> Self {
        Self { lower: x.clone(), upper: x }
    }

    pub fn zero(dim: usize) -> Self {
        Self::exact(LatticeElement::zero(dim))
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn as_exact(&self) -> Option<&LatticeElement> {
        self.is_exact().then_some(&self.lower)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { lower: &self.lower + &other.lower, upper: &self.upper + &other.upper }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { lower: &self.lower - &other.upper, upper: &self.upper - &other.lower }
    }

    pub fn add_exact(&self, x: &LatticeElement) -> Self {
        Self { lower: &self.lower + x, upper: &self.upper + x }
    }

    /// Widens by a nonnegative radius.
    pub fn widen(&self, radius: &LatticeElement) -> Self {
        Self { lower: &self.lower - radius, upper: &self.upper + radius }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_negative() {
            Self { lower: self.upper.scale(k), upper: self.lower.scale(k) }
        } else {
            Self { lower: self.lower.scale(k), upper: self.upper.scale(k) }
        }
    }

    pub fn contains(&self, x: &LatticeElement) -> bool {
        self.lower.le(x) && x.le(&self.upper)
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lower.le(&other.lower) && other.upper.le(&self.upper)
    }

    /// Intervals overlap in every component.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.lower.le(&other.upper) && other.lower.le(&self.upper)
    }

    /// Componentwise upper bound of `|x|` over the interval.
    pub fn abs_upper(&self) -> LatticeElement {
        self.lower.abs().sup(&self.upper.abs())
    }

    /// Componentwise lower bound of `|x|` over the interval.
    pub fn abs_lower(&self) -> LatticeElement {
        let coords = self
            .lower
            .coords()
            .iter()
            .zip(self.upper.coords())
            .map(|(lo, hi)| {
                if lo.is_positive() {
                    lo.clone()
                } else if hi.is_negative() {
                    -hi
                } else {
                    Rational::zero()
                }
            })
            .collect();
        LatticeElement::new(coords).expect("nonempty")
    }

    pub fn width(&self) -> LatticeElement {
        &self.upper - &self.lower
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self { lower: self.lower.inf(&other.lower), upper: self.upper.sup(&other.upper) }
    }

    pub fn midpoint_f64(&self) -> Vec<f64> {
        self.lower
            .coords()
            .iter()
            .zip(self.upper.coords())
            .map(|(a, b)| rational::to_f64(&((a + b) / rational::int(2))))
            .collect()
    }
}

impl fmt::Display for ValueInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lower)
        } else {
            write!(f, "[{}, {}]", self.lower, self.upper)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rational::rat;

    #[test]
    fn abs_bounds_straddling_zero() {
        let iv = ValueInterval::new(LatticeElement::scalar(rat(-1, 2)), LatticeElement::scalar(rat(1, 4))).unwrap();
        assert_eq!(iv.abs_lower(), LatticeElement::scalar(rat(0, 1)));
        assert_eq!(iv.abs_upper(), LatticeElement::scalar(rat(1, 2)));
    }

    #[test]
    fn rejects_inverted() {
        assert!(ValueInterval::new(LatticeElement::from_ints(&[1]), LatticeElement::from_ints(&[0])).is_err());
    }
}
