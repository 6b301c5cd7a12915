use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use super::rational::{self, Rational};
use crate::error::{Error, Result};

/// An exact vector in ℚ^d ordered componentwise.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LatticeElement {
    coords: Vec<Rational>,
}

impl LatticeElement {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { coords })
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim > 0, "lattice dimension must be positive");
        Self { coords: vec![Rational::zero(); dim] }
    }

    pub fn scalar(v: Rational) -> Self {
        Self { coords: vec![v] }
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        Self::new(xs.iter().map(|&x| rational::int(x)).collect()).expect("nonempty")
    }

    /// Every component equal to `v`.
    pub fn splat(dim: usize, v: Rational) -> Self {
        Self { coords: vec![v; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Rational {
        &self.coords[i]
    }

    pub fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| f(a, b)).collect() }
    }

    fn map(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        Self { coords: self.coords.iter().map(f).collect() }
    }

    pub fn sup(&self, other: &Self) -> Self {
        self.zip(other, rational::max)
    }

    pub fn inf(&self, other: &Self) -> Self {
        self.zip(other, rational::min)
    }

    pub fn abs(&self) -> Self {
        self.map(|a| a.abs())
    }

    pub fn pos_part(&self) -> Self {
        self.map(|a| if a.is_positive() { a.clone() } else { Rational::zero() })
    }

    pub fn neg_part(&self) -> Self {
        self.map(|a| if a.is_negative() { -a } else { Rational::zero() })
    }

    pub fn scale(&self, k: &Rational) -> Self {
        self.map(|a| a * k)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_nonneg(&self) -> bool {
        self.coords.iter().all(|a| !a.is_negative())
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b)
    }

    /// First component where `self <= other` fails.
    pub fn first_violation(&self, other: &Self) -> Option<usize> {
        self.coords.iter().zip(&other.coords).position(|(a, b)| a > b)
    }

    pub fn max_coord(&self) -> Rational {
        self.coords.iter().cloned().reduce(|a, b| rational::max(&a, &b)).expect("nonempty")
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.coords.iter().map(rational::to_f64).collect()
    }
}

impl Add for &LatticeElement {
    type Output = LatticeElement;
    fn add(self, rhs: &LatticeElement) -> LatticeElement {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &LatticeElement {
    type Output = LatticeElement;
    fn sub(self, rhs: &LatticeElement) -> LatticeElement {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for &LatticeElement {
    type Output = LatticeElement;
    fn neg(self) -> LatticeElement {
        self.map(|a| -a)
    }
}

impl fmt::Display for LatticeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for LatticeElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.coords.iter().map(rational::to_pq))
    }
}

fn fold(xs: &[LatticeElement], f: impl Fn(&LatticeElement, &LatticeElement) -> LatticeElement) -> Result<LatticeElement> {
    let first = xs.first().ok_or(Error::EmptyInput)?;
    xs.iter().skip(1).try_fold(first.clone(), |acc, x| {
        acc.check_dim(x)?;
        Ok(f(&acc, x))
    })
}

/// Componentwise maximum of a nonempty list.
pub fn sup_finite(xs: &[LatticeElement]) -> Result<LatticeElement> {
    fold(xs, LatticeElement::sup)
}

/// Componentwise minimum of a nonempty list.
pub fn inf_finite(xs: &[LatticeElement]) -> Result<LatticeElement> {
    fold(xs, LatticeElement::inf)
}
