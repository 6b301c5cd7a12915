use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `base^exp`; powers of a reduced fraction stay reduced.
pub fn pow(base: &Rational, exp: u64) -> Rational {
    let e = u32::try_from(exp).expect("exponent fits in u32");
    Rational::new_raw(num_traits::Pow::pow(base.numer(), e), num_traits::Pow::pow(base.denom(), e))
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b { a.clone() } else { b.clone() }
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b { a.clone() } else { b.clone() }
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().ok()?;
    let d: BigInt = d.trim().parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Always `p/q`, the exchange format of reports.
pub fn to_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Smallest integer `>= r`.
pub fn ceil_u64(r: &Rational) -> Option<u64> {
    r.ceil().to_integer().to_u64()
}
