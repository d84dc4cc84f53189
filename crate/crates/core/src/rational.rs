//! Exact rationals (arbitrary precision, always in lowest terms).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"3"`, `"-1/2"` or `" 7 / 14 "`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Canonical text form: `"n/d"`, or `"n"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn to_i64(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}

pub fn denominator_u64(r: &Rational) -> u64 {
    r.denom().to_u64().expect("denominator fits in u64")
}

/// Writes `r` as `k / n` over the given denominator, if possible.
pub fn scaled_to(r: &Rational, n: u64) -> Option<i64> {
    let scaled = r * Rational::from_integer(BigInt::from(n));
    if scaled.is_integer() {
        scaled.numer().to_i64()
    } else {
        None
    }
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("7/14").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" -3 ").unwrap(), int(-3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(1, 2)), "1/2");
        assert_eq!(format_rational(&rat(4, 2)), "2");
        assert_eq!(format_rational(&rat(-6, 4)), "-3/2");
    }

    #[test]
    fn scaling() {
        assert_eq!(scaled_to(&rat(3, 2), 4), Some(6));
        assert_eq!(scaled_to(&rat(1, 3), 2), None);
    }
}
