//! Exact rationals extended with a single positive infinity.
//!
//! Every weighted relation takes values in this set. Finite values are
//! arbitrary-precision [`BigRational`]s, always kept in lowest terms with a
//! positive denominator (the invariant `num-rational` maintains for us).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A value in Q ∪ {+∞}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(BigRational),
    Infinity,
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Finite(BigRational::zero())
    }

    pub fn one() -> Self {
        ExtRational::Finite(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        ExtRational::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        ExtRational::Finite(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtRational::Finite(q) => Some(q),
            ExtRational::Infinity => None,
        }
    }

    pub fn into_finite(self) -> Option<BigRational> {
        match self {
            ExtRational::Finite(q) => Some(q),
            ExtRational::Infinity => None,
        }
    }

    /// Scales by a finite rational. Infinity times a positive scalar stays
    /// infinite; infinity times zero or a negative scalar is undefined.
    pub fn scale(&self, factor: &BigRational) -> Result<ExtRational> {
        match self {
            ExtRational::Finite(q) => Ok(ExtRational::Finite(q * factor)),
            ExtRational::Infinity if factor.is_positive() => Ok(ExtRational::Infinity),
            ExtRational::Infinity => Err(Error::Arithmetic(format!(
                "cannot multiply infinity by non-positive {factor}"
            ))),
        }
    }

    /// Finite difference `self - other`; `None` when either side is infinite.
    pub fn checked_sub(&self, other: &ExtRational) -> Option<BigRational> {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => Some(a - b),
            _ => None,
        }
    }
}

impl From<BigRational> for ExtRational {
    fn from(q: BigRational) -> Self {
        ExtRational::Finite(q)
    }
}

impl From<i64> for ExtRational {
    fn from(n: i64) -> Self {
        ExtRational::from_integer(n)
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
            (ExtRational::Finite(_), ExtRational::Infinity) => Ordering::Less,
            (ExtRational::Infinity, ExtRational::Finite(_)) => Ordering::Greater,
            (ExtRational::Infinity, ExtRational::Infinity) => Ordering::Equal,
        }
    }
}

impl Add for ExtRational {
    type Output = ExtRational;
    fn add(self, rhs: ExtRational) -> ExtRational {
        match (self, rhs) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::Infinity,
        }
    }
}

impl<'a> Add<&'a ExtRational> for &'a ExtRational {
    type Output = ExtRational;
    fn add(self, rhs: &ExtRational) -> ExtRational {
        match (self, rhs) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::Infinity,
        }
    }
}

impl Sum for ExtRational {
    fn sum<I: Iterator<Item = ExtRational>>(iter: I) -> Self {
        iter.fold(ExtRational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a ExtRational> for ExtRational {
    fn sum<I: Iterator<Item = &'a ExtRational>>(iter: I) -> Self {
        iter.fold(ExtRational::zero(), |acc, x| &acc + x)
    }
}

/// Formats a finite rational as `n` or `p/q`.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `n`, `-n` or `p/q` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).ok()?;
            let q = BigInt::from_str(q.trim()).ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => BigInt::from_str(s).ok().map(BigRational::from_integer),
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(q) => f.write_str(&format_rational(q)),
            ExtRational::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtRational {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t = s.trim();
        if t == "inf" || t == "+inf" {
            return Ok(ExtRational::Infinity);
        }
        parse_rational(t)
            .map(ExtRational::Finite)
            .ok_or_else(|| format!("malformed rational `{t}`"))
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Least common multiple of the denominators of `values`.
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    use num_integer::Integer;
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Smallest integer not below `q`.
pub fn ceil_to_integer(q: &BigRational) -> BigInt {
    q.ceil().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn infinity_absorbs_and_dominates() {
        let three = ExtRational::from_integer(3);
        assert_eq!(three.clone() + ExtRational::Infinity, ExtRational::Infinity);
        assert!(ExtRational::Infinity > ExtRational::from_integer(1_000_000_000));
        assert!(ExtRational::ratio(-1, 3) < ExtRational::zero());
        assert_eq!(
            ExtRational::Infinity.scale(&BigRational::from_integer(2.into())),
            Ok(ExtRational::Infinity)
        );
        assert!(ExtRational::Infinity.scale(&BigRational::zero()).is_err());
    }

    #[test]
    fn parse_and_format() {
        assert_eq!("1/3".parse::<ExtRational>().unwrap(), ExtRational::ratio(1, 3));
        assert_eq!("2/6".parse::<ExtRational>().unwrap().to_string(), "1/3");
        assert_eq!("-4/2".parse::<ExtRational>().unwrap().to_string(), "-2");
        assert_eq!("inf".parse::<ExtRational>().unwrap(), ExtRational::Infinity);
        assert!("1/0".parse::<ExtRational>().is_err());
        assert!("x".parse::<ExtRational>().is_err());
        assert_eq!(ExtRational::ratio(3, -6).to_string(), "-1/2");
    }

    proptest! {
        #[test]
        fn add_then_subtract_is_identity(a in -1000i64..1000, b in 1i64..50, c in -1000i64..1000, e in 1i64..50) {
            let x = ExtRational::ratio(a, b);
            let y = ExtRational::ratio(c, e);
            let s = x.clone() + y.clone();
            prop_assert_eq!(s.checked_sub(&y).map(ExtRational::Finite), Some(x.clone()));
            let q = x.finite().unwrap();
            prop_assert!(q.denom().is_positive());
            prop_assert_eq!(num_integer::Integer::gcd(q.numer(), q.denom()).abs(), if q.is_zero() { q.denom().clone() } else { BigInt::one() });
        }
    }
}
