//! Exact non-negative rational values.
//!
//! Cost values are kept exact because level comparisons hinge on exact
//! equality of combined costs; floating point would silently turn
//! equivalent levels into strict ones.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, Serializer};
use thiserror::Error;

/// Errors from constructing or parsing a [`Rational`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("negative value {0}")]
    Negative(String),
    #[error("malformed rational {0:?}")]
    Malformed(String),
}

/// A non-negative rational number, stored normalized (gcd 1, positive
/// denominator).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational::from_integer(1)
    }

    /// Builds `num/den`, normalizing. Fails on a zero denominator or a
    /// negative value.
    pub fn new(num: i64, den: i64) -> Result<Self, RationalError> {
        Self::from_bigints(BigInt::from(num), BigInt::from(den))
    }

    pub fn from_integer(n: u64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Result<Self, RationalError> {
        if den.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        let value = BigRational::new(num, den);
        if value.is_negative() {
            return Err(RationalError::Negative(value.to_string()));
        }
        Ok(Rational(value))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn max(self, other: Self) -> Self {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }
}

impl Add<&Rational> for Rational {
    type Output = Rational;

    fn add(self, rhs: &Rational) -> Rational {
        Rational(self.0 + &rhs.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `"12"` or `"3/4"`. Whitespace around the parts is tolerated.
    fn from_str(s: &str) -> Result<Self, RationalError> {
        let malformed = || RationalError::Malformed(s.to_string());
        let (num_part, den_part) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s.trim(), None),
        };
        let num: BigInt = num_part.parse().map_err(|_| malformed())?;
        let den: BigInt = match den_part {
            Some(d) => d.parse().map_err(|_| malformed())?,
            None => BigInt::from(1),
        };
        Self::from_bigints(num, den)
    }
}

impl Serialize for Rational {
    /// Integers serialize as JSON numbers when they fit in `u64`;
    /// everything else as an `"n/d"` string.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(n) = self.0.numer().to_u64() {
                return serializer.serialize_u64(n);
            }
        }
        serializer.serialize_str(&self.to_string())
    }
}

/// Compares `a` and `b` as costs (lower is better upstream; this is the
/// plain numeric ordering).
pub fn cmp_values(a: &Rational, b: &Rational) -> Ordering {
    a.0.cmp(&b.0)
}
