//! Exact rational scalars.
//!
//! Every distance, endpoint and tolerance in the crate is a [`Scalar`]. The
//! value is always kept in lowest terms with a positive denominator, and it
//! always prints as `p/q` so reports can be replayed without loss.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An exact rational number of arbitrary precision.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Scalar(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarParseError {
    #[error("empty literal")]
    Empty,
    #[error("decimal literal `{0}` is not allowed, write it as a fraction")]
    Decimal(String),
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`, reduced. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `2^-m`.
    pub fn pow2_inv(m: u32) -> Self {
        Scalar(BigRational::new(BigInt::one(), BigInt::one() << m))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Scalar(self.0.abs())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// The value as a `usize` when it is a non-negative integer that fits.
    pub fn to_usize(&self) -> Option<usize> {
        if !self.is_integer() || self.is_negative() {
            return None;
        }
        usize::try_from(self.0.numer()).ok()
    }

    pub fn midpoint(&self, other: &Scalar) -> Scalar {
        Scalar((&self.0 + &other.0) / BigRational::from_integer(BigInt::from(2)))
    }

    pub fn min_of<'a>(&'a self, other: &'a Scalar) -> &'a Scalar {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max_of<'a>(&'a self, other: &'a Scalar) -> &'a Scalar {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Lossy conversion for display or float-side oracles.
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Scalar {
    type Err = ScalarParseError;

    /// Accepts integer (`3`, `-2`) and fraction (`3/4`, `-1/8`) literals only.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ScalarParseError::Empty);
        }
        if s.contains('.') || s.contains('e') || s.contains('E') {
            return Err(ScalarParseError::Decimal(s.to_string()));
        }
        let int = |t: &str| -> Result<BigInt, ScalarParseError> {
            let digits = t.strip_prefix('-').unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ScalarParseError::Malformed(s.to_string()));
            }
            t.parse::<BigInt>()
                .map_err(|_| ScalarParseError::Malformed(s.to_string()))
        };
        match s.split_once('/') {
            None => Ok(Scalar(BigRational::from_integer(int(s)?))),
            Some((n, d)) => {
                if d.starts_with('-') {
                    return Err(ScalarParseError::Malformed(s.to_string()));
                }
                let (n, d) = (int(n)?, int(d)?);
                if d.is_zero() {
                    return Err(ScalarParseError::ZeroDenominator(s.to_string()));
                }
                Ok(Scalar(BigRational::new(n, d)))
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($Op:ident, $op:ident) => {
        impl $Op<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $op(self, rhs: &Scalar) -> Scalar {
                Scalar((&self.0).$op(&rhs.0))
            }
        }
        impl $Op<Scalar> for Scalar {
            type Output = Scalar;
            fn $op(self, rhs: Scalar) -> Scalar {
                Scalar(self.0.$op(rhs.0))
            }
        }
        impl $Op<&Scalar> for Scalar {
            type Output = Scalar;
            fn $op(self, rhs: &Scalar) -> Scalar {
                Scalar(self.0.$op(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

/// `q!(3 / 4)` or `q!(1)`; shorthand used heavily in tests.
#[macro_export]
macro_rules! q {
    ($n:literal / $d:literal) => {
        $crate::Scalar::ratio($n, $d)
    };
    ($n:expr) => {
        $crate::Scalar::from_int($n)
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_display() {
        assert_eq!(Scalar::ratio(6, 8).to_string(), "3/4");
        assert_eq!(Scalar::ratio(3, -6).to_string(), "-1/2");
        assert_eq!(Scalar::from_int(1).to_string(), "1/1");
        assert_eq!(Scalar::zero().to_string(), "0/1");
    }

    #[test]
    fn parses_fraction_and_integer_literals() {
        assert_eq!("3/4".parse::<Scalar>().unwrap(), Scalar::ratio(3, 4));
        assert_eq!("-2".parse::<Scalar>().unwrap(), Scalar::from_int(-2));
        assert_eq!("10/4".parse::<Scalar>().unwrap(), Scalar::ratio(5, 2));
    }

    #[test]
    fn rejects_decimals_and_junk() {
        assert!(matches!(
            "0.5".parse::<Scalar>(),
            Err(ScalarParseError::Decimal(_))
        ));
        assert!(matches!(
            "1e3".parse::<Scalar>(),
            Err(ScalarParseError::Decimal(_))
        ));
        assert!(matches!(
            "1/0".parse::<Scalar>(),
            Err(ScalarParseError::ZeroDenominator(_))
        ));
        assert!("1/-2".parse::<Scalar>().is_err());
        assert!("a/2".parse::<Scalar>().is_err());
        assert!("+1".parse::<Scalar>().is_err());
        assert!("".parse::<Scalar>().is_err());
    }

    #[test]
    fn pow2_inverse() {
        assert_eq!(Scalar::pow2_inv(0), Scalar::one());
        assert_eq!(Scalar::pow2_inv(3), Scalar::ratio(1, 8));
    }

    #[test]
    fn serde_as_string() {
        let s = Scalar::ratio(3, 4);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "\"3/4\"");
        let back: Scalar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
