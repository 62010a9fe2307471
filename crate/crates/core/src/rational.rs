//! Exact rational scalars.
//!
//! `Rational` is the only scalar type in this crate: every coordinate,
//! slope, endpoint and sample point is an arbitrary-precision fraction in
//! canonical form (reduced, positive denominator). Serialization is the
//! string `"p"` for integers and `"p/q"` otherwise; parsing is strict and
//! rejects any non-canonical spelling.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("invalid rational {input:?}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: String,
}

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "rational with zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    /// Largest integer `<= self`, as a `Rational`.
    pub fn floor(&self) -> Self {
        Rational(self.0.floor())
    }

    /// Smallest integer `>= self`, as a `Rational`.
    pub fn ceil(&self) -> Self {
        Rational(self.0.ceil())
    }

    pub fn floor_bigint(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil_bigint(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Strict parser for the canonical wire form: `"p"` or `"p/q"` with
    /// `q > 1`, `gcd(|p|, q) = 1`, no leading zeros, no `+`, no `-0`.
    pub fn parse_strict(s: &str) -> Result<Self, ParseRationalError> {
        let err = |reason: &str| ParseRationalError {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (numer_str, denom_str) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let int_ok = |t: &str, allow_sign: bool| -> bool {
            let body = if allow_sign {
                t.strip_prefix('-').unwrap_or(t)
            } else {
                t
            };
            !body.is_empty()
                && body.bytes().all(|b| b.is_ascii_digit())
                && (body.len() == 1 || !body.starts_with('0'))
        };
        if !int_ok(numer_str, true) {
            return Err(err("numerator is not a canonical integer"));
        }
        if numer_str == "-0" {
            return Err(err("negative zero"));
        }
        let numer = BigInt::from_str(numer_str).map_err(|_| err("unreadable numerator"))?;
        let denom = match denom_str {
            None => BigInt::one(),
            Some(d) => {
                if !int_ok(d, false) {
                    return Err(err("denominator is not a canonical positive integer"));
                }
                let denom = BigInt::from_str(d).map_err(|_| err("unreadable denominator"))?;
                if denom.is_zero() {
                    return Err(err("zero denominator"));
                }
                if denom.is_one() {
                    return Err(err("denominator 1 must be written without '/'"));
                }
                denom
            }
        };
        let value = BigRational::new(numer, denom);
        // rejects unreduced fractions such as "2/4"
        if format!("{}", Rational(value.clone())) != s {
            return Err(err("not in lowest terms"));
        }
        Ok(Rational(value))
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

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl<'b> Div<&'b Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &'b Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational((&self.0).div(&rhs.0))
    }
}
impl Div<Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        (&self).div(&rhs)
    }
}
impl<'a> Div<&'a Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        (&self).div(rhs)
    }
}
impl Div<Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        self.div(&rhs)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}
impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self == &Rational::from_int(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.partial_cmp(&Rational::from_int(*other))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Rational::parse_strict(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn canonical_display() {
        assert_eq!(q(4, 2).to_string(), "2");
        assert_eq!(q(-3, 6).to_string(), "-1/2");
        assert_eq!(q(0, 5).to_string(), "0");
    }

    #[test]
    fn strict_parse_accepts_canonical() {
        for s in ["0", "7", "-7", "1/2", "-22/7", "355/113"] {
            let v = Rational::parse_strict(s).unwrap();
            assert_eq!(v.to_string(), s);
        }
    }

    #[test]
    fn strict_parse_rejects_noncanonical() {
        for s in [
            "1/0", "2/4", "-0", "+1", "01", "1/1", "5/-2", "-2/-4", "", "/", "1.5", "1 /2",
        ] {
            assert!(Rational::parse_strict(s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn arithmetic() {
        assert_eq!(q(1, 2) + q(1, 3), q(5, 6));
        assert_eq!(q(1, 2) * q(2, 3), q(1, 3));
        assert_eq!(q(1, 2) - q(1, 2), Rational::zero());
        assert_eq!(q(7, 3) / q(7, 3), Rational::one());
        assert_eq!(q(-5, 4).abs(), q(5, 4));
        assert_eq!(q(7, 2).floor(), Rational::from_int(3));
        assert_eq!(q(7, 2).ceil(), Rational::from_int(4));
        assert_eq!(q(-7, 2).floor(), Rational::from_int(-4));
    }
}
