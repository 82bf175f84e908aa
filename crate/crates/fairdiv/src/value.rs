//! Exact nonnegative rational values.
//!
//! All valuations, envy comparisons, and approximation factors are computed
//! in arbitrary-precision rational arithmetic. Verdicts such as "does agent
//! `i` envy agent `j`" flip on exact ties, so no floating point is allowed
//! anywhere in the engine.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// An exact nonnegative rational number.
///
/// Internally a reduced `BigRational` with a positive denominator. The
/// nonnegativity invariant is enforced at every constructor; arithmetic that
/// could go negative (`-`) panics on violation, which always indicates an
/// internal bug rather than bad user input.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(BigRational);

impl Value {
    pub fn zero() -> Self {
        Value(BigRational::zero())
    }

    pub fn one() -> Self {
        Value(BigRational::one())
    }

    pub fn from_int(n: u64) -> Self {
        Value(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `num/den`, rejecting zero denominators and negative results.
    pub fn new(num: i64, den: i64) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::InvalidValue("denominator must be nonzero".into()));
        }
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        if r.is_negative() {
            return Err(Error::InvalidValue(format!("value {num}/{den} is negative")));
        }
        Ok(Value(r))
    }

    /// Shorthand for ratios known to be valid, handy in tests and examples.
    ///
    /// Panics on a zero denominator or a negative ratio.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(num, den).expect("valid nonnegative ratio")
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// `min(self, other)` by value.
    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// `max(self, other)` by value.
    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Exact division; `other` must be nonzero.
    pub fn checked_div(&self, other: &Self) -> Result<Self, Error> {
        if other.is_zero() {
            return Err(Error::InvalidValue("division by zero".into()));
        }
        Ok(Value(&self.0 / &other.0))
    }

    /// Approximate float rendering, for human-facing summaries only.
    pub fn to_f64_lossy(&self) -> f64 {
        let n = self.0.numer();
        let d = self.0.denom();
        let nf = n.to_string().parse::<f64>().unwrap_or(f64::NAN);
        let df = d.to_string().parse::<f64>().unwrap_or(f64::NAN);
        nf / df
    }
}

impl fmt::Display for Value {
    /// Integers render bare (`"3"`), everything else as `"p/q"`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Value {
    type Err = Error;

    /// Accepts `"p/q"` or a bare integer `"p"`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = |_| Error::InvalidValue(format!("cannot parse rational {s:?}"));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (
                BigInt::from_str(n.trim()).map_err(bad)?,
                BigInt::from_str(d.trim()).map_err(bad)?,
            ),
            None => (BigInt::from_str(s).map_err(bad)?, BigInt::one()),
        };
        if den.is_zero() {
            return Err(Error::InvalidValue(format!("zero denominator in {s:?}")));
        }
        let r = BigRational::new(num, den);
        if r.is_negative() {
            return Err(Error::InvalidValue(format!("negative value {s:?}")));
        }
        Ok(Value(r))
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Value;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational string \"p/q\" or a nonnegative integer")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<Value, E> {
                s.parse().map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, n: u64) -> Result<Value, E> {
                Ok(Value::from_int(n))
            }

            fn visit_i64<E: de::Error>(self, n: i64) -> Result<Value, E> {
                if n < 0 {
                    return Err(E::custom(format!("negative value {n}")));
                }
                Ok(Value::from_int(n as u64))
            }
        }
        deserializer.deserialize_any(V)
    }
}

impl Add for Value {
    type Output = Value;
    fn add(self, rhs: Value) -> Value {
        Value(self.0 + rhs.0)
    }
}

impl Add for &Value {
    type Output = Value;
    fn add(self, rhs: &Value) -> Value {
        Value(&self.0 + &rhs.0)
    }
}

impl AddAssign<&Value> for Value {
    fn add_assign(&mut self, rhs: &Value) {
        self.0 += &rhs.0;
    }
}

impl Sub for &Value {
    type Output = Value;
    /// Panics if the result would be negative; callers only subtract a
    /// member's value from its bundle total.
    fn sub(self, rhs: &Value) -> Value {
        let r = &self.0 - &rhs.0;
        assert!(!r.is_negative(), "value subtraction went negative");
        Value(r)
    }
}

impl Mul for &Value {
    type Output = Value;
    fn mul(self, rhs: &Value) -> Value {
        Value(&self.0 * &rhs.0)
    }
}

impl MulAssign<&Value> for Value {
    fn mul_assign(&mut self, rhs: &Value) {
        self.0 *= &rhs.0;
    }
}

impl Div for &Value {
    type Output = Value;
    /// Panics on division by zero; use [`Value::checked_div`] when the
    /// denominator is not known to be positive.
    fn div(self, rhs: &Value) -> Value {
        assert!(!rhs.is_zero(), "value division by zero");
        Value(&self.0 / &rhs.0)
    }
}

impl Sum for Value {
    fn sum<I: Iterator<Item = Value>>(iter: I) -> Value {
        let mut acc = BigRational::zero();
        for v in iter {
            acc += v.0;
        }
        Value(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["0", "7", "2/3", "19/10", "100/1"] {
            let v: Value = s.parse().unwrap();
            let back: Value = v.to_string().parse().unwrap();
            assert_eq!(v, back);
        }
        assert_eq!(Value::ratio(100, 1).to_string(), "100");
        assert_eq!(Value::ratio(4, 6).to_string(), "2/3");
    }

    #[test]
    fn rejects_negatives_and_zero_denominators() {
        assert!("-1".parse::<Value>().is_err());
        assert!("1/-2".parse::<Value>().is_err());
        assert!("3/0".parse::<Value>().is_err());
        assert!(Value::new(1, 0).is_err());
        assert!(Value::new(-1, 2).is_err());
        // -1/-2 reduces to a nonnegative value and is accepted.
        assert_eq!("-1/-2".parse::<Value>().unwrap(), Value::ratio(1, 2));
    }

    #[test]
    fn ordering_is_exact() {
        assert!(Value::ratio(1, 3) < Value::ratio(34, 100));
        assert!(Value::ratio(2, 3) > Value::ratio(66, 100));
        assert_eq!(Value::ratio(2, 4), Value::ratio(1, 2));
    }

    #[test]
    fn json_accepts_integers_and_strings() {
        let v: Value = serde_json::from_str("\"2/3\"").unwrap();
        assert_eq!(v, Value::ratio(2, 3));
        let v: Value = serde_json::from_str("5").unwrap();
        assert_eq!(v, Value::from_int(5));
        assert_eq!(serde_json::to_string(&Value::ratio(1, 2)).unwrap(), "\"1/2\"");
    }
}
