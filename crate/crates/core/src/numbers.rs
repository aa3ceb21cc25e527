//! Exact integers and rationals with a JSON-friendly encoding.
//!
//! Integers that fit in `u64` serialize as JSON numbers and larger ones as
//! decimal strings; rationals serialize as `{"num": …, "den": …}` in lowest
//! terms with a positive denominator.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A nonnegative arbitrary-precision integer.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Count(pub BigUint);

impl Count {
    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
}

impl From<u64> for Count {
    fn from(v: u64) -> Self {
        Count(BigUint::from(v))
    }
}

impl From<usize> for Count {
    fn from(v: usize) -> Self {
        Count(BigUint::from(v))
    }
}

impl From<BigUint> for Count {
    fn from(v: BigUint) -> Self {
        Count(v)
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

struct IntVisitor;

impl<'de> Visitor<'de> for IntVisitor {
    type Value = BigInt;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a decimal integer string")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<BigInt, E> {
        v.parse().map_err(|_| E::custom(format!("invalid integer string {v:?}")))
    }
}

fn deserialize_int<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    d.deserialize_any(IntVisitor)
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = deserialize_int(d)?;
        v.to_biguint()
            .map(Count)
            .ok_or_else(|| de::Error::custom("expected a nonnegative integer"))
    }
}

/// An exact rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ratio(pub BigRational);

impl Ratio {
    pub fn to_f64(&self) -> f64 {
        // Numerator and denominator can exceed f64 range separately.
        let num = self.0.numer().to_f64().unwrap_or(f64::NAN);
        let den = self.0.denom().to_f64().unwrap_or(f64::NAN);
        if num.is_finite() && den.is_finite() {
            return num / den;
        }
        let (ln, ld) = (bits_ln(self.0.numer()), bits_ln(self.0.denom()));
        let sign = if self.0.is_negative() { -1.0 } else { 1.0 };
        sign * (ln - ld).exp()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }
}

fn bits_ln(v: &BigInt) -> f64 {
    let bits = v.bits();
    let shift = bits.saturating_sub(60);
    let top = (v.abs() >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

impl From<BigRational> for Ratio {
    fn from(v: BigRational) -> Self {
        Ratio(v)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn int_json(v: &BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(x) => serde_json::Value::from(x),
        None => serde_json::Value::from(v.to_string()),
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Ratio", 2)?;
        st.serialize_field("num", &int_json(self.0.numer()))?;
        st.serialize_field("den", &int_json(self.0.denom()))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            #[serde(deserialize_with = "deserialize_int")]
            num: BigInt,
            #[serde(deserialize_with = "deserialize_int")]
            den: BigInt,
        }
        let r = Repr::deserialize(d)?;
        if r.den.is_zero() {
            return Err(de::Error::custom("zero denominator"));
        }
        Ok(Ratio(BigRational::new(r.num, r.den)))
    }
}

pub fn factorial(k: usize) -> BigUint {
    (2..=k as u64).fold(BigUint::one(), |acc, v| acc * v)
}

/// `total! / Π parts!`, or zero when some part is negative or the parts do
/// not sum to `total`.
pub fn multinomial(total: i64, parts: &[i64]) -> BigUint {
    if total < 0 || parts.iter().any(|&p| p < 0) || parts.iter().sum::<i64>() != total {
        return BigUint::zero();
    }
    let den = parts.iter().fold(BigUint::one(), |acc, &p| acc * factorial(p as usize));
    factorial(total as usize) / den
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    multinomial(n as i64, &[k as i64, (n - k) as i64])
}

pub fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn to_rational(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial(4, &[2, 2, 0]), BigUint::from(6u32));
        assert_eq!(multinomial(5, &[3, 2, 0]), BigUint::from(10u32));
        assert_eq!(multinomial(3, &[2, 1]), BigUint::from(3u32));
        assert_eq!(multinomial(2, &[0, 2, 0]), BigUint::from(1u32));
        assert_eq!(multinomial(2, &[-1, 3]), BigUint::zero());
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
    }

    #[test]
    fn count_json() {
        let small = Count::from(42u64);
        assert_eq!(serde_json::to_string(&small).unwrap(), "42");
        let big = Count(factorial(30));
        let text = serde_json::to_string(&big).unwrap();
        assert_eq!(text, "\"265252859812191058636308480000000\"");
        assert_eq!(serde_json::from_str::<Count>(&text).unwrap(), big);
        assert!(serde_json::from_str::<Count>("-1").is_err());
    }

    #[test]
    fn ratio_json_and_float() {
        let r = Ratio(rational(6, 4));
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"num":3,"den":2}"#);
        assert_eq!(serde_json::from_str::<Ratio>(r#"{"num":3,"den":2}"#).unwrap(), r);
        assert_eq!(r.to_f64(), 1.5);
        let huge = Ratio(BigRational::new(BigInt::from(factorial(200)) * 3, BigInt::from(factorial(200))));
        assert_eq!(huge.to_f64(), 3.0);
        let wide = Ratio(BigRational::new(BigInt::from(factorial(180)) + 1, BigInt::from(factorial(179))));
        assert!((wide.to_f64() - 180.0).abs() < 1e-9);
    }
}
