//! Growth rates and cut weights.
//!
//! A rate is either an exact rational `p/q` or a float. Rational rates keep
//! every weight `λ^{-n}` exact so cut and flow comparisons are equalities;
//! float rates fall back to `f64` with explicit tolerances.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arithmetic needed by the cut and flow recursions.
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
{
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// A positive rate `λ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Rate {
    Exact(BigRational),
    Float(f64),
}

impl Rate {
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidRate(format!("{num}/{den}")));
        }
        Self::exact(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(n: i64) -> Result<Self> {
        Self::ratio(n, 1)
    }

    pub fn exact(value: BigRational) -> Result<Self> {
        if !value.is_positive() {
            return Err(Error::InvalidRate(format!("{value} is not positive")));
        }
        Ok(Rate::Exact(value))
    }

    pub fn float(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidRate(format!("{value} is not a positive finite number")));
        }
        Ok(Rate::Float(value))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Rate::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rate::Exact(r) => Scalar::to_f64(r),
            Rate::Float(x) => *x,
        }
    }

    /// `⌊λⁿ⌋`, exact for rational rates.
    pub fn floor_pow(&self, n: u32) -> BigUint {
        match self {
            Rate::Exact(r) => floor_to_biguint(&pow_rational(r, n)),
            Rate::Float(x) => floor_f64_to_biguint(x.powi(n as i32)),
        }
    }

    /// `⌊c · xⁿ⌋` where `self` plays the role of `c`.
    pub fn floor_times(&self, x: u64) -> BigUint {
        match self {
            Rate::Exact(r) => floor_to_biguint(&(r * BigRational::from_integer(BigInt::from(x)))),
            Rate::Float(c) => floor_f64_to_biguint(c * x as f64),
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Exact(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            Rate::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Rate::Float(x) => write!(f, "float:{x}"),
        }
    }
}

/// Parses `p/q`, a plain decimal such as `1.5` (read exactly as `3/2`), or
/// `float:<x>` for a rate that should stay floating point.
impl FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidRate(s.to_string());
        if let Some(rest) = s.strip_prefix("float:") {
            return Rate::float(rest.parse().map_err(|_| bad())?);
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            return Rate::exact(BigRational::new(p, q));
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty()
            || !int.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        Rate::exact(BigRational::new(digits, scale))
    }
}

impl Serialize for Rate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A cut or flow value; exact when it was computed from an exact rate.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub enum Weight {
    Exact(BigRational),
    Float(f64),
}

impl Weight {
    pub fn to_f64(&self) -> f64 {
        match self {
            Weight::Exact(r) => Scalar::to_f64(r),
            Weight::Float(x) => *x,
        }
    }

    /// Exact equality for exact weights, `|a - b| < tol` otherwise.
    pub fn approx_eq(&self, other: &Weight, tol: f64) -> bool {
        match (self, other) {
            (Weight::Exact(a), Weight::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() < tol,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Weight::Exact(r) => Some(r),
            Weight::Float(_) => None,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Exact(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            Weight::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Weight::Float(x) => write!(f, "{x:e}"),
        }
    }
}

/// Exact weights as `"p/q"` strings, float weights as numbers.
impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Weight::Exact(_) => serializer.collect_str(self),
            Weight::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

impl From<BigRational> for Weight {
    fn from(r: BigRational) -> Self {
        Weight::Exact(r)
    }
}

impl From<f64> for Weight {
    fn from(x: f64) -> Self {
        Weight::Float(x)
    }
}

pub(crate) fn pow_rational(r: &BigRational, n: u32) -> BigRational {
    num_traits::pow(r.clone(), n as usize)
}

pub(crate) fn floor_to_biguint(r: &BigRational) -> BigUint {
    if r.is_negative() {
        return BigUint::zero();
    }
    r.numer().div_floor(r.denom()).to_biguint().unwrap_or_default()
}

pub(crate) fn floor_f64_to_biguint(x: f64) -> BigUint {
    if !(x >= 1.0) {
        return BigUint::zero();
    }
    num_bigint::ToBigUint::to_biguint(&x.floor()).unwrap_or_default()
}

pub(crate) fn saturating_u64(x: &BigUint) -> u64 {
    x.to_u64().unwrap_or(u64::MAX)
}

/// Serialises big integers as decimal strings.
pub(crate) fn serialize_level_counts<S: serde::Serializer>(
    counts: &[(u32, BigUint)],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_seq(counts.iter().map(|(l, c)| (l, c.to_string())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!("1.5".parse::<Rate>().unwrap(), Rate::ratio(3, 2).unwrap());
        assert_eq!("3".parse::<Rate>().unwrap(), Rate::integer(3).unwrap());
        assert_eq!("6/4".parse::<Rate>().unwrap(), Rate::ratio(3, 2).unwrap());
        assert!(matches!("float:2.5".parse::<Rate>().unwrap(), Rate::Float(x) if x == 2.5));
    }

    #[test]
    fn rejects_nonpositive_and_garbage() {
        for s in ["0", "-1", "1/0", "abc", "", "1.2.3", "float:-2", "float:nan"] {
            assert!(s.parse::<Rate>().is_err(), "{s} should be rejected");
        }
    }

    #[test]
    fn floor_pow_is_exact() {
        let r = Rate::ratio(3, 2).unwrap();
        let got: Vec<u64> = (0..8).map(|n| saturating_u64(&r.floor_pow(n))).collect();
        // 1, 1.5, 2.25, 3.375, 5.06, 7.59, 11.39, 17.09
        assert_eq!(got, vec![1, 1, 2, 3, 5, 7, 11, 17]);
        assert_eq!(Rate::ratio(1, 2).unwrap().floor_pow(3), BigUint::zero());
    }

    #[test]
    fn display_round_trips() {
        for s in ["3/2", "7", "float:2.5"] {
            let r: Rate = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
    }
}

