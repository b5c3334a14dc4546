use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::{floor_f64_to_biguint, floor_to_biguint, saturating_u64, Rate};

/// The number of vertices `f_n` that may be protected in round `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum BudgetSequence {
    Constant(u64),
    /// `⌊λⁿ⌋`
    ExponentialFloor(Rate),
    /// `⌊c · n^d⌋`
    PolynomialFloor { coeff: Rate, degree: u32 },
    /// `f_1, f_2, …` as listed; zero afterwards.
    Explicit(Vec<u64>),
}

impl BudgetSequence {
    pub fn value_big(&self, n: u32) -> BigUint {
        debug_assert!(n >= 1, "rounds start at 1");
        match self {
            BudgetSequence::Constant(c) => BigUint::from(*c),
            BudgetSequence::ExponentialFloor(l) => l.floor_pow(n),
            BudgetSequence::PolynomialFloor { coeff, degree } => {
                let power = num_traits::pow(BigUint::from(n), *degree as usize);
                match coeff {
                    Rate::Exact(c) => floor_to_biguint(&(c * BigRational::from_integer(BigInt::from(power)))),
                    Rate::Float(c) => floor_f64_to_biguint(c * (n as f64).powi(*degree as i32)),
                }
            }
            BudgetSequence::Explicit(list) => {
                BigUint::from(list.get(n as usize - 1).copied().unwrap_or(0))
            }
        }
    }

    /// `f_n`, saturating at `u64::MAX`.
    pub fn value(&self, n: u32) -> u64 {
        saturating_u64(&self.value_big(n))
    }

    /// `F(m) = Σ_{i=1}^{m} f_i` for `m = 0..=rounds`, saturating.
    pub fn cumulative(&self, rounds: u32) -> Vec<u64> {
        let mut out = Vec::with_capacity(rounds as usize + 1);
        let mut acc = 0u64;
        out.push(0);
        for n in 1..=rounds {
            acc = acc.saturating_add(self.value(n));
            out.push(acc);
        }
        out
    }

    /// Exact `F(m)` for `m = 0..=rounds`.
    pub fn cumulative_big(&self, rounds: u32) -> Vec<BigUint> {
        let mut out = Vec::with_capacity(rounds as usize + 1);
        let mut acc = BigUint::zero();
        out.push(acc.clone());
        for n in 1..=rounds {
            acc += self.value_big(n);
            out.push(acc.clone());
        }
        out
    }

    /// First round from which `f_n` no longer changes, when known.
    pub fn stabilisation_round(&self) -> Option<u32> {
        match self {
            BudgetSequence::Constant(_) => Some(1),
            BudgetSequence::Explicit(list) => Some(list.len() as u32 + 1),
            BudgetSequence::ExponentialFloor(l) if l.to_f64() < 1.0 => Some(1),
            BudgetSequence::ExponentialFloor(Rate::Exact(r)) if num_traits::One::is_one(r) => Some(1),
            BudgetSequence::PolynomialFloor { degree: 0, .. } => Some(1),
            _ => None,
        }
    }

    /// True if `self` is at least `other` in every round up to `rounds`.
    pub fn dominates(&self, other: &BudgetSequence, rounds: u32) -> bool {
        (1..=rounds).all(|n| self.value_big(n) >= other.value_big(n))
    }
}

/// `const:<c>`, `exp:<λ>`, `poly:<c>,<d>` or `list:<f1>,<f2>,…`.
impl FromStr for BudgetSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidBudget(format!("{s:?}: {why}"));
        let (kind, arg) = s.split_once(':').ok_or_else(|| bad("expected <kind>:<args>"))?;
        match kind {
            "const" => Ok(BudgetSequence::Constant(arg.trim().parse().map_err(|_| bad("not an integer"))?)),
            "exp" => Ok(BudgetSequence::ExponentialFloor(arg.parse()?)),
            "poly" => {
                let (c, d) = arg.split_once(',').ok_or_else(|| bad("expected poly:<c>,<d>"))?;
                Ok(BudgetSequence::PolynomialFloor {
                    coeff: c.parse()?,
                    degree: d.trim().parse().map_err(|_| bad("degree is not an integer"))?,
                })
            }
            "list" => {
                let values = arg
                    .split(',')
                    .filter(|x| !x.trim().is_empty())
                    .map(|x| x.trim().parse::<u64>().map_err(|_| bad("list entry is not an integer")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BudgetSequence::Explicit(values))
            }
            _ => Err(bad("unknown kind")),
        }
    }
}

impl fmt::Display for BudgetSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetSequence::Constant(c) => write!(f, "const:{c}"),
            BudgetSequence::ExponentialFloor(l) => write!(f, "exp:{l}"),
            BudgetSequence::PolynomialFloor { coeff, degree } => write!(f, "poly:{coeff},{degree}"),
            BudgetSequence::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "list:{}", parts.join(","))
            }
        }
    }
}

impl Serialize for BudgetSequence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BudgetSequence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_each_variant() {
        let exp: BudgetSequence = "exp:3".parse().unwrap();
        assert_eq!((1..=4).map(|n| exp.value(n)).collect::<Vec<_>>(), vec![3, 9, 27, 81]);
        let poly: BudgetSequence = "poly:1,2".parse().unwrap();
        assert_eq!((1..=4).map(|n| poly.value(n)).collect::<Vec<_>>(), vec![1, 4, 9, 16]);
        let half_poly: BudgetSequence = "poly:1/2,1".parse().unwrap();
        assert_eq!((1..=4).map(|n| half_poly.value(n)).collect::<Vec<_>>(), vec![0, 1, 1, 2]);
        let list: BudgetSequence = "list:2,0,5".parse().unwrap();
        assert_eq!((1..=5).map(|n| list.value(n)).collect::<Vec<_>>(), vec![2, 0, 5, 0, 0]);
        assert_eq!(BudgetSequence::Constant(2).cumulative(3), vec![0, 2, 4, 6]);
    }

    #[test]
    fn huge_budgets_saturate() {
        let exp = BudgetSequence::ExponentialFloor(Rate::integer(10).unwrap());
        assert_eq!(exp.value(30), u64::MAX);
        assert_eq!(exp.value_big(30), num_traits::pow(BigUint::from(10u32), 30));
        assert_eq!(*exp.cumulative(40).last().unwrap(), u64::MAX);
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["const:1", "exp:3/2", "poly:2,3", "list:1,2,3", "exp:float:2.5"] {
            assert_eq!(s.parse::<BudgetSequence>().unwrap().to_string(), s);
        }
        for s in ["const", "const:x", "poly:1", "geom:2", "list:1,a"] {
            assert!(s.parse::<BudgetSequence>().is_err(), "{s}");
        }
    }

    #[test]
    fn stabilisation() {
        assert_eq!(BudgetSequence::Constant(3).stabilisation_round(), Some(1));
        assert_eq!(BudgetSequence::Explicit(vec![1, 2]).stabilisation_round(), Some(3));
        assert_eq!("exp:1/2".parse::<BudgetSequence>().unwrap().stabilisation_round(), Some(1));
        assert_eq!("exp:3/2".parse::<BudgetSequence>().unwrap().stabilisation_round(), None);
    }
}
