//! Groups with computable normal forms and an ordered, symmetric generating
//! set. Generator `i` comes before generator `j` in words iff `i < j`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tree_model::{PeriodicSpec, TreeSpec};

/// Normal form of a group element.
///
/// Free groups: the reduced word as generator indices. `Zᵈ`: coordinates.
/// Free products: `(factor, exponent)` pairs, flattened.
pub type Element = Vec<i32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupModel {
    /// Generators `a, a⁻¹, b, b⁻¹, …`.
    Free { rank: u32 },
    /// Generators `e₁, -e₁, e₂, -e₂, …`.
    FreeAbelian { dim: u32 },
    /// Free product of cyclic groups of the given orders (each ≥ 2).
    /// Factor `i` contributes `xᵢ` and, for order above 2, `xᵢ⁻¹`.
    FreeProduct { orders: Vec<u32> },
}

#[derive(Debug, Clone, Copy)]
enum Gen {
    Free(i32),
    Axis(usize, i32),
    Factor(i32, i32),
}

fn letter(i: usize) -> char {
    (b'a' + (i % 26) as u8) as char
}

impl GroupModel {
    pub fn infinite_dihedral() -> Self {
        GroupModel::FreeProduct { orders: vec![2, 2] }
    }

    fn validate(self) -> Result<Self> {
        let ok = match &self {
            GroupModel::Free { rank } => (1..=26).contains(rank),
            GroupModel::FreeAbelian { dim } => (1..=26).contains(dim),
            GroupModel::FreeProduct { orders } => {
                !orders.is_empty() && orders.len() <= 26 && orders.iter().all(|&m| m >= 2)
            }
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::UnknownGroup(self.to_string()))
        }
    }

    fn gens(&self) -> Vec<Gen> {
        match self {
            GroupModel::Free { rank } => (0..2 * *rank as i32).map(Gen::Free).collect(),
            GroupModel::FreeAbelian { dim } => {
                (0..*dim as usize).flat_map(|i| [Gen::Axis(i, 1), Gen::Axis(i, -1)]).collect()
            }
            GroupModel::FreeProduct { orders } => orders
                .iter()
                .enumerate()
                .flat_map(|(i, &m)| {
                    let i = i as i32;
                    let m = m as i32;
                    if m == 2 {
                        vec![Gen::Factor(i, 1)]
                    } else {
                        vec![Gen::Factor(i, 1), Gen::Factor(i, m - 1)]
                    }
                })
                .collect(),
        }
    }

    fn gen(&self, g: usize) -> Gen {
        match self {
            GroupModel::Free { .. } => Gen::Free(g as i32),
            GroupModel::FreeAbelian { .. } => Gen::Axis(g / 2, if g % 2 == 0 { 1 } else { -1 }),
            GroupModel::FreeProduct { .. } => self.gens()[g],
        }
    }

    pub fn generator_count(&self) -> usize {
        self.gens().len()
    }

    /// Display names of the generators, in order.
    pub fn generator_names(&self) -> Vec<String> {
        self.gens()
            .into_iter()
            .map(|g| match g {
                Gen::Free(i) => {
                    let c = letter(i as usize / 2);
                    if i % 2 == 0 {
                        c.to_string()
                    } else {
                        format!("{c}^-1")
                    }
                }
                Gen::Axis(i, 1) => letter(i).to_string(),
                Gen::Axis(i, _) => format!("{}^-1", letter(i)),
                Gen::Factor(i, 1) => letter(i as usize).to_string(),
                Gen::Factor(i, _) => format!("{}^-1", letter(i as usize)),
            })
            .collect()
    }

    /// Index of the inverse of generator `g`.
    pub fn inverse(&self, g: usize) -> usize {
        match self {
            GroupModel::Free { .. } | GroupModel::FreeAbelian { .. } => g ^ 1,
            GroupModel::FreeProduct { .. } => {
                let gens = self.gens();
                let Gen::Factor(i, e) = gens[g] else { unreachable!() };
                gens.iter()
                    .position(|h| matches!(*h, Gen::Factor(j, f) if j == i && (e + f) % self.order(i) == 0))
                    .expect("generating set is symmetric")
            }
        }
    }

    fn order(&self, factor: i32) -> i32 {
        match self {
            GroupModel::FreeProduct { orders } => orders[factor as usize] as i32,
            _ => 0,
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            GroupModel::FreeAbelian { dim } => vec![0; *dim as usize],
            _ => vec![],
        }
    }

    /// Right multiplication by generator `g`.
    pub fn mul_gen(&self, x: &Element, g: usize) -> Element {
        let mut y = x.clone();
        match self.gen(g) {
            Gen::Free(i) => {
                if y.last() == Some(&(i ^ 1)) {
                    y.pop();
                } else {
                    y.push(i);
                }
            }
            Gen::Axis(i, s) => y[i] += s,
            Gen::Factor(i, e) => {
                let m = self.order(i);
                let n = y.len();
                if n >= 2 && y[n - 2] == i {
                    let new = (y[n - 1] + e) % m;
                    if new == 0 {
                        y.truncate(n - 2);
                    } else {
                        y[n - 1] = new;
                    }
                } else {
                    y.extend([i, e]);
                }
            }
        }
        y
    }

    /// The element spelled by a word of generator indices.
    pub fn evaluate(&self, word: &[usize]) -> Element {
        word.iter().fold(self.identity(), |x, &g| self.mul_gen(&x, g))
    }

    /// The self-similar tree the lex-min spanning tree unfolds into, when it
    /// is known in closed form (free groups).
    pub fn spanning_tree_spec(&self) -> Option<TreeSpec> {
        match self {
            GroupModel::Free { rank } => {
                let r = *rank as usize;
                let spec = PeriodicSpec::new("root", &[("root", vec!["A"; 2 * r]), ("A", vec!["A"; 2 * r - 1])]).ok()?;
                Some(TreeSpec::Periodic(spec))
            }
            _ => None,
        }
    }
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupModel::Free { rank } => write!(f, "free:{rank}"),
            GroupModel::FreeAbelian { dim } => write!(f, "zd:{dim}"),
            GroupModel::FreeProduct { orders } if orders == &[2, 2] => write!(f, "dinf"),
            GroupModel::FreeProduct { orders } => {
                let list: Vec<String> = orders.iter().map(u32::to_string).collect();
                write!(f, "freeprod:{}", list.join(","))
            }
        }
    }
}

impl FromStr for GroupModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownGroup(s.to_string());
        let s = s.trim();
        if s == "dinf" {
            return Ok(GroupModel::infinite_dihedral());
        }
        let (name, args) = s.split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
        let model = match name {
            "free" => GroupModel::Free { rank: num(args)? },
            "zd" => GroupModel::FreeAbelian { dim: num(args)? },
            "freeprod" => GroupModel::FreeProduct { orders: args.split(',').map(num).collect::<Result<_>>()? },
            _ => return Err(bad()),
        };
        model.validate().map_err(|_| bad())
    }
}

impl Serialize for GroupModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn models() -> Vec<GroupModel> {
        ["free:1", "free:2", "zd:1", "zd:2", "zd:3", "dinf", "freeprod:2,3", "freeprod:3,3,4"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect()
    }

    #[test]
    fn parse_and_display() {
        for m in models() {
            assert_eq!(m.to_string().parse::<GroupModel>().unwrap(), m);
        }
        for bad in ["free:0", "zd:x", "freeprod:1,2", "cyclic:3", "free"] {
            assert!(bad.parse::<GroupModel>().is_err(), "{bad}");
        }
    }

    #[test]
    fn generator_then_inverse_is_identity() {
        for m in models() {
            let samples = [m.identity(), m.evaluate(&[0]), m.evaluate(&[0, m.generator_count() - 1, 0])];
            for x in &samples {
                for g in 0..m.generator_count() {
                    assert_eq!(&m.mul_gen(&m.mul_gen(x, g), m.inverse(g)), x, "{m} gen {g}");
                }
            }
        }
    }

    #[test]
    fn generator_names() {
        let f2: GroupModel = "free:2".parse().unwrap();
        assert_eq!(f2.generator_names(), ["a", "a^-1", "b", "b^-1"]);
        assert_eq!(GroupModel::infinite_dihedral().generator_names(), ["a", "b"]);
        let p: GroupModel = "freeprod:2,3".parse().unwrap();
        assert_eq!(p.generator_names(), ["a", "b", "b^-1"]);
        assert_eq!(p.inverse(1), 2);
        assert_eq!(p.inverse(0), 0);
    }

    #[test]
    fn free_product_relations() {
        let p: GroupModel = "freeprod:2,3".parse().unwrap();
        assert_eq!(p.evaluate(&[0, 0]), p.identity());
        assert_eq!(p.evaluate(&[1, 1, 1]), p.identity());
        assert_eq!(p.evaluate(&[1, 1]), p.evaluate(&[2]));
        assert_ne!(p.evaluate(&[0, 1]), p.evaluate(&[1, 0]));
    }
}
