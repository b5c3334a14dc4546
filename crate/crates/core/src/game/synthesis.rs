//! Containment strategies built from light cutsets.
//!
//! For `λ` above the branching number there are cutsets of arbitrarily small
//! weight `Σ λ^{-|e|}`. If the weight is below `ε` with
//! `ε·λⁿ ≤ ⌊λ^{n-k}⌋` for all `n > k`, then the cut vertices at level `n`
//! number fewer than `⌊λ^{n-k}⌋`, so all of them can be played in round
//! `n - k`, just before the fire arrives.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::branching::{br_exact_periodic, min_cut, Cutset};
use crate::error::{Error, Result};
use crate::game::Strategy;
use crate::rate::{floor_to_biguint, pow_rational, Rate, Weight};
use crate::tree_model::{expand, TreeSpec, Truncation};

/// Margin applied to `ε` for floating-point rates.
pub const FLOAT_EPSILON_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, Serialize)]
pub struct CutsetPlan {
    pub strategy: Strategy,
    pub epsilon: Weight,
    pub weight: Weight,
    pub cutset: Cutset,
    /// Depth of the truncation the cut was found in.
    pub depth: u32,
    #[serde(skip)]
    pub truncation: Truncation,
}

/// The largest `ε` with `ε·λⁿ ≤ ⌊λ^{n-k}⌋` for every `n > k`, that is
/// `λ^{-k} · inf_{m ≥ 1} ⌊λ^m⌋ / λ^m`. Exact for rational rates; halved for
/// float rates. Requires `λ > 1`.
pub fn synthesis_epsilon(lambda: &Rate, k: u32) -> Result<Weight> {
    if lambda.to_f64() <= 1.0 {
        return Err(Error::InvalidRate(format!("cutset synthesis needs λ > 1, got {lambda}")));
    }
    match lambda {
        Rate::Exact(l) => {
            let mut best = BigRational::one();
            let mut power = BigRational::one();
            let steps = if l.is_integer() { 0 } else { 10_000 };
            for _ in 0..steps {
                power *= l;
                let ratio = BigRational::from_integer(floor_to_biguint(&power).into()) / &power;
                if ratio < best {
                    best = ratio;
                }
                // every later ratio is at least 1 - λ^{-m}
                if BigRational::one() - power.recip() >= best {
                    break;
                }
            }
            Ok(Weight::Exact(best * pow_rational(&l.recip(), k)))
        }
        Rate::Float(l) => {
            let mut best = 1.0f64;
            let mut power = 1.0f64;
            let steps = if l.fract() == 0.0 { 0 } else { 10_000 };
            for _ in 0..steps {
                power *= l;
                best = best.min(power.floor() / power);
                if 1.0 - 1.0 / power >= best {
                    break;
                }
            }
            Ok(Weight::Float(FLOAT_EPSILON_MARGIN * best * l.powi(-(k as i32))))
        }
    }
}

/// Deepens truncations of `spec` until a cutset below `B_r(k)` is lighter
/// than [`synthesis_epsilon`], and schedules its level-`n` vertices for
/// round `n - k`.
pub fn synthesize_cutset_strategy(spec: &TreeSpec, lambda: &Rate, k: u32, depth_max: u32) -> Result<CutsetPlan> {
    let br = match spec {
        TreeSpec::Explicit(_) => 1.0,
        _ => br_exact_periodic(spec)?,
    };
    if lambda.to_f64() <= br {
        return Err(Error::RateNotAboveBranching { lambda: lambda.to_f64(), br });
    }
    let epsilon = synthesis_epsilon(lambda, k)?;
    for depth in k + 1..=depth_max {
        let trunc = expand(spec, depth)?;
        let Some(mc) = min_cut(&trunc, lambda, k + 1) else { continue };
        let light = match (&mc.weight, &epsilon) {
            (Weight::Exact(w), Weight::Exact(e)) => w < e,
            (w, e) => w.to_f64() < e.to_f64(),
        };
        if light {
            let mut by_level: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for &v in mc.cutset.edges() {
                by_level.entry(trunc.level(v)).or_default().push(v);
            }
            return Ok(CutsetPlan {
                strategy: Strategy::Cutset { by_level, offset: k },
                epsilon,
                weight: mc.weight,
                cutset: mc.cutset,
                depth,
                truncation: trunc,
            });
        }
    }
    Err(Error::NoLightCutset { epsilon: epsilon.to_f64(), depth_max })
}

impl CutsetPlan {
    /// Largest number of vertices scheduled in a single round.
    pub fn max_round_size(&self) -> usize {
        match &self.strategy {
            Strategy::Cutset { by_level, .. } => by_level.values().map(Vec::len).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn epsilon_f64(&self) -> f64 {
        self.epsilon.as_exact().and_then(|e| e.to_f64()).unwrap_or_else(|| self.epsilon.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{simulate, BudgetSequence, Verdict};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn epsilon_for_integer_rates() {
        assert_eq!(synthesis_epsilon(&Rate::integer(3).unwrap(), 1).unwrap(), Weight::Exact(q(1, 3)));
        assert_eq!(synthesis_epsilon(&Rate::integer(2).unwrap(), 0).unwrap(), Weight::Exact(q(1, 1)));
    }

    #[test]
    fn epsilon_for_fractional_rates() {
        // ⌊2.5⌋/2.5 = 0.8 is the smallest ratio
        assert_eq!(synthesis_epsilon(&Rate::ratio(5, 2).unwrap(), 0).unwrap(), Weight::Exact(q(4, 5)));
        // 1.5: ratios 2/3, 8/9, 8/9·..., the first is smallest
        assert_eq!(synthesis_epsilon(&Rate::ratio(3, 2).unwrap(), 1).unwrap(), Weight::Exact(q(4, 9)));
        let float = synthesis_epsilon(&Rate::float(2.5).unwrap(), 0).unwrap();
        assert!((float.to_f64() - 0.4).abs() < 1e-12);
        assert!(synthesis_epsilon(&Rate::integer(1).unwrap(), 0).is_err());
    }

    #[test]
    fn binary_tree_rate_three() {
        let plan = synthesize_cutset_strategy(&TreeSpec::regular(2), &Rate::integer(3).unwrap(), 1, 10).unwrap();
        assert_eq!(plan.depth, 3);
        assert_eq!(plan.weight, Weight::Exact(q(8, 27)));
        assert_eq!(plan.strategy.cutset_round(2).map(<[usize]>::len), Some(8));
        let budget = BudgetSequence::ExponentialFloor(Rate::integer(3).unwrap());
        let sim = simulate(&plan.truncation, 1, &plan.strategy, &budget, 10).unwrap();
        assert_eq!(sim.verdict, Verdict::Contained { round: 2, burned: 7 });
    }

    #[test]
    fn ray_rate_two() {
        let plan = synthesize_cutset_strategy(&TreeSpec::ray(), &Rate::integer(2).unwrap(), 0, 10).unwrap();
        assert_eq!(plan.cutset.edges().iter().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(plan.strategy.cutset_round(1), Some(&[1][..]));
        let budget = BudgetSequence::ExponentialFloor(Rate::integer(2).unwrap());
        let sim = simulate(&plan.truncation, 0, &plan.strategy, &budget, 5).unwrap();
        assert_eq!(sim.verdict, Verdict::Contained { round: 1, burned: 1 });
    }

    #[test]
    fn rate_below_branching_is_rejected() {
        let err = synthesize_cutset_strategy(&TreeSpec::regular(2), &Rate::ratio(3, 2).unwrap(), 1, 12).unwrap_err();
        assert!(matches!(err, Error::RateNotAboveBranching { .. }));
    }

    #[test]
    fn no_light_cut_within_depth_limit() {
        // λ slightly above br needs deep cuts
        let err = synthesize_cutset_strategy(&TreeSpec::regular(2), &Rate::ratio(21, 10).unwrap(), 1, 6).unwrap_err();
        assert!(matches!(err, Error::NoLightCutset { depth_max: 6, .. }));
    }
}
