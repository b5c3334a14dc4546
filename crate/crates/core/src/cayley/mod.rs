//! Firefighting on Cayley graphs: group models, balls, lex-min geodesic
//! spanning trees, growth estimates, wait-and-surround and polynomial probes.

mod ball;
mod group;

use serde::Serialize;

pub use ball::{growth_rate_estimate, sphere_sizes, CayleyBall, GrowthEstimates};
pub use group::{Element, GroupModel};

use crate::error::{Error, Result};
use crate::game::{feasibility_on_truncation, simulate, BudgetSequence, CutWitness, Decision, Strategy, Verdict};
use crate::rate::Rate;
use crate::tree_model::{expand_with_cap, TreeSpec};

/// One line of the budget-versus-sphere comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurroundRow {
    pub round: u32,
    /// `⌊λⁿ⌋`, in decimal.
    pub budget: String,
    pub sphere: u32,
    pub sphere_size: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurroundReport {
    pub group: GroupModel,
    pub k: u32,
    pub lambda: Rate,
    pub trigger_round: u32,
    pub sphere: u32,
    pub ball_size: usize,
    pub strategy: Strategy,
    pub verdict: Verdict,
    pub table: Vec<SurroundRow>,
}

/// Waits until `⌊λⁿ⌋ ≥ |S(k+n+1)|`, then protects that whole sphere in round
/// `n`. The fire then fills at most `B(k+n)`, so it stops one round later.
pub fn wait_and_surround(model: &GroupModel, k: u32, lambda: &Rate, radius: u32, cap: usize) -> Result<SurroundReport> {
    let sizes = sphere_sizes(model, radius, cap)?;
    let mut table = vec![];
    let mut trigger = None;
    for n in 1..radius.saturating_sub(k) {
        let sphere = k + n + 1;
        let budget = lambda.floor_pow(n);
        let size = sizes[sphere as usize];
        table.push(SurroundRow { round: n, budget: budget.to_string(), sphere, sphere_size: size });
        if budget >= size.into() {
            trigger = Some((n, sphere));
            break;
        }
    }
    let Some((trigger_round, sphere)) = trigger else {
        let trace = table.iter().map(|r| format!("n={} {} < |S({})|={}", r.round, r.budget, r.sphere, r.sphere_size));
        return Err(Error::NoTrigger { radius, trace: trace.collect::<Vec<_>>().join("; ") });
    };
    let ball = CayleyBall::build(model, sphere, cap)?;
    let strategy = Strategy::WaitAndSurround { lambda: lambda.clone(), trigger_round, sphere };
    let budget = BudgetSequence::ExponentialFloor(lambda.clone());
    let sim = simulate(&ball, k, &strategy, &budget, trigger_round + 2)?;
    Ok(SurroundReport {
        group: model.clone(),
        k,
        lambda: lambda.clone(),
        trigger_round,
        sphere,
        ball_size: ball.len(),
        strategy,
        verdict: sim.verdict,
        table,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeDepth {
    pub depth: u32,
    pub feasible: bool,
    /// Number of cut vertices in the witness, when feasible.
    pub cut_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeRow {
    pub round: u32,
    /// `F(n) = f_1 + … + f_n`.
    pub cumulative_budget: u64,
    /// `|S(n+1)|`.
    pub next_sphere: u64,
    /// `|S(k+n)|`, the sphere the fire reaches in round `n`.
    pub fire_sphere: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub group: GroupModel,
    pub budget: BudgetSequence,
    pub k: u32,
    pub depths: Vec<ProbeDepth>,
    pub table: Vec<ProbeRow>,
    pub note: &'static str,
}

impl ProbeReport {
    pub fn infeasible_everywhere(&self) -> bool {
        self.depths.iter().all(|d| !d.feasible)
    }
}

const PROBE_NOTE: &str = "finite-depth evidence only: infeasibility on the lex-min spanning tree is carried over \
    to the Cayley graph through the unproven claim that containment passes to every subgraph";

/// Cut-deadline feasibility on the lex-min tree of `B(D)` for each depth
/// `k+1..=D`, with `F(n)` against sphere sizes.
pub fn polynomial_probe(model: &GroupModel, budget: &BudgetSequence, k: u32, depth: u32, cap: usize) -> Result<ProbeReport> {
    let ball = CayleyBall::build(model, depth, cap)?;
    let trunc = expand_with_cap(&ball.lex_min_tree(), depth, cap)?;
    let mut depths = vec![];
    for d in k + 1..=depth {
        let decision = feasibility_on_truncation(&trunc.prefix(d), k, budget);
        let cut_size = match &decision {
            Decision::Feasible { witness: CutWitness::Vertices(v) } => Some(v.len()),
            _ => None,
        };
        depths.push(ProbeDepth { depth: d, feasible: decision.is_feasible(), cut_size });
    }
    let spheres = ball.sphere_sizes();
    let cumulative = budget.cumulative(depth.saturating_sub(k));
    let table = (1..=depth.saturating_sub(k))
        .map(|n| ProbeRow {
            round: n,
            cumulative_budget: cumulative[n as usize],
            next_sphere: spheres[n as usize + 1] as u64,
            fire_sphere: spheres.get((k + n) as usize).map(|&s| s as u64),
        })
        .collect();
    Ok(ProbeReport { group: model.clone(), budget: budget.clone(), k, depths, table, note: PROBE_NOTE })
}

/// The periodic tree the free group's lex-min spanning tree unfolds into.
pub fn free_group_tree(rank: u32) -> Option<TreeSpec> {
    GroupModel::Free { rank }.spanning_tree_spec()
}
