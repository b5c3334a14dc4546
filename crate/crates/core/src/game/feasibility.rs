//! Deadline feasibility of vertex cuts.
//!
//! With the fire started on `B_r(k)`, a vertex at level `n` burns in round
//! `n - k` unless it was protected in an earlier or the same round. So a cut
//! `V'` (one vertex on every path from the root to an open leaf, all at
//! levels `> k`) can be played in time iff for every level `n`
//!
//! ```text
//! |{v ∈ V' : |v| ≤ n}| ≤ F(n - k) = f_1 + … + f_{n-k}
//! ```
//!
//! and the earliest-deadline order (closest to the root first) then plays it.
//! General trees are decided by a bottom-up dynamic program over Pareto-minimal
//! cumulative level profiles. Level-symmetric trees use a greedy that cuts as
//! many surviving vertices as the budget allows on every level, which is
//! optimal there and needs only the level counts.

use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::Result;
use crate::game::BudgetSequence;
use crate::tree_model::{expand, TreeSpec, Truncation, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutWitness {
    Vertices(Vec<VertexId>),
    /// `(level, number of cut vertices)` for trees too large to list.
    LevelCounts(#[serde(serialize_with = "crate::rate::serialize_level_counts")] Vec<(u32, BigUint)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Decision {
    Feasible { witness: CutWitness },
    Infeasible { depth: u32 },
}

impl Decision {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Decision::Feasible { .. })
    }

    pub fn witness_vertices(&self) -> Option<&[VertexId]> {
        match self {
            Decision::Feasible { witness: CutWitness::Vertices(v) } => Some(v),
            _ => None,
        }
    }
}

/// Decides whether a cut within levels `k+1..=depth` meets every deadline.
pub fn feasibility_check(spec: &TreeSpec, k: u32, budget: &BudgetSequence, depth: u32) -> Result<Decision> {
    if depth <= k && spec.is_infinite() {
        return Ok(Decision::Infeasible { depth });
    }
    if depth <= k {
        return Ok(feasibility_on_truncation(&expand(spec, depth)?, k, budget));
    }
    if let Some(counts) = symmetric_child_counts(spec, depth) {
        return Ok(greedy_counts(&counts, k, budget, depth));
    }
    let trunc = expand(spec, depth)?;
    Ok(feasibility_on_truncation(&trunc, k, budget))
}

/// Same decision on an already expanded truncation.
pub fn feasibility_on_truncation(trunc: &Truncation, k: u32, budget: &BudgetSequence) -> Decision {
    if trunc.is_level_symmetric() {
        feasibility_greedy(trunc, k, budget)
    } else {
        feasibility_dp(trunc, k, budget)
    }
}

/// Per-level child counts `d_0..=d_depth` when every vertex of a level has the
/// same number of children.
fn symmetric_child_counts(spec: &TreeSpec, depth: u32) -> Option<Vec<u32>> {
    let p = spec.to_periodic()?;
    let mut states = vec![p.root()];
    let mut counts = Vec::with_capacity(depth as usize + 1);
    for level in 0..=depth {
        let d = p.children(states[0]).len();
        if states.iter().any(|&s| p.children(s).len() != d) {
            return None;
        }
        counts.push(d as u32);
        if level < depth {
            let mut next: Vec<usize> = states.iter().flat_map(|&s| p.children(s).iter().copied()).collect();
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                counts.resize(depth as usize + 1, 0);
                return Some(counts);
            }
            states = next;
        }
    }
    Some(counts)
}

fn greedy_counts(child_counts: &[u32], k: u32, budget: &BudgetSequence, depth: u32) -> Decision {
    let caps = budget.cumulative_big(depth - k);
    let mut survivors = BigUint::from(1u32);
    let mut used = BigUint::zero();
    let mut cuts = vec![];
    for level in 0..=depth {
        let d = child_counts[level as usize];
        if survivors.is_zero() {
            break;
        }
        let closed = d == 0 && level < depth;
        if level > k && !closed {
            let cap = &caps[(level - k) as usize];
            let room = if *cap > used { cap - &used } else { BigUint::zero() };
            let x = if room < survivors { room } else { survivors.clone() };
            if !x.is_zero() {
                survivors -= &x;
                used += &x;
                cuts.push((level, x));
            }
        }
        if level == depth {
            let open = d > 0;
            if open && !survivors.is_zero() {
                return Decision::Infeasible { depth };
            }
        } else {
            survivors *= BigUint::from(d);
        }
    }
    Decision::Feasible { witness: CutWitness::LevelCounts(cuts) }
}

/// The level-by-level greedy on an explicit, level-symmetric truncation.
pub fn feasibility_greedy(trunc: &Truncation, k: u32, budget: &BudgetSequence) -> Decision {
    let depth = trunc.depth();
    if depth <= k {
        return inside_fire(trunc);
    }
    let caps = budget.cumulative(depth - k);
    let mut alive = vec![false; trunc.len()];
    alive[0] = true;
    let mut used = 0u64;
    let mut cut = vec![];
    for level in 0..=depth {
        let layer = trunc.vertices_at(level);
        let needs_cut = |v: VertexId| !trunc.is_leaf(v) || trunc.is_open(v);
        if level > k {
            let mut room = caps[(level - k) as usize].saturating_sub(used);
            for v in layer.clone() {
                if room == 0 {
                    break;
                }
                if alive[v] && needs_cut(v) {
                    alive[v] = false;
                    cut.push(v);
                    used += 1;
                    room -= 1;
                }
            }
        }
        for v in layer {
            if alive[v] {
                if trunc.is_open(v) {
                    return Decision::Infeasible { depth };
                }
                trunc.children(v).for_each(|w| alive[w] = true);
            }
        }
    }
    Decision::Feasible { witness: CutWitness::Vertices(cut) }
}

/// With the whole truncation on fire, the game is won iff nothing escapes.
fn inside_fire(trunc: &Truncation) -> Decision {
    if trunc.open_leaves().next().is_none() {
        Decision::Feasible { witness: CutWitness::Vertices(vec![]) }
    } else {
        Decision::Infeasible { depth: trunc.depth() }
    }
}

enum Picks {
    Empty,
    Cut(VertexId),
    Join(Rc<Picks>, Rc<Picks>),
}

impl Picks {
    fn collect(&self, out: &mut Vec<VertexId>) {
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            match p {
                Picks::Empty => {}
                Picks::Cut(v) => out.push(*v),
                Picks::Join(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
    }
}

/// Cumulative level counts of a partial cut over the window `k+1..=depth`.
struct Profile {
    cum: Vec<u64>,
    picks: Rc<Picks>,
}

fn dominates(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn pareto(mut items: Vec<Profile>) -> Vec<Profile> {
    items.sort_by(|a, b| a.cum.iter().sum::<u64>().cmp(&b.cum.iter().sum::<u64>()).then_with(|| a.cum.cmp(&b.cum)));
    let mut kept: Vec<Profile> = Vec::with_capacity(items.len());
    for p in items {
        if !kept.iter().any(|q| dominates(&q.cum, &p.cum)) {
            kept.push(p);
        }
    }
    kept
}

/// The Pareto-profile dynamic program; exact on any truncation.
pub fn feasibility_dp(trunc: &Truncation, k: u32, budget: &BudgetSequence) -> Decision {
    let depth = trunc.depth();
    if depth <= k {
        return inside_fire(trunc);
    }
    let width = (depth - k) as usize;
    let caps: Vec<u64> = budget.cumulative(depth - k)[1..].to_vec();
    let within = |cum: &[u64]| cum.iter().zip(&caps).all(|(c, cap)| c <= cap);
    let unit = |level: u32| -> Vec<u64> {
        let start = (level - k - 1) as usize;
        (0..width).map(|i| u64::from(i >= start)).collect()
    };

    let mut sets: Vec<Option<Vec<Profile>>> = (0..trunc.len()).map(|_| None).collect();
    for v in (0..trunc.len()).rev() {
        let level = trunc.level(v);
        let mut acc = if trunc.is_open(v) {
            vec![]
        } else {
            vec![Profile { cum: vec![0; width], picks: Rc::new(Picks::Empty) }]
        };
        for w in trunc.children(v) {
            let child = sets[w].take().expect("children are processed first");
            let mut merged = Vec::with_capacity(acc.len() * child.len());
            for a in &acc {
                for b in &child {
                    let cum: Vec<u64> = a.cum.iter().zip(&b.cum).map(|(x, y)| x + y).collect();
                    if within(&cum) {
                        merged.push(Profile { cum, picks: Rc::new(Picks::Join(a.picks.clone(), b.picks.clone())) });
                    }
                }
            }
            acc = pareto(merged);
            if acc.is_empty() {
                break;
            }
        }
        if v != trunc.root() && level > k {
            let cum = unit(level);
            if within(&cum) {
                acc.push(Profile { cum, picks: Rc::new(Picks::Cut(v)) });
                acc = pareto(acc);
            }
        }
        if acc.is_empty() && level <= k {
            // nothing above this vertex can be cut either
            return Decision::Infeasible { depth };
        }
        sets[v] = Some(acc);
    }
    let root = sets[0].take().unwrap_or_default();
    match root.first() {
        Some(best) => {
            let mut cut = vec![];
            best.picks.collect(&mut cut);
            cut.sort_unstable();
            Decision::Feasible { witness: CutWitness::Vertices(cut) }
        }
        None => Decision::Infeasible { depth },
    }
}

/// Checks a vertex cut against the deadline constraints and the cut property.
pub fn cut_meets_deadlines(trunc: &Truncation, k: u32, budget: &BudgetSequence, cut: &[VertexId]) -> bool {
    let depth = trunc.depth();
    if cut.iter().any(|&v| v >= trunc.len() || trunc.level(v) <= k) {
        return false;
    }
    if depth <= k {
        return trunc.open_leaves().next().is_none();
    }
    let caps = budget.cumulative(depth - k);
    let mut per_level = vec![0u64; depth as usize + 1];
    cut.iter().for_each(|&v| per_level[trunc.level(v) as usize] += 1);
    let mut cum = 0;
    for level in k + 1..=depth {
        cum += per_level[level as usize];
        if cum > caps[(level - k) as usize] {
            return false;
        }
    }
    let mut is_cut = vec![false; trunc.len()];
    cut.iter().for_each(|&v| is_cut[v] = true);
    trunc.open_leaves().all(|leaf| {
        let mut v = leaf;
        loop {
            if is_cut[v] {
                return true;
            }
            match trunc.parent(v) {
                Some(p) => v = p,
                None => return false,
            }
        }
    })
}
