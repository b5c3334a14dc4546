use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Fault, Result};
use crate::game::BudgetSequence;
use crate::rate::Rate;
use crate::tree_model::{Truncation, VertexId};

/// A finite graph the game can be played on.
pub trait Arena: Sync {
    fn vertex_count(&self) -> usize;
    fn for_each_neighbor(&self, v: VertexId, f: &mut dyn FnMut(VertexId));
    /// Distance from the root (tree level or word length).
    fn distance(&self, v: VertexId) -> u32;
    /// Fire reaching an escape vertex has left the finite window.
    fn is_escape(&self, v: VertexId) -> bool;
}

impl Arena for Truncation {
    fn vertex_count(&self) -> usize {
        self.len()
    }

    fn for_each_neighbor(&self, v: VertexId, f: &mut dyn FnMut(VertexId)) {
        if let Some(p) = self.parent(v) {
            f(p);
        }
        self.children(v).for_each(f);
    }

    fn distance(&self, v: VertexId) -> u32 {
        self.level(v)
    }

    fn is_escape(&self, v: VertexId) -> bool {
        self.is_open(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Untouched,
    Burning,
    Protected,
}

/// Vertex statuses after some number of rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    status: Vec<Status>,
    round: u32,
    /// Vertices that caught fire most recently; only they can spread.
    active: Vec<VertexId>,
    burning: usize,
}

impl GameState {
    pub fn new(arena: &dyn Arena, initial_fire: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        let n = arena.vertex_count();
        let mut status = vec![Status::Untouched; n];
        let mut active = vec![];
        for v in initial_fire {
            if v >= n {
                return Err(Error::StrategyFault { round: 0, fault: Fault::UnknownVertex(v) });
            }
            if status[v] == Status::Untouched {
                status[v] = Status::Burning;
                active.push(v);
            }
        }
        let burning = active.len();
        Ok(GameState { status, round: 0, active, burning })
    }

    pub fn status(&self, v: VertexId) -> Status {
        self.status[v]
    }

    /// Number of rounds played so far.
    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn burning_count(&self) -> usize {
        self.burning
    }

    pub fn burning(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.status.len()).filter(move |&v| self.status[v] == Status::Burning)
    }

    pub fn protected(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.status.len()).filter(move |&v| self.status[v] == Status::Protected)
    }

    /// Untouched vertices adjacent to the fire, in increasing id order.
    pub fn frontier(&self, arena: &dyn Arena) -> Vec<VertexId> {
        let mut out = vec![];
        for &v in &self.active {
            arena.for_each_neighbor(v, &mut |u| {
                if self.status[u] == Status::Untouched {
                    out.push(u);
                }
            });
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Result of one round.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: GameState,
    pub newly_burning: Vec<VertexId>,
}

/// Plays one round: protect, then spread.
pub fn step(arena: &dyn Arena, state: &GameState, protect: &[VertexId], budget: u64) -> Result<StepOutcome> {
    let round = state.round + 1;
    let fault = |fault| Error::StrategyFault { round, fault };
    if protect.len() as u64 > budget {
        return Err(fault(Fault::OverBudget { size: protect.len(), budget }));
    }
    let mut next = state.clone();
    for &v in protect {
        match next.status.get(v) {
            None => return Err(fault(Fault::UnknownVertex(v))),
            Some(Status::Burning) => return Err(fault(Fault::ProtectBurning(v))),
            Some(_) => next.status[v] = Status::Protected,
        }
    }
    let mut newly = vec![];
    for &v in &state.active {
        arena.for_each_neighbor(v, &mut |u| {
            if next.status[u] == Status::Untouched {
                next.status[u] = Status::Burning;
                newly.push(u);
            }
        });
    }
    newly.sort_unstable();
    next.burning += newly.len();
    next.active = newly.clone();
    next.round = round;
    Ok(StepOutcome { state: next, newly_burning: newly })
}

/// How protect-sets are chosen each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Strategy {
    /// Fixed sets per round.
    Schedule { rounds: BTreeMap<u32, Vec<VertexId>> },
    /// Each round, the `f_n` vertices of the target set closest to the root
    /// that are neither burning nor protected.
    Canonical { targets: Vec<VertexId> },
    /// Cut vertices grouped by level; level `n` is played in round `n - offset`.
    Cutset { by_level: BTreeMap<u32, Vec<VertexId>>, offset: u32 },
    /// Nothing until `trigger_round`, then the whole sphere at `sphere`.
    WaitAndSurround { lambda: Rate, trigger_round: u32, sphere: u32 },
}

impl Strategy {
    pub fn canonical(targets: impl IntoIterator<Item = VertexId>) -> Self {
        Strategy::Canonical { targets: targets.into_iter().collect() }
    }

    pub fn schedule(rounds: impl IntoIterator<Item = (u32, Vec<VertexId>)>) -> Self {
        Strategy::Schedule { rounds: rounds.into_iter().collect() }
    }

    /// Vertices this strategy plays in `round`, given the set level by level.
    pub fn cutset_round(&self, round: u32) -> Option<&[VertexId]> {
        match self {
            Strategy::Cutset { by_level, offset } => by_level.get(&(round + offset)).map(Vec::as_slice),
            _ => None,
        }
    }
}

/// A strategy prepared against a particular arena.
enum Player<'a> {
    Fixed(BTreeMap<u32, Vec<VertexId>>),
    Canonical(Vec<VertexId>),
    Borrowed(&'a BTreeMap<u32, Vec<VertexId>>, u32),
}

impl<'a> Player<'a> {
    fn new(arena: &dyn Arena, strategy: &'a Strategy) -> Self {
        match strategy {
            Strategy::Schedule { rounds } => Player::Borrowed(rounds, 0),
            Strategy::Cutset { by_level, offset } => Player::Borrowed(by_level, *offset),
            Strategy::Canonical { targets } => {
                let mut order = targets.clone();
                order.sort_by_key(|&v| (arena.distance(v), v));
                order.dedup();
                Player::Canonical(order)
            }
            Strategy::WaitAndSurround { trigger_round, sphere, .. } => {
                let ring = (0..arena.vertex_count()).filter(|&v| arena.distance(v) == *sphere).collect();
                Player::Fixed(BTreeMap::from([(*trigger_round, ring)]))
            }
        }
    }

    fn choose(&self, state: &GameState, round: u32, budget: u64) -> Vec<VertexId> {
        match self {
            Player::Fixed(map) => map.get(&round).cloned().unwrap_or_default(),
            Player::Borrowed(map, offset) => map.get(&(round + offset)).cloned().unwrap_or_default(),
            Player::Canonical(order) => order
                .iter()
                .copied()
                .filter(|&v| v < state.status.len() && state.status[v] == Status::Untouched)
                .take(usize::try_from(budget).unwrap_or(usize::MAX))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// `round` is the first round without new burning vertices; `burned` is
    /// the size of the final fire.
    Contained { round: u32, burned: usize },
    /// Fire reached an escape vertex: inconclusive at this depth.
    BoundaryReached { round: u32 },
    EscapedHorizon { horizon: u32 },
}

impl Verdict {
    pub fn is_contained(&self) -> bool {
        matches!(self, Verdict::Contained { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub budget: u64,
    pub protected: Vec<VertexId>,
    pub burned: Vec<VertexId>,
}

/// Per-round log of a simulation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub initial_fire: Vec<VertexId>,
    pub rounds: Vec<RoundRecord>,
}

impl Trace {
    /// Replays the protect-sets of this trace as a schedule.
    pub fn to_schedule(&self) -> Strategy {
        Strategy::schedule(self.rounds.iter().filter(|r| !r.protected.is_empty()).map(|r| (r.round, r.protected.clone())))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Simulation {
    pub verdict: Verdict,
    pub trace: Trace,
}

/// Plays `strategy` from the initial fire `B_r(k)`.
pub fn simulate(
    arena: &dyn Arena,
    k: u32,
    strategy: &Strategy,
    budget: &BudgetSequence,
    horizon: u32,
) -> Result<Simulation> {
    let fire: Vec<VertexId> = (0..arena.vertex_count()).filter(|&v| arena.distance(v) <= k).collect();
    simulate_from(arena, &fire, strategy, budget, horizon)
}

/// Plays `strategy` from an arbitrary initial fire.
pub fn simulate_from(
    arena: &dyn Arena,
    initial_fire: &[VertexId],
    strategy: &Strategy,
    budget: &BudgetSequence,
    horizon: u32,
) -> Result<Simulation> {
    let mut state = GameState::new(arena, initial_fire.iter().copied())?;
    let mut trace = Trace { initial_fire: state.burning().collect(), rounds: vec![] };
    if trace.initial_fire.iter().any(|&v| arena.is_escape(v)) {
        return Ok(Simulation { verdict: Verdict::BoundaryReached { round: 0 }, trace });
    }
    let player = Player::new(arena, strategy);
    for round in 1..=horizon {
        let f = budget.value(round);
        let protect = player.choose(&state, round, f);
        let out = step(arena, &state, &protect, f)?;
        state = out.state;
        let escaped = out.newly_burning.iter().any(|&v| arena.is_escape(v));
        let quiet = out.newly_burning.is_empty();
        trace.rounds.push(RoundRecord { round, budget: f, protected: protect, burned: out.newly_burning });
        if escaped {
            return Ok(Simulation { verdict: Verdict::BoundaryReached { round }, trace });
        }
        if quiet {
            let verdict = Verdict::Contained { round, burned: state.burning_count() };
            return Ok(Simulation { verdict, trace });
        }
    }
    Ok(Simulation { verdict: Verdict::EscapedHorizon { horizon }, trace })
}
