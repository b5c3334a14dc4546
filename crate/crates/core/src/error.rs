use thiserror::Error;

use crate::tree_model::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tree spec: {0}")]
    Spec(String),

    #[error("failed to parse tree spec: {0}")]
    Parse(String),

    #[error("vertex cap exceeded: more than {cap} vertices requested")]
    VertexCap { cap: usize },

    #[error("radius {radius} exceeds truncation depth {depth}")]
    RadiusOutOfRange { radius: u32, depth: u32 },

    #[error("invalid cutset: {0}")]
    InvalidCutset(String),

    #[error("invalid rate: {0}")]
    InvalidRate(String),

    #[error("rate {lambda} is not below the branching number {br}")]
    RateNotBelowBranching { lambda: f64, br: f64 },

    #[error("rate {lambda} is not above the branching number {br}")]
    RateNotAboveBranching { lambda: f64, br: f64 },

    #[error("no cutset lighter than {epsilon:e} found up to depth {depth_max}")]
    NoLightCutset { epsilon: f64, depth_max: u32 },

    #[error("strategy fault in round {round}: {fault}")]
    StrategyFault { round: u32, fault: Fault },

    #[error("instance too large for exhaustive search: {0}")]
    SearchTooLarge(String),

    #[error("wait-and-surround never triggered within radius {radius}: {trace}")]
    NoTrigger { radius: u32, trace: String },

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("unknown group {0:?}")]
    UnknownGroup(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// The ways a strategy can break the rules of a round.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Fault {
    #[error("vertex {0} is already burning")]
    ProtectBurning(VertexId),
    #[error("protect set of size {size} exceeds budget {budget}")]
    OverBudget { size: usize, budget: u64 },
    #[error("vertex {0} does not exist")]
    UnknownVertex(VertexId),
}
