//! The firefighter game: budgets, rules, strategies, the deadline decision
//! for cut strategies and cut-based strategy synthesis.

mod budget;
mod engine;
pub mod feasibility;
pub mod synthesis;

pub use budget::BudgetSequence;
pub use engine::{
    simulate, simulate_from, step, Arena, GameState, RoundRecord, Simulation, Status, StepOutcome, Strategy, Trace,
    Verdict,
};
pub use feasibility::{feasibility_check, feasibility_on_truncation, CutWitness, Decision};
pub use synthesis::{synthesize_cutset_strategy, CutsetPlan};
