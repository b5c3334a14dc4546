//! The firefighter game on infinite trees and Cayley graphs.
//!
//! Trees are described finitely (periodic automata, spherically symmetric
//! level sequences, explicit finite trees) and expanded into depth-`D`
//! truncations. On those the crate computes branching numbers through
//! cutsets and flows, synthesises cut-based containment strategies for
//! budgets `⌊λⁿ⌋` above the branching number, certifies non-containment
//! below it, and checks everything against exhaustive search on small trees.

pub mod branching;
pub mod cayley;
pub mod error;
pub mod game;
pub mod oracle;
pub mod par;
pub mod rate;
pub mod tree_model;

pub use error::{Error, Fault, Result};
pub use par::Exec;
pub use rate::{Rate, Weight};
pub use tree_model::{expand, expand_with_cap, ExplicitSpec, PeriodicSpec, TreeSpec, Truncation, VertexId};

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
