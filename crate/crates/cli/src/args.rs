use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use firefight::game::BudgetSequence;
use firefight::oracle::SearchMode;
use firefight::Rate;

/// Firefighter containment on infinite trees and Cayley graphs.
#[derive(Debug, Parser, Serialize)]
#[command(name = "firefight", version)]
pub struct Cli {
    /// Largest number of vertices any truncation or ball may have.
    #[arg(long, env = "FIREFIGHT_VERTEX_CAP", default_value_t = firefight::tree_model::DEFAULT_VERTEX_CAP, global = true)]
    pub vertex_cap: usize,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Also write the report's main table as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,

    /// Run sweeps on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Branching number: exact value for periodic specs and a cut-recursion bracket.
    Br(BrArgs),
    /// Containment at rate λ: a synthesized strategy above br, a certificate below.
    Contain(ContainArgs),
    /// Play a strategy on a truncation.
    Simulate(SimulateArgs),
    /// Exhaustive search on one small instance, or the three-way check on a random corpus.
    Oracle(OracleArgs),
    /// Balls, spanning trees, growth and strategies on Cayley graphs.
    Cayley(CayleyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BrArgs {
    pub spec: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    /// Iterations of the cut recursion per probe.
    #[arg(long, default_value_t = 100_000)]
    pub depth_max: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct ContainArgs {
    pub spec: PathBuf,
    #[arg(long)]
    pub lambda: Rate,
    /// Radius of the initial fire.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Deepest truncation searched for a light cutset.
    #[arg(long, default_value_t = 16)]
    pub depth_max: u32,
    /// Number of depths past the fire checked for infeasibility below br.
    #[arg(long, default_value_t = 20)]
    pub depths: u32,
}

#[derive(Debug, Args, Serialize)]
#[group(id = "strategy_source", required = true, multiple = false)]
pub struct StrategySource {
    /// JSON strategy file.
    #[arg(long)]
    pub strategy: Option<PathBuf>,
    /// Canonical strategy on these target vertices.
    #[arg(long, value_delimiter = ',')]
    pub canonical: Option<Vec<usize>>,
    /// Fixed schedule, e.g. `1:3,4;2:9`.
    #[arg(long)]
    pub schedule: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    pub spec: PathBuf,
    #[arg(long)]
    pub depth: u32,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// `const:c`, `exp:λ`, `poly:c,d` or `list:a,b,…`.
    #[arg(long)]
    pub budget: BudgetSequence,
    #[arg(long)]
    pub horizon: Option<u32>,
    #[command(flatten)]
    pub source: StrategySource,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Strict,
    Threatened,
    Frontier,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => SearchMode::Strict,
            ModeArg::Threatened => SearchMode::Threatened,
            ModeArg::Frontier => SearchMode::Frontier,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Tree spec for a single instance; omit with `--corpus`.
    #[arg(required_unless_present = "corpus")]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub depth: u32,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    #[arg(long, default_value = "const:1")]
    pub budget: BudgetSequence,
    #[arg(long)]
    pub horizon: Option<u32>,
    #[arg(long, value_enum, default_value_t = ModeArg::Frontier)]
    pub mode: ModeArg,
    /// Plain-text result cache.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Size of a random corpus of explicit trees to cross-check.
    #[arg(long, conflicts_with = "spec")]
    pub corpus: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Most vertices outside the initial fire in a corpus tree.
    #[arg(long, default_value_t = 10)]
    pub max_outside: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CayleyMode {
    Growth,
    Ball,
    Tree,
    Surround,
    Polyprobe,
}

#[derive(Debug, Args, Serialize)]
pub struct CayleyArgs {
    /// `free:r`, `zd:d`, `dinf` or `freeprod:m1,m2,…`.
    pub group: String,
    /// Ball radius (or probe depth).
    #[arg(long = "R", alias = "radius")]
    pub radius: Option<u32>,
    #[arg(long, value_enum, default_value_t = CayleyMode::Growth)]
    pub mode: CayleyMode,
    #[arg(long)]
    pub lambda: Option<Rate>,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Polynomial budget coefficient.
    #[arg(long, default_value = "1")]
    pub c: Rate,
    /// Polynomial budget degree.
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    /// Replace the polynomial budget with any budget sequence.
    #[arg(long)]
    pub budget: Option<BudgetSequence>,
    /// Write the lex-min spanning tree as a tree spec (tree mode).
    #[arg(long)]
    pub export: Option<PathBuf>,
}
