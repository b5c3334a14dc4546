//! Brute-force ground truth for small instances.
//!
//! [`brute_force_containment`] searches every sequence of protect-sets, with
//! a transposition table keyed on the vertex statuses and the round. Leaves
//! that stand for an infinite continuation (open leaves) lose the game when
//! they catch fire. [`enumerate_cutsets`] lists every minimal cutset.
//! Neither shares code with the polynomial-time routines they check.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::branching::Cutset;
use crate::error::{Error, Result};
use crate::game::{feasibility_on_truncation, simulate, BudgetSequence, Strategy};
use crate::par::Exec;
use crate::tree_model::{expand, ExplicitSpec, TreeSpec, Truncation, VertexId};

/// Which protect-sets the search tries each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Every set of untouched vertices (of the largest affordable size).
    Strict,
    /// Sets of untouched vertices the fire can still reach.
    Threatened,
    /// Sets of vertices adjacent to the fire. Used only when the fire is a
    /// connected subtree; otherwise the search falls back to `Threatened`.
    Frontier,
}

/// Largest tree the search handles (statuses are packed into `u128`).
pub const MAX_SEARCH_VERTICES: usize = 128;
/// Largest number of untouched vertices accepted in strict mode.
pub const MAX_STRICT_UNTOUCHED: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleDecision {
    Feasible { schedule: BTreeMap<u32, Vec<VertexId>> },
    Infeasible,
}

impl OracleDecision {
    pub fn is_feasible(&self) -> bool {
        matches!(self, OracleDecision::Feasible { .. })
    }

    pub fn schedule(&self) -> Option<Strategy> {
        match self {
            OracleDecision::Feasible { schedule } => Some(Strategy::Schedule { rounds: schedule.clone() }),
            OracleDecision::Infeasible => None,
        }
    }
}

enum Moves {
    Done,
    Then(u32, u128, Rc<Moves>),
}

struct Search<'a> {
    nbr: Vec<u128>,
    escape: u128,
    budget: &'a BudgetSequence,
    horizon: u32,
    mode: SearchMode,
    stable_from: Option<u32>,
    memo: HashMap<(u128, u128, u32), Option<Rc<Moves>>>,
}

fn bits(mask: u128) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(i)
    })
}

/// Calls `f` on every subset of `mask` with exactly `size` elements until it
/// returns `true`.
fn any_subset(mask: u128, size: usize, f: &mut dyn FnMut(u128) -> bool) -> bool {
    fn rec(items: &[usize], size: usize, acc: u128, f: &mut dyn FnMut(u128) -> bool) -> bool {
        if size == 0 {
            return f(acc);
        }
        if items.len() < size {
            return false;
        }
        rec(&items[1..], size - 1, acc | (1u128 << items[0]), f) || rec(&items[1..], size, acc, f)
    }
    let items: Vec<usize> = bits(mask).collect();
    rec(&items, size, 0, f)
}

impl Search<'_> {
    fn neighbours(&self, set: u128) -> u128 {
        bits(set).fold(0, |acc, v| acc | self.nbr[v])
    }

    fn threatened(&self, burning: u128, protected: u128) -> u128 {
        let free = !burning & !protected;
        let mut reach = self.neighbours(burning) & free;
        loop {
            let next = reach | (self.neighbours(reach) & free);
            if next == reach {
                return reach;
            }
            reach = next;
        }
    }

    fn key_round(&self, round: u32) -> u32 {
        let quiet = self.horizon >= round.saturating_add(self.nbr.len() as u32 + 1);
        match self.stable_from {
            Some(s) if round >= s && quiet => s,
            _ => round,
        }
    }

    fn run(&mut self, burning: u128, protected: u128, round: u32) -> Option<Rc<Moves>> {
        let key = (burning, protected, self.key_round(round));
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let result = self.expand(burning, protected, round);
        self.memo.insert(key, result.clone());
        result
    }

    fn expand(&mut self, burning: u128, protected: u128, round: u32) -> Option<Rc<Moves>> {
        let frontier = self.neighbours(burning) & !burning & !protected;
        if frontier == 0 {
            return Some(Rc::new(Moves::Done));
        }
        if round > self.horizon {
            return None;
        }
        let budget = self.budget.value(round);
        if budget >= u64::from(frontier.count_ones()) {
            return Some(Rc::new(Moves::Then(round, frontier, Rc::new(Moves::Done))));
        }
        let candidates = match self.mode {
            SearchMode::Frontier => frontier,
            SearchMode::Threatened => self.threatened(burning, protected),
            SearchMode::Strict => !burning & !protected & self.all_mask(),
        };
        let size = (budget as usize).min(candidates.count_ones() as usize);
        let mut found = None;
        any_subset(candidates, size, &mut |protect| {
            let spread = frontier & !protect;
            if spread & self.escape != 0 {
                return false;
            }
            if let Some(rest) = self.run(burning | spread, protected | protect, round + 1) {
                found = Some(Rc::new(Moves::Then(round, protect, rest)));
                return true;
            }
            false
        });
        found
    }

    fn all_mask(&self) -> u128 {
        if self.nbr.len() == 128 {
            u128::MAX
        } else {
            (1u128 << self.nbr.len()) - 1
        }
    }
}

/// Exact existence of a containment strategy from `initial_fire`.
pub fn brute_force_containment(
    trunc: &Truncation,
    initial_fire: &[VertexId],
    budget: &BudgetSequence,
    horizon: u32,
    mode: SearchMode,
) -> Result<OracleDecision> {
    let n = trunc.len();
    if n > MAX_SEARCH_VERTICES {
        return Err(Error::SearchTooLarge(format!("{n} vertices (limit {MAX_SEARCH_VERTICES})")));
    }
    let mut burning = 0u128;
    for &v in initial_fire {
        if v >= n {
            return Err(Error::SearchTooLarge(format!("vertex {v} out of range")));
        }
        burning |= 1 << v;
    }
    if mode == SearchMode::Strict {
        let untouched = n - burning.count_ones() as usize;
        if untouched > MAX_STRICT_UNTOUCHED {
            return Err(Error::SearchTooLarge(format!(
                "{untouched} untouched vertices (strict limit {MAX_STRICT_UNTOUCHED})"
            )));
        }
    }
    let nbr: Vec<u128> = (0..n)
        .map(|v| {
            let mut m = 0u128;
            if let Some(p) = trunc.parent(v) {
                m |= 1 << p;
            }
            trunc.children(v).for_each(|c| m |= 1 << c);
            m
        })
        .collect();
    let escape = trunc.open_leaves().fold(0u128, |m, v| m | (1 << v));
    if burning & escape != 0 {
        return Ok(OracleDecision::Infeasible);
    }
    let connected = bits(burning).filter(|&v| trunc.parent(v).is_none_or(|p| burning & (1 << p) == 0)).count() <= 1;
    let mode = if mode == SearchMode::Frontier && !connected { SearchMode::Threatened } else { mode };
    let mut search = Search {
        nbr,
        escape,
        budget,
        horizon,
        mode,
        stable_from: budget.stabilisation_round(),
        memo: HashMap::new(),
    };
    Ok(match search.run(burning, 0, 1) {
        None => OracleDecision::Infeasible,
        Some(moves) => {
            let mut schedule = BTreeMap::new();
            let mut cur = moves;
            while let Moves::Then(round, set, rest) = &*cur {
                schedule.insert(*round, bits(*set).collect());
                cur = rest.clone();
            }
            OracleDecision::Feasible { schedule }
        }
    })
}

/// Every minimal cutset separating the root from the open leaves, each once.
pub fn enumerate_cutsets(trunc: &Truncation, max_edges: usize) -> Result<Vec<Cutset>> {
    if trunc.len().saturating_sub(1) > max_edges {
        return Err(Error::SearchTooLarge(format!("{} edges (limit {max_edges})", trunc.len() - 1)));
    }
    let root = trunc.root();
    Ok(vertex_cut_options(trunc, root, 0).into_iter().map(Cutset::new).collect())
}

/// Every minimal vertex cut of the open leaves using only levels `> k`.
pub fn enumerate_vertex_cuts(trunc: &Truncation, k: u32, max_vertices: usize) -> Result<Vec<Vec<VertexId>>> {
    if trunc.len() > max_vertices {
        return Err(Error::SearchTooLarge(format!("{} vertices (limit {max_vertices})", trunc.len())));
    }
    Ok(vertex_cut_options(trunc, trunc.root(), k))
}

/// Minimal ways to cut every open leaf below `v` using vertices at levels
/// `> k` (never the root).
fn vertex_cut_options(trunc: &Truncation, v: VertexId, k: u32) -> Vec<Vec<VertexId>> {
    let has_open = |v: VertexId| -> bool {
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if trunc.is_open(u) {
                return true;
            }
            stack.extend(trunc.children(u));
        }
        false
    };
    if !has_open(v) {
        return vec![vec![]];
    }
    let cuttable = v != trunc.root() && trunc.level(v) > k;
    let mut options = vec![];
    if cuttable {
        options.push(vec![v]);
    }
    if !trunc.is_open(v) {
        let mut combos: Vec<Vec<VertexId>> = vec![vec![]];
        for w in trunc.children(v) {
            let child = vertex_cut_options(trunc, w, k);
            combos = combos
                .iter()
                .flat_map(|a| child.iter().map(move |b| a.iter().chain(b).copied().collect()))
                .collect();
            if combos.is_empty() {
                break;
            }
        }
        options.extend(combos);
    }
    options
}

/// A random recursive tree with `n` vertices; each leaf is closed with
/// probability `closed_prob`.
pub fn random_explicit_tree(rng: &mut impl Rng, n: usize, closed_prob: f64) -> ExplicitSpec {
    let parents: Vec<usize> = (1..n).map(|i| rng.gen_range(0..i)).collect();
    let mut has_child = vec![false; n];
    parents.iter().for_each(|&p| has_child[p] = true);
    let closed: Vec<usize> = (1..n).filter(|&v| !has_child[v] && rng.gen_bool(closed_prob)).collect();
    ExplicitSpec::new(parents, closed).expect("random recursive trees are valid")
}

/// One corpus instance: a tree and the radius of the initial fire.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub spec: TreeSpec,
    pub k: u32,
}

/// `count` random trees with at most `max_outside` vertices outside the
/// initial ball, reproducible from `seed`.
pub fn random_corpus(seed: u64, count: usize, max_outside: usize) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.gen_range(0..=2u32);
        let n = rng.gen_range(2..=max_outside + 4);
        let spec = random_explicit_tree(&mut rng, n, 0.25);
        let height = spec.height();
        let tree = TreeSpec::Explicit(spec);
        let trunc = expand(&tree, height).expect("small tree");
        let inside = trunc.ball(k.min(height)).map(|r| r.len()).unwrap_or(0);
        if trunc.len() - inside <= max_outside {
            out.push(CorpusEntry { spec: tree, k });
        }
    }
    out
}

/// The three answers to "can the fire on `B_r(k)` be contained?".
#[derive(Debug, Clone, Serialize)]
pub struct TriangleCase {
    pub brute_force: bool,
    pub feasibility: bool,
    pub canonical: bool,
    /// The oracle's witness schedule, when there is one, simulates to
    /// containment.
    pub witness_ok: bool,
}

impl TriangleCase {
    pub fn agrees(&self) -> bool {
        self.brute_force == self.feasibility && self.feasibility == self.canonical && self.witness_ok
    }
}

/// Runs the three deciders on one instance.
pub fn triangle_case(entry: &CorpusEntry, budget: &BudgetSequence) -> Result<TriangleCase> {
    let height = match &entry.spec {
        TreeSpec::Explicit(e) => e.height(),
        _ => return Err(Error::Spec("the oracle corpus holds explicit trees".into())),
    };
    let depth = height.max(entry.k + 1);
    let trunc = expand(&entry.spec, depth)?;
    let horizon = depth + 2;
    let fire: Vec<VertexId> = trunc.ball(entry.k)?.collect();
    let oracle = brute_force_containment(&trunc, &fire, budget, horizon, SearchMode::Threatened)?;
    let witness_ok = match oracle.schedule() {
        Some(s) => simulate(&trunc, entry.k, &s, budget, horizon)?.verdict.is_contained(),
        None => true,
    };
    let feasibility = feasibility_on_truncation(&trunc, entry.k, budget).is_feasible();
    let mut canonical = false;
    for cut in enumerate_vertex_cuts(&trunc, entry.k, MAX_SEARCH_VERTICES)? {
        if simulate(&trunc, entry.k, &Strategy::canonical(cut), budget, horizon)?.verdict.is_contained() {
            canonical = true;
            break;
        }
    }
    Ok(TriangleCase { brute_force: oracle.is_feasible(), feasibility, canonical, witness_ok })
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleReport {
    pub instances: usize,
    pub feasible: usize,
    pub disagreements: Vec<(usize, String, TriangleCase)>,
}

/// Runs [`triangle_case`] over a corpus and a budget catalogue.
pub fn run_triangle(corpus: &[CorpusEntry], budgets: &[BudgetSequence], exec: Exec) -> Result<TriangleReport> {
    let jobs: Vec<(usize, &BudgetSequence)> =
        (0..corpus.len()).flat_map(|i| budgets.iter().map(move |b| (i, b))).collect();
    let results = exec.map(&jobs, |&(i, b)| triangle_case(&corpus[i], b).map(|c| (i, b.to_string(), c)));
    let mut report = TriangleReport { instances: jobs.len(), feasible: 0, disagreements: vec![] };
    for r in results {
        let (i, b, case) = r?;
        if case.brute_force {
            report.feasible += 1;
        }
        if !case.agrees() {
            report.disagreements.push((i, b, case));
        }
    }
    Ok(report)
}

/// Content hash identifying an oracle query.
pub fn cache_key(spec: &TreeSpec, initial_fire: &[VertexId], budget: &BudgetSequence, horizon: u32, mode: SearchMode) -> String {
    let mut h = Sha256::new();
    h.update(spec.to_toml_string().as_bytes());
    h.update(format!("|fire={initial_fire:?}|budget={budget}|horizon={horizon}|mode={mode:?}").as_bytes());
    hex::encode(h.finalize())
}

/// Oracle results stored one per line as `<key>\t<feasible|infeasible>`.
#[derive(Debug, Default)]
pub struct ResultCache {
    path: Option<PathBuf>,
    entries: BTreeMap<String, bool>,
}

impl ResultCache {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = BTreeMap::new();
        if path.exists() {
            for line in fs::read_to_string(&path)?.lines() {
                let Some((key, value)) = line.split_once('\t') else { continue };
                match value.trim() {
                    "feasible" => entries.insert(key.to_string(), true),
                    "infeasible" => entries.insert(key.to_string(), false),
                    _ => continue,
                };
            }
        }
        Ok(ResultCache { path: Some(path), entries })
    }

    pub fn get(&self, key: &str) -> Option<bool> {
        self.entries.get(key).copied()
    }

    pub fn insert(&mut self, key: String, feasible: bool) {
        self.entries.insert(key, feasible);
    }

    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        let mut f = fs::File::create(path)?;
        for (k, v) in &self.entries {
            writeln!(f, "{k}\t{}", if *v { "feasible" } else { "infeasible" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::{cut_weight, min_cut_weight};
    use crate::rate::Rate;

    #[test]
    fn ray_is_contained_by_one_protection() {
        let ray = expand(&TreeSpec::ray(), 5).unwrap();
        let d = brute_force_containment(&ray, &[0], &BudgetSequence::Constant(1), 10, SearchMode::Strict).unwrap();
        assert_eq!(d, OracleDecision::Feasible { schedule: BTreeMap::from([(1, vec![1])]) });
    }

    #[test]
    fn binary_tree_needs_more_than_one_per_round() {
        let bin = expand(&TreeSpec::regular(2), 5).unwrap();
        for mode in [SearchMode::Frontier, SearchMode::Threatened] {
            let d = brute_force_containment(&bin, &[0], &BudgetSequence::Constant(1), 10, mode).unwrap();
            assert_eq!(d, OracleDecision::Infeasible);
        }
        let bin4 = expand(&TreeSpec::regular(2), 4).unwrap();
        let d = brute_force_containment(&bin4, &[0], &BudgetSequence::Constant(2), 10, SearchMode::Threatened).unwrap();
        assert_eq!(d, OracleDecision::Feasible { schedule: BTreeMap::from([(1, vec![1, 2])]) });
    }

    #[test]
    fn strict_search_is_capped() {
        let bin = expand(&TreeSpec::regular(2), 5).unwrap();
        assert!(matches!(
            brute_force_containment(&bin, &[0], &BudgetSequence::Constant(1), 10, SearchMode::Strict),
            Err(Error::SearchTooLarge(_))
        ));
        let big = expand(&TreeSpec::regular(2), 7).unwrap();
        assert!(brute_force_containment(&big, &[0], &BudgetSequence::Constant(1), 10, SearchMode::Frontier).is_err());
    }

    #[test]
    fn front_loaded_budget_rewards_early_deep_protection() {
        // 0 - 1 - 2 - {3, 4}; budget 2 now and nothing later
        let spec = TreeSpec::Explicit(ExplicitSpec::new(vec![0, 1, 2, 2], []).unwrap());
        let t = expand(&spec, 3).unwrap();
        let budget = BudgetSequence::Explicit(vec![1]);
        for mode in [SearchMode::Strict, SearchMode::Threatened, SearchMode::Frontier] {
            assert!(brute_force_containment(&t, &[0], &budget, 6, mode).unwrap().is_feasible());
        }
    }

    #[test]
    fn disconnected_fire_falls_back_from_frontier_mode() {
        // path 1 - 0 - 2 - 3 with leaf 3 open and 1 closed, fire on {1, 3}? use a star
        // 0 -> 1, 2; 1 -> 3; 2 -> 4; fire at {3, 4} can still reach 0 from two sides
        let spec = TreeSpec::Explicit(ExplicitSpec::new(vec![0, 0, 1, 2, 0], [3, 4]).unwrap());
        let t = expand(&spec, 2).unwrap();
        let fire: Vec<VertexId> = (0..t.len()).filter(|&v| !t.is_open(v) && t.is_leaf(v)).collect();
        let b = BudgetSequence::Constant(1);
        let strict = brute_force_containment(&t, &fire, &b, 6, SearchMode::Strict).unwrap();
        let frontier = brute_force_containment(&t, &fire, &b, 6, SearchMode::Frontier).unwrap();
        assert_eq!(strict.is_feasible(), frontier.is_feasible());
    }

    #[test]
    fn cutset_counts() {
        assert_eq!(enumerate_cutsets(&expand(&TreeSpec::ray(), 3).unwrap(), 16).unwrap().len(), 3);
        // each level-1 subtree: its top edge or both bottom edges
        assert_eq!(enumerate_cutsets(&expand(&TreeSpec::regular(2), 2).unwrap(), 16).unwrap().len(), 4);
        assert_eq!(enumerate_cutsets(&expand(&TreeSpec::ray(), 1).unwrap(), 16).unwrap().len(), 1);
        assert!(enumerate_cutsets(&expand(&TreeSpec::regular(2), 5).unwrap(), 16).is_err());
    }

    #[test]
    fn enumerated_cutsets_are_valid_antichains() {
        let t = expand(&TreeSpec::fibonacci(), 4).unwrap();
        let cuts = enumerate_cutsets(&t, 24).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for c in &cuts {
            c.validate(&t).unwrap();
            assert!(c.is_antichain(&t));
            assert!(seen.insert(c.edges().clone()), "duplicate cutset");
        }
        let r = Rate::ratio(3, 2).unwrap();
        let brute = cuts.iter().map(|c| cut_weight(&t, c, &r).unwrap()).min_by(|a, b| a.partial_cmp(b).unwrap()).unwrap();
        assert_eq!(brute, min_cut_weight(&t, &r).unwrap());
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = random_corpus(7, 20, 10);
        let b = random_corpus(7, 20, 10);
        assert_eq!(a.iter().map(|e| (&e.spec, e.k)).collect::<Vec<_>>(), b.iter().map(|e| (&e.spec, e.k)).collect::<Vec<_>>());
    }

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("firefight-cache-{}", std::process::id()));
        let spec = TreeSpec::ray();
        let key = cache_key(&spec, &[0], &BudgetSequence::Constant(1), 5, SearchMode::Strict);
        assert_eq!(key.len(), 64);
        let mut cache = ResultCache::open(&dir).unwrap();
        cache.insert(key.clone(), true);
        cache.save().unwrap();
        assert_eq!(ResultCache::open(&dir).unwrap().get(&key), Some(true));
        std::fs::remove_file(dir).unwrap();
    }
}
