//! Finite descriptions of rooted, locally finite trees and their depth-`D`
//! truncations.
//!
//! Three description styles are supported:
//!
//! * **Periodic**: a finite automaton of vertex *states*; each state lists the
//!   states of its children in order. Periodic trees are subperiodic by
//!   construction, so their growth rate and branching number agree.
//! * **Spherically symmetric**: per-level child counts, a finite preperiod
//!   followed by a repeating period.
//! * **Explicit**: a finite tree given by a parent list. Leaves stand for an
//!   infinite continuation ("escape" leaves) unless listed as `closed`.
//!
//! Levels: the root has level 0, a child has its parent's level plus one, and
//! an edge has the level of its deeper endpoint. Truncation vertices are
//! numbered in breadth-first order, so each level and each child list is a
//! contiguous id range.
//!
//! # File format
//!
//! Spec files are TOML. Unknown keys are rejected.
//!
//! ```toml
//! variant = "periodic"
//! root = "A"
//! [states]
//! A = ["A", "B"]
//! B = ["A"]
//! ```
//!
//! ```toml
//! variant = "spherically-symmetric"
//! [levels]
//! preperiod = [3]
//! period = [1]
//! ```
//!
//! ```toml
//! variant = "explicit"
//! # parents[i] is the parent of vertex i + 1; vertex 0 is the root
//! parents = [0, 0, 1, 1]
//! closed = [2]
//! ```

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Default limit on the number of vertices a single truncation may hold.
pub const DEFAULT_VERTEX_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicSpec {
    names: Vec<String>,
    root: usize,
    children: Vec<Vec<usize>>,
}

impl PeriodicSpec {
    /// Builds a spec from `(state name, child state names)` pairs. State ids
    /// follow the order of `states`.
    pub fn new<S: AsRef<str>>(root: &str, states: &[(S, Vec<S>)]) -> Result<Self> {
        let names: Vec<String> = states.iter().map(|(n, _)| n.as_ref().to_string()).collect();
        let lookup: BTreeMap<&str, usize> =
            names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        if lookup.len() != names.len() {
            return Err(Error::Spec("duplicate state name".into()));
        }
        let find = |name: &str| {
            lookup
                .get(name)
                .copied()
                .ok_or_else(|| Error::Spec(format!("unknown state {name:?}")))
        };
        let children = states
            .iter()
            .map(|(_, kids)| kids.iter().map(|k| find(k.as_ref())).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let root = find(root)?;
        Ok(PeriodicSpec { names, root, children })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, state: usize) -> &str {
        &self.names[state]
    }

    pub fn children(&self, state: usize) -> &[usize] {
        &self.children[state]
    }

    /// States reachable from the root state, in increasing id order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        while let Some(s) = stack.pop() {
            for &t in &self.children[s] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        (0..self.names.len()).filter(|&s| seen[s]).collect()
    }

    /// Entry `(s, t)` is the multiplicity of `t` among the children of `s`.
    pub fn transition_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.names.len();
        let mut m = vec![vec![0u64; n]; n];
        for (s, kids) in self.children.iter().enumerate() {
            for &t in kids {
                m[s][t] += 1;
            }
        }
        m
    }

    pub fn max_children(&self) -> usize {
        self.reachable().into_iter().map(|s| self.children[s].len()).max().unwrap_or(0)
    }

    pub fn has_childless_reachable_state(&self) -> bool {
        self.reachable().into_iter().any(|s| self.children[s].is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitSpec {
    parents: Vec<usize>,
    closed: BTreeSet<usize>,
}

impl ExplicitSpec {
    /// `parents[i]` is the parent of vertex `i + 1`; vertex 0 is the root.
    /// Leaves listed in `closed` are finite dead ends; every other leaf is an
    /// escape leaf standing for an infinite continuation.
    pub fn new(parents: Vec<usize>, closed: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = parents.len() + 1;
        for (i, &p) in parents.iter().enumerate() {
            if p >= n {
                return Err(Error::Spec(format!("vertex {} has unknown parent {p}", i + 1)));
            }
            if p == i + 1 {
                return Err(Error::Spec(format!("vertex {p} is its own parent")));
            }
        }
        // every vertex must reach the root
        let mut reaches = vec![None::<bool>; n];
        reaches[0] = Some(true);
        for start in 1..n {
            let mut path = vec![];
            let mut v = start;
            while reaches[v].is_none() {
                if path.len() > n {
                    break;
                }
                path.push(v);
                reaches[v] = Some(false);
                v = parents[v - 1];
            }
            let ok = reaches[v] == Some(true) && !path.contains(&v);
            if !ok {
                return Err(Error::Spec(format!("vertex {start} is not connected to the root")));
            }
            for p in path {
                reaches[p] = Some(true);
            }
        }
        let closed: BTreeSet<usize> = closed.into_iter().collect();
        let mut has_child = vec![false; n];
        for &p in &parents {
            has_child[p] = true;
        }
        for &c in &closed {
            if c >= n || has_child[c] {
                return Err(Error::Spec(format!("closed vertex {c} is not a leaf")));
            }
        }
        Ok(ExplicitSpec { parents, closed })
    }

    pub fn vertex_count(&self) -> usize {
        self.parents.len() + 1
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn closed(&self) -> &BTreeSet<usize> {
        &self.closed
    }

    fn child_lists(&self) -> Vec<Vec<usize>> {
        let mut kids = vec![vec![]; self.vertex_count()];
        for (i, &p) in self.parents.iter().enumerate() {
            kids[p].push(i + 1);
        }
        kids
    }

    pub fn height(&self) -> u32 {
        let kids = self.child_lists();
        let mut height = 0;
        let mut queue = VecDeque::from([(0usize, 0u32)]);
        while let Some((v, l)) = queue.pop_front() {
            height = height.max(l);
            queue.extend(kids[v].iter().map(|&c| (c, l + 1)));
        }
        height
    }
}

/// Finite description of a rooted, locally finite tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeSpec {
    Periodic(PeriodicSpec),
    SphericallySymmetric { preperiod: Vec<u32>, period: Vec<u32> },
    Explicit(ExplicitSpec),
}

impl TreeSpec {
    /// Per-level child counts `preperiod` then `period` repeating forever.
    pub fn spherically_symmetric(preperiod: Vec<u32>, period: Vec<u32>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Spec("period must be non-empty".into()));
        }
        if preperiod.iter().chain(&period).any(|&c| c == 0) {
            return Err(Error::Spec("spherically symmetric child counts must be at least 1".into()));
        }
        Ok(TreeSpec::SphericallySymmetric { preperiod, period })
    }

    /// The complete `d`-ary tree.
    pub fn regular(d: usize) -> Self {
        let kids = vec!["A"; d];
        TreeSpec::Periodic(PeriodicSpec::new("A", &[("A", kids)]).expect("valid spec"))
    }

    /// The one-sided infinite path.
    pub fn ray() -> Self {
        Self::regular(1)
    }

    /// `A -> [A, B]`, `B -> [A]`; level counts are Fibonacci numbers.
    pub fn fibonacci() -> Self {
        TreeSpec::Periodic(
            PeriodicSpec::new("A", &[("A", vec!["A", "B"]), ("B", vec!["A"])]).expect("valid spec"),
        )
    }

    pub fn is_infinite(&self) -> bool {
        match self.to_periodic() {
            Some(p) => {
                // infinite iff a cycle of states is reachable from the root
                let reach = p.reachable();
                let mut on = vec![false; p.state_count()];
                reach.iter().for_each(|&s| on[s] = true);
                // repeatedly strip states whose children all lie in stripped states
                let mut alive = on.clone();
                loop {
                    let mut changed = false;
                    for &s in &reach {
                        if alive[s] && !p.children(s).iter().any(|&t| alive[t]) {
                            alive[s] = false;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                alive[p.root()]
            }
            None => false,
        }
    }

    /// Periodic form of a periodic or spherically symmetric spec. Explicit
    /// specs have none.
    pub fn to_periodic(&self) -> Option<PeriodicSpec> {
        match self {
            TreeSpec::Periodic(p) => Some(p.clone()),
            TreeSpec::SphericallySymmetric { preperiod, period } => {
                let names: Vec<String> = (0..preperiod.len())
                    .map(|i| format!("pre{i}"))
                    .chain((0..period.len()).map(|i| format!("per{i}")))
                    .collect();
                let pre = preperiod.len();
                let next = |i: usize| {
                    if i + 1 < names.len() {
                        i + 1
                    } else {
                        pre
                    }
                };
                let counts: Vec<u32> = preperiod.iter().chain(period).copied().collect();
                let children =
                    counts.iter().enumerate().map(|(i, &c)| vec![next(i); c as usize]).collect();
                Some(PeriodicSpec { names, root: 0, children })
            }
            TreeSpec::Explicit(_) => None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        raw.into_spec()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn to_toml_string(&self) -> String {
        let raw = match self {
            TreeSpec::Periodic(p) => RawSpec {
                variant: "periodic".into(),
                root: Some(p.names[p.root].clone()),
                states: Some(
                    p.names
                        .iter()
                        .zip(&p.children)
                        .map(|(n, kids)| (n.clone(), kids.iter().map(|&k| p.names[k].clone()).collect()))
                        .collect(),
                ),
                ..RawSpec::default()
            },
            TreeSpec::SphericallySymmetric { preperiod, period } => RawSpec {
                variant: "spherically-symmetric".into(),
                levels: Some(RawLevels { preperiod: preperiod.clone(), period: period.clone() }),
                ..RawSpec::default()
            },
            TreeSpec::Explicit(e) => RawSpec {
                variant: "explicit".into(),
                parents: Some(e.parents.clone()),
                closed: (!e.closed.is_empty()).then(|| e.closed.iter().copied().collect()),
                ..RawSpec::default()
            },
        };
        toml::to_string(&raw).expect("spec serialises")
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    variant: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    root: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parents: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    states: Option<BTreeMap<String, Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<RawLevels>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevels {
    #[serde(default)]
    preperiod: Vec<u32>,
    period: Vec<u32>,
}

impl RawSpec {
    fn into_spec(self) -> Result<TreeSpec> {
        let stray = |field: &str, present: bool| {
            if present {
                Err(Error::Parse(format!("field `{field}` is not valid for variant {:?}", self.variant)))
            } else {
                Ok(())
            }
        };
        match self.variant.as_str() {
            "periodic" => {
                stray("parents", self.parents.is_some())?;
                stray("closed", self.closed.is_some())?;
                stray("levels", self.levels.is_some())?;
                let root = self.root.clone().ok_or_else(|| Error::Parse("missing `root`".into()))?;
                let states = self.states.clone().ok_or_else(|| Error::Parse("missing `states`".into()))?;
                let pairs: Vec<(String, Vec<String>)> = states.into_iter().collect();
                Ok(TreeSpec::Periodic(PeriodicSpec::new(&root, &pairs)?))
            }
            "spherically-symmetric" => {
                stray("root", self.root.is_some())?;
                stray("states", self.states.is_some())?;
                stray("parents", self.parents.is_some())?;
                stray("closed", self.closed.is_some())?;
                let levels = self.levels.ok_or_else(|| Error::Parse("missing `levels`".into()))?;
                TreeSpec::spherically_symmetric(levels.preperiod, levels.period)
            }
            "explicit" => {
                stray("root", self.root.is_some())?;
                stray("states", self.states.is_some())?;
                stray("levels", self.levels.is_some())?;
                let parents = self.parents.ok_or_else(|| Error::Parse("missing `parents`".into()))?;
                Ok(TreeSpec::Explicit(ExplicitSpec::new(parents, self.closed.unwrap_or_default())?))
            }
            other => Err(Error::Parse(format!("unknown variant {other:?}"))),
        }
    }
}

/// The finite tree of all vertices at levels `0..=depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truncation {
    depth: u32,
    level: Vec<u32>,
    parent: Vec<VertexId>,
    first_child: Vec<VertexId>,
    child_count: Vec<u32>,
    open: Vec<bool>,
    state: Vec<Option<u32>>,
    origin: Vec<usize>,
    level_start: Vec<VertexId>,
}

const NO_PARENT: VertexId = VertexId::MAX;

impl Truncation {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level.is_empty()
    }

    pub fn root(&self) -> VertexId {
        0
    }

    pub fn level(&self, v: VertexId) -> u32 {
        self.level[v]
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        (self.parent[v] != NO_PARENT).then_some(self.parent[v])
    }

    pub fn children(&self, v: VertexId) -> Range<VertexId> {
        self.first_child[v]..self.first_child[v] + self.child_count[v] as usize
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.child_count[v] == 0
    }

    /// A leaf of the truncation whose subtree continues in the described
    /// tree: fire reaching it is fire escaping to infinity.
    pub fn is_open(&self, v: VertexId) -> bool {
        self.open[v]
    }

    /// Automaton state of `v` (periodic and spherically symmetric specs).
    pub fn state(&self, v: VertexId) -> Option<u32> {
        self.state[v]
    }

    /// Vertex id in the originating explicit spec (identity otherwise).
    pub fn origin(&self, v: VertexId) -> usize {
        self.origin[v]
    }

    pub fn vertices_at(&self, level: u32) -> Range<VertexId> {
        if level > self.depth {
            return self.len()..self.len();
        }
        self.level_start[level as usize]..self.level_start[level as usize + 1]
    }

    /// `M_n` for `n = 0..=depth`.
    pub fn level_counts(&self) -> Vec<usize> {
        self.level_start.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Edges are named by their child endpoint, so they are the ids `1..len`.
    pub fn edges(&self) -> Range<VertexId> {
        1..self.len()
    }

    /// The ball `B_r(k)`: all vertices at level `≤ k`.
    pub fn ball(&self, k: u32) -> Result<Range<VertexId>> {
        if k > self.depth {
            return Err(Error::RadiusOutOfRange { radius: k, depth: self.depth });
        }
        Ok(0..self.level_start[k as usize + 1])
    }

    /// True if `a` is `b` or an ancestor of `b`.
    pub fn is_ancestor_or_self(&self, a: VertexId, mut b: VertexId) -> bool {
        while self.level[b] > self.level[a] {
            b = self.parent[b];
        }
        a == b
    }

    pub fn open_leaves(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.len()).filter(move |&v| self.open[v])
    }

    /// True when every vertex of a level has the same child count and the
    /// same open flag, i.e. the truncation is spherically symmetric.
    pub fn is_level_symmetric(&self) -> bool {
        (0..=self.depth).all(|l| {
            let mut r = self.vertices_at(l);
            let Some(first) = r.next() else { return true };
            r.all(|v| self.child_count[v] == self.child_count[first] && self.open[v] == self.open[first])
        })
    }

    /// The sub-truncation of levels `0..=depth`.
    pub fn prefix(&self, depth: u32) -> Truncation {
        if depth >= self.depth {
            return self.clone();
        }
        let n = self.level_start[depth as usize + 1];
        let mut t = Truncation {
            depth,
            level: self.level[..n].to_vec(),
            parent: self.parent[..n].to_vec(),
            first_child: self.first_child[..n].to_vec(),
            child_count: self.child_count[..n].to_vec(),
            open: self.open[..n].to_vec(),
            state: self.state[..n].to_vec(),
            origin: self.origin[..n].to_vec(),
            level_start: self.level_start[..depth as usize + 2].to_vec(),
        };
        for v in self.vertices_at(depth) {
            if self.child_count[v] > 0 {
                t.open[v] = true;
            }
            t.child_count[v] = 0;
            t.first_child[v] = n;
        }
        t
    }
}

/// Truncates `spec` at `depth` with the default vertex cap.
pub fn expand(spec: &TreeSpec, depth: u32) -> Result<Truncation> {
    expand_with_cap(spec, depth, DEFAULT_VERTEX_CAP)
}

pub fn expand_with_cap(spec: &TreeSpec, depth: u32, cap: usize) -> Result<Truncation> {
    match spec {
        TreeSpec::Explicit(e) => expand_explicit(e, depth, cap),
        _ => {
            let p = spec.to_periodic().expect("periodic form");
            if p.has_childless_reachable_state() {
                log::warn!("spec has a reachable state without children; parts of the tree are finite");
            }
            expand_periodic(&p, depth, cap)
        }
    }
}

struct Builder {
    t: Truncation,
    cap: usize,
}

impl Builder {
    fn new(cap: usize) -> Self {
        Builder {
            t: Truncation {
                depth: 0,
                level: vec![],
                parent: vec![],
                first_child: vec![],
                child_count: vec![],
                open: vec![],
                state: vec![],
                origin: vec![],
                level_start: vec![0],
            },
            cap,
        }
    }

    fn push(&mut self, level: u32, parent: VertexId, state: Option<u32>, origin: usize) -> Result<VertexId> {
        if self.t.level.len() >= self.cap {
            return Err(Error::VertexCap { cap: self.cap });
        }
        let id = self.t.level.len();
        self.t.level.push(level);
        self.t.parent.push(parent);
        self.t.first_child.push(0);
        self.t.child_count.push(0);
        self.t.open.push(false);
        self.t.state.push(state);
        self.t.origin.push(origin);
        Ok(id)
    }

    fn close_level(&mut self) {
        self.t.level_start.push(self.t.level.len());
    }
}

fn expand_periodic(p: &PeriodicSpec, depth: u32, cap: usize) -> Result<Truncation> {
    let mut b = Builder::new(cap);
    let root = b.push(0, NO_PARENT, Some(p.root as u32), 0)?;
    b.t.origin[root] = root;
    b.close_level();
    for level in 0..depth {
        let layer = b.t.vertices_at_building(level);
        let incoming: usize = layer.clone().map(|v| p.children(b.t.state[v].unwrap() as usize).len()).sum();
        if b.t.len() + incoming > cap {
            return Err(Error::VertexCap { cap });
        }
        for v in layer {
            let s = b.t.state[v].unwrap() as usize;
            b.t.first_child[v] = b.t.len();
            b.t.child_count[v] = p.children(s).len() as u32;
            for &c in p.children(s) {
                let id = b.push(level + 1, v, Some(c as u32), 0)?;
                b.t.origin[id] = id;
            }
        }
        b.close_level();
    }
    b.t.depth = depth;
    let end = b.t.len();
    for v in b.t.vertices_at(depth) {
        b.t.first_child[v] = end;
        b.t.open[v] = !p.children(b.t.state[v].unwrap() as usize).is_empty();
    }
    Ok(b.t)
}

fn expand_explicit(e: &ExplicitSpec, depth: u32, cap: usize) -> Result<Truncation> {
    let kids = e.child_lists();
    let mut b = Builder::new(cap);
    b.push(0, NO_PARENT, None, 0)?;
    b.close_level();
    for level in 0..depth {
        let layer = b.t.vertices_at_building(level);
        for v in layer {
            let orig = b.t.origin[v];
            b.t.first_child[v] = b.t.len();
            b.t.child_count[v] = kids[orig].len() as u32;
            for &c in &kids[orig] {
                b.push(level + 1, v, None, c)?;
            }
        }
        b.close_level();
    }
    b.t.depth = depth;
    let end = b.t.len();
    for v in 0..end {
        let orig = b.t.origin[v];
        if b.t.child_count[v] == 0 {
            b.t.first_child[v] = end;
            let cut_off = b.t.level[v] == depth && !kids[orig].is_empty();
            let escape = kids[orig].is_empty() && !e.closed.contains(&orig);
            b.t.open[v] = cut_off || escape;
        }
    }
    Ok(b.t)
}

impl Truncation {
    fn vertices_at_building(&self, level: u32) -> Range<VertexId> {
        self.level_start[level as usize]..self.level_start[level as usize + 1]
    }
}
