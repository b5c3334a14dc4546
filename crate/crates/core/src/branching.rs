//! Cut weights, minimum cuts, maximum flows and the branching number.
//!
//! Edge `e` carries capacity `λ^{-|e|}`. The minimum cut of a truncation is
//! computed bottom-up with
//!
//! ```text
//! c(v) = min(λ^{-|v|}, Σ_{w child of v} c(w)),   c(open leaf) = λ^{-|v|}
//! ```
//!
//! and the maximum flow is obtained top-down by pushing `c(w)` into each child
//! edge, so the two values agree by construction and are checked
//! independently against the flow constraints.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::BudgetSequence;
use crate::par::Exec;
use crate::rate::{pow_rational, Rate, Scalar, Weight};
use crate::tree_model::{expand, PeriodicSpec, TreeSpec, Truncation, VertexId};

/// Weight below which a min-cut sequence is declared to decay to zero.
pub const DECAY_FLOOR: f64 = 1e-6;
/// Sup-norm change between depths below which the per-state recursion is
/// declared to have reached its fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Fraction of the fixed-point weight kept as the certificate's `ε`.
pub const EPSILON_SAFETY: f64 = 0.9;

/// A set of edges, each named by its child endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cutset {
    edges: BTreeSet<VertexId>,
}

impl Cutset {
    pub fn new(edges: impl IntoIterator<Item = VertexId>) -> Self {
        Cutset { edges: edges.into_iter().collect() }
    }

    pub fn edges(&self) -> &BTreeSet<VertexId> {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Checks that every open leaf has a cut edge on its root path.
    pub fn validate(&self, trunc: &Truncation) -> Result<()> {
        if let Some(&bad) = self.edges.iter().find(|&&e| e == trunc.root() || e >= trunc.len()) {
            return Err(Error::InvalidCutset(format!("{bad} does not name an edge")));
        }
        for leaf in trunc.open_leaves() {
            let mut v = leaf;
            let mut hit = false;
            while let Some(p) = trunc.parent(v) {
                if self.edges.contains(&v) {
                    hit = true;
                    break;
                }
                v = p;
            }
            if !hit {
                return Err(Error::InvalidCutset(format!("open leaf {leaf} is not separated from the root")));
            }
        }
        Ok(())
    }

    /// True when no edge lies on the root path of another.
    pub fn is_antichain(&self, trunc: &Truncation) -> bool {
        self.edges.iter().all(|&e| {
            let mut v = e;
            while let Some(p) = trunc.parent(v) {
                if p != trunc.root() && self.edges.contains(&p) {
                    return false;
                }
                v = p;
            }
            true
        })
    }
}

/// `λ^{-n}` for `n = 0..=depth`.
fn inverse_powers<S: Scalar>(lambda: &S, depth: u32) -> Vec<S> {
    let inv = S::one() / lambda.clone();
    let mut out = Vec::with_capacity(depth as usize + 1);
    let mut cur = S::one();
    for _ in 0..=depth {
        out.push(cur.clone());
        cur = cur * inv.clone();
    }
    out
}

fn exact_inverse_powers(lambda: &BigRational, depth: u32) -> Vec<BigRational> {
    let inv = lambda.recip();
    (0..=depth).map(|n| pow_rational(&inv, n)).collect()
}

/// `Σ_{e ∈ Π} λ^{-|e|}`.
pub fn cut_weight(trunc: &Truncation, cut: &Cutset, rate: &Rate) -> Result<Weight> {
    cut.validate(trunc)?;
    Ok(match rate {
        Rate::Exact(l) => {
            let inv = exact_inverse_powers(l, trunc.depth());
            Weight::Exact(cut.edges.iter().map(|&e| inv[trunc.level(e) as usize].clone()).sum())
        }
        Rate::Float(l) => {
            let inv = inverse_powers(l, trunc.depth());
            Weight::Float(cut.edges.iter().map(|&e| inv[trunc.level(e) as usize]).sum())
        }
    })
}

/// Per-vertex recursion values. `None` stands for an infinite value: the
/// subtree contains an open leaf that no allowed edge separates.
struct CutTable<S> {
    value: Vec<Option<S>>,
    cut_here: Vec<bool>,
}

fn cut_table<S: Scalar>(trunc: &Truncation, inv: &[S], min_level: u32) -> CutTable<S> {
    let n = trunc.len();
    let mut value: Vec<Option<S>> = vec![None; n];
    let mut cut_here = vec![false; n];
    for v in (0..n).rev() {
        let level = trunc.level(v);
        let below: Option<S> = if trunc.is_open(v) {
            None
        } else {
            trunc
                .children(v)
                .try_fold(S::zero(), |acc, w| value[w].clone().map(|x| acc + x))
        };
        let cuttable = v != trunc.root() && level >= min_level;
        value[v] = if cuttable {
            let cap = inv[level as usize].clone();
            match below {
                // ties cut above
                Some(b) if b < cap => Some(b),
                _ => {
                    cut_here[v] = true;
                    Some(cap)
                }
            }
        } else {
            below
        };
    }
    CutTable { value, cut_here }
}

impl<S: Scalar> CutTable<S> {
    fn root_value(&self, trunc: &Truncation) -> Option<S> {
        trunc.children(trunc.root()).try_fold(S::zero(), |acc, w| self.value[w].clone().map(|x| acc + x))
    }

    fn cutset(&self, trunc: &Truncation) -> Cutset {
        let mut edges = vec![];
        let mut stack: Vec<VertexId> = trunc.children(trunc.root()).rev().collect();
        while let Some(v) = stack.pop() {
            if self.cut_here[v] {
                edges.push(v);
            } else {
                stack.extend(trunc.children(v).rev());
            }
        }
        Cutset::new(edges)
    }
}

/// A minimum-weight cutset and its weight.
#[derive(Debug, Clone)]
pub struct MinCut {
    pub weight: Weight,
    pub cutset: Cutset,
}

/// Minimum cut using only edges at level `≥ min_level`; `None` if no such
/// cutset exists (an open leaf sits above `min_level`).
pub fn min_cut(trunc: &Truncation, rate: &Rate, min_level: u32) -> Option<MinCut> {
    fn run<S: Scalar>(trunc: &Truncation, inv: &[S], min_level: u32) -> Option<(S, Cutset)> {
        let table = cut_table(trunc, inv, min_level);
        let w = table.root_value(trunc)?;
        Some((w, table.cutset(trunc)))
    }
    match rate {
        Rate::Exact(l) => run(trunc, &exact_inverse_powers(l, trunc.depth()), min_level)
            .map(|(w, cutset)| MinCut { weight: Weight::Exact(w), cutset }),
        Rate::Float(l) => run(trunc, &inverse_powers(l, trunc.depth()), min_level)
            .map(|(w, cutset)| MinCut { weight: Weight::Float(w), cutset }),
    }
}

/// Minimum of [`cut_weight`] over all cutsets of the truncation.
pub fn min_cut_weight(trunc: &Truncation, rate: &Rate) -> Result<Weight> {
    if trunc.depth() == 0 {
        return Err(Error::InvalidCutset("a depth-0 truncation has no edges".into()));
    }
    Ok(min_cut(trunc, rate, 1).expect("every open leaf below the root is separable").weight)
}

/// A flow from the root to the open leaves.
#[derive(Debug, Clone)]
pub struct FlowAssignment {
    /// Flow on the edge into each vertex; the root entry is zero.
    pub edge_flow: Vec<Weight>,
    pub value: Weight,
}

/// A maximum flow with capacities `λ^{-|e|}`.
pub fn max_flow(trunc: &Truncation, rate: &Rate) -> FlowAssignment {
    fn run<S: Scalar>(trunc: &Truncation, inv: &[S]) -> (Vec<S>, S) {
        let table = cut_table(trunc, inv, 1);
        let cap = |w: VertexId| table.value[w].clone().unwrap_or_else(S::zero);
        let mut flow = vec![S::zero(); trunc.len()];
        let mut value = S::zero();
        for w in trunc.children(trunc.root()) {
            flow[w] = cap(w);
            value = value + cap(w);
        }
        for v in 1..trunc.len() {
            let mut remaining = flow[v].clone();
            for w in trunc.children(v) {
                let c = cap(w);
                let push = if c < remaining { c } else { remaining.clone() };
                remaining = remaining - push.clone();
                flow[w] = push;
            }
        }
        (flow, value)
    }
    match rate {
        Rate::Exact(l) => {
            let (flow, value) = run(trunc, &exact_inverse_powers(l, trunc.depth()));
            FlowAssignment { edge_flow: flow.into_iter().map(Weight::Exact).collect(), value: Weight::Exact(value) }
        }
        Rate::Float(l) => {
            let (flow, value) = run(trunc, &inverse_powers(l, trunc.depth()));
            FlowAssignment { edge_flow: flow.into_iter().map(Weight::Float).collect(), value: Weight::Float(value) }
        }
    }
}

impl FlowAssignment {
    /// Checks capacity, non-negativity and conservation, exactly for exact
    /// flows and to `tol` otherwise. Returns a description of the first
    /// violation.
    pub fn check(&self, trunc: &Truncation, rate: &Rate, tol: f64) -> std::result::Result<(), String> {
        match rate {
            Rate::Exact(l) => {
                let inv = exact_inverse_powers(l, trunc.depth());
                let flow: Vec<BigRational> = self
                    .edge_flow
                    .iter()
                    .map(|w| w.as_exact().cloned().ok_or("float flow for an exact rate"))
                    .collect::<std::result::Result<_, _>>()?;
                let value = self.value.as_exact().ok_or("float value for an exact rate")?;
                check_flow(trunc, &flow, value, &inv, &BigRational::zero())
            }
            Rate::Float(l) => {
                let inv = inverse_powers(l, trunc.depth());
                let flow: Vec<f64> = self.edge_flow.iter().map(Weight::to_f64).collect();
                check_flow(trunc, &flow, &self.value.to_f64(), &inv, &tol)
            }
        }
    }
}

fn check_flow<S: Scalar>(trunc: &Truncation, flow: &[S], value: &S, inv: &[S], tol: &S) -> std::result::Result<(), String> {
    let close = |a: &S, b: &S| {
        let d = if a > b { a.clone() - b.clone() } else { b.clone() - a.clone() };
        d <= tol.clone()
    };
    for e in trunc.edges() {
        if flow[e] < S::zero() - tol.clone() {
            return Err(format!("negative flow on edge {e}"));
        }
        if flow[e] > inv[trunc.level(e) as usize].clone() + tol.clone() {
            return Err(format!("edge {e} exceeds its capacity"));
        }
    }
    let out_root = trunc.children(trunc.root()).fold(S::zero(), |a, w| a + flow[w].clone());
    if !close(&out_root, value) {
        return Err("root outflow differs from the flow value".into());
    }
    for v in trunc.edges() {
        if trunc.is_open(v) {
            continue;
        }
        let out = trunc.children(v).fold(S::zero(), |a, w| a + flow[w].clone());
        if !close(&out, &flow[v]) {
            return Err(format!("conservation fails at vertex {v}"));
        }
    }
    Ok(())
}

/// Perron root of the transition matrix restricted to states reachable from
/// the root: the growth rate, which equals the branching number for periodic
/// trees. A finite tree is reported as 1.
pub fn br_exact_periodic(spec: &TreeSpec) -> Result<f64> {
    let p = spec
        .to_periodic()
        .ok_or_else(|| Error::Spec("the exact branching number needs a periodic spec".into()))?;
    if !spec.is_infinite() {
        log::warn!("tree is finite; reporting branching number 1 by convention");
        return Ok(1.0);
    }
    if p.has_childless_reachable_state() {
        log::warn!("spec has a reachable state without children");
    }
    Ok(perron_root(&p))
}

fn perron_root(p: &PeriodicSpec) -> f64 {
    let reach = p.reachable();
    let m = p.transition_matrix();
    let n = reach.len();
    let idx = |s: usize| reach.binary_search(&s).unwrap();
    // transitive closure over reachable states
    let mut r = vec![vec![false; n]; n];
    for (i, &s) in reach.iter().enumerate() {
        for &t in p.children(s) {
            r[i][idx(t)] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    let mut done = vec![false; n];
    let mut best: f64 = 0.0;
    for i in 0..n {
        if done[i] || !r[i][i] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&j| j == i || (r[i][j] && r[j][i])).collect();
        comp.iter().for_each(|&j| done[j] = true);
        let sub: Vec<Vec<f64>> = comp
            .iter()
            .map(|&a| comp.iter().map(|&b| m[reach[a]][reach[b]] as f64).collect())
            .collect();
        best = best.max(irreducible_perron_root(&sub));
    }
    best
}

/// Power iteration on `A + I`, which is primitive for irreducible `A`, with
/// Collatz–Wielandt bounds as the stopping rule.
fn irreducible_perron_root(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut x = vec![1.0; n];
    let mut estimate = 0.0;
    for _ in 0..1_000_000 {
        let y: Vec<f64> = (0..n).map(|i| x[i] + (0..n).map(|j| a[i][j] * x[j]).sum::<f64>()).collect();
        let ratios = y.iter().zip(&x).map(|(yi, xi)| yi / xi);
        let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        estimate = (lo + hi) / 2.0;
        let norm = y.iter().cloned().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / norm).collect();
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    estimate - 1.0
}

/// Outcome of a decay probe at a single rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Min-cut weights fell below [`DECAY_FLOOR`]: the rate is above br.
    Above,
    /// The per-state recursion reached a fixed point with weight at least
    /// [`DECAY_FLOOR`]: the rate is below br.
    Below,
    Indeterminate,
}

/// Min-cut weights `m_D` for `D = 1..=depth` computed on the state automaton
/// instead of an explicit truncation. `m_D` equals
/// `min_cut_weight(expand(spec, D), λ)`.
pub struct StateRecursion<'a> {
    spec: &'a PeriodicSpec,
    inv_lambda: f64,
    /// Subtree min-cut of a vertex of each state, relative to its own edge.
    g: Vec<f64>,
    depth: u32,
}

impl<'a> StateRecursion<'a> {
    pub fn new(spec: &'a PeriodicSpec, lambda: f64) -> Self {
        let g = (0..spec.state_count())
            .map(|s| if spec.children(s).is_empty() { 0.0 } else { 1.0 })
            .collect();
        StateRecursion { spec, inv_lambda: 1.0 / lambda, g, depth: 0 }
    }

    /// Current `m_D` (for `D = depth + 1`).
    pub fn min_cut(&self) -> f64 {
        self.inv_lambda * self.spec.children(self.spec.root()).iter().map(|&t| self.g[t]).sum::<f64>()
    }

    /// Advances one level; returns the sup-norm change of the state vector.
    pub fn advance(&mut self) -> f64 {
        let next: Vec<f64> = (0..self.spec.state_count())
            .map(|s| {
                let below = self.inv_lambda * self.spec.children(s).iter().map(|&t| self.g[t]).sum::<f64>();
                below.min(1.0)
            })
            .collect();
        let change = next.iter().zip(&self.g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        self.g = next;
        self.depth += 1;
        change
    }

    /// `m_D` for the truncation depth `D = depth + 1`.
    pub fn truncation_depth(&self) -> u32 {
        self.depth + 1
    }
}

/// Classifies `λ` against br by running the state recursion to `depth_max`.
pub fn classify_rate(spec: &PeriodicSpec, lambda: f64, depth_max: u32) -> Classification {
    let mut rec = StateRecursion::new(spec, lambda);
    loop {
        if rec.min_cut() < DECAY_FLOOR {
            return Classification::Above;
        }
        if rec.truncation_depth() >= depth_max {
            return Classification::Indeterminate;
        }
        let change = rec.advance();
        if change < FIXED_POINT_TOL && rec.min_cut() >= DECAY_FLOOR {
            return Classification::Below;
        }
    }
}

/// Limit of the min-cut weights at rate `λ`, i.e. `inf_Π Σ λ^{-|e|}`, read
/// off the per-state fixed point. `None` if the recursion has not settled
/// within `max_iter` levels.
pub fn cut_infimum(spec: &PeriodicSpec, lambda: f64, max_iter: u32) -> Option<f64> {
    let mut rec = StateRecursion::new(spec, lambda);
    for _ in 0..max_iter {
        if rec.advance() < FIXED_POINT_TOL {
            return Some(rec.min_cut());
        }
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct BrBracket {
    pub lo: f64,
    pub hi: f64,
    /// Set when some probe could not be classified within the depth limit.
    pub heuristic: bool,
    pub indeterminate_probes: Vec<f64>,
    pub probes: Vec<(f64, Classification)>,
}

impl BrBracket {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Brackets br by bisection on the decay of min-cut weights.
pub fn br_bracket(spec: &TreeSpec, tol: f64, depth_max: u32) -> Result<BrBracket> {
    if !(tol > 0.0) {
        return Err(Error::InvalidRate(format!("bracket tolerance {tol} must be positive")));
    }
    let p = spec
        .to_periodic()
        .ok_or_else(|| Error::Spec("bracketing needs a periodic or spherically symmetric spec".into()))?;
    if !spec.is_infinite() {
        return Err(Error::Spec("bracketing needs an infinite tree".into()));
    }
    let mut lo = 1.0;
    let mut hi = p.max_children() as f64;
    let mut out = BrBracket { lo, hi, heuristic: false, indeterminate_probes: vec![], probes: vec![] };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let class = classify_rate(&p, mid, depth_max);
        out.probes.push((mid, class));
        match class {
            Classification::Above => hi = mid,
            Classification::Below => lo = mid,
            Classification::Indeterminate => {
                out.indeterminate_probes.push(mid);
                // try to pin a width-tol window around the undecided probe
                let (a, b) = ((mid - tol / 2.0).max(lo), (mid + tol / 2.0).min(hi));
                let ca = classify_rate(&p, a, depth_max);
                let cb = classify_rate(&p, b, depth_max);
                out.probes.push((a, ca));
                out.probes.push((b, cb));
                if ca == Classification::Below {
                    lo = a;
                }
                if cb == Classification::Above {
                    hi = b;
                }
                if ca != Classification::Below || cb != Classification::Above {
                    out.heuristic = true;
                }
                break;
            }
        }
    }
    out.lo = lo;
    out.hi = hi;
    Ok(out)
}

/// Constants witnessing that `f_n = ⌊λⁿ⌋` cannot contain the fire started on
/// `B_r(k)`.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundCertificate {
    pub lambda: Rate,
    pub mu: f64,
    pub c: f64,
    pub epsilon: f64,
    pub k: u32,
    pub br: f64,
}

/// Builds a non-containment certificate for `λ < br`.
pub fn lower_bound_certificate(spec: &TreeSpec, lambda: &Rate) -> Result<LowerBoundCertificate> {
    let p = spec
        .to_periodic()
        .ok_or_else(|| Error::Spec("certificates need a periodic or spherically symmetric spec".into()))?;
    let br = br_exact_periodic(spec)?;
    let l = lambda.to_f64();
    if l >= br {
        return Err(Error::RateNotBelowBranching { lambda: l, br });
    }
    let mu = 0.5 * (l + br);
    let c = summation_constant(lambda)?;
    let inf = cut_infimum(&p, mu, 10_000_000)
        .ok_or_else(|| Error::Spec(format!("cut recursion at μ = {mu} did not settle")))?;
    let epsilon = EPSILON_SAFETY * inf;
    let r = l / mu;
    let mut k = 0u32;
    while c * r.powi(k as i32 + 1) / (1.0 - r) >= epsilon {
        k += 1;
    }
    Ok(LowerBoundCertificate { lambda: lambda.clone(), mu, c, epsilon, k, br })
}

/// A constant `C` with `Σ_{i≤n} ⌊λ^i⌋ ≤ C·λⁿ` for all `n ≥ 1`.
fn summation_constant(lambda: &Rate) -> Result<f64> {
    let l = lambda.to_f64();
    let one = match lambda {
        Rate::Exact(r) => r.is_one(),
        Rate::Float(x) => *x == 1.0,
    };
    if one {
        return Err(Error::InvalidRate("λ = 1 gives budget sums n, which no C·λⁿ bounds".into()));
    }
    if l < 1.0 {
        // ⌊λ^i⌋ = 0 for every i ≥ 1
        return Ok(1.0);
    }
    // The geometric bound is also the supremum of the partial ratios, so
    // no tighter constant holds for every n.
    Ok(l / (l - 1.0))
}

/// Independent re-evaluation of a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateCheck {
    pub ordering: bool,
    pub summation: bool,
    pub cut_bound: bool,
    pub tail: bool,
}

impl CertificateCheck {
    pub fn all(&self) -> bool {
        self.ordering && self.summation && self.cut_bound && self.tail
    }
}

impl LowerBoundCertificate {
    /// Re-checks the certificate: the budget sums exactly up to `horizon`
    /// plus the analytic bound, every cutset up to `cut_depth` on explicit
    /// truncations plus the fixed point, and the geometric tail.
    pub fn verify(&self, spec: &TreeSpec, horizon: u32, cut_depth: u32) -> Result<CertificateCheck> {
        let l = self.lambda.to_f64();
        let ordering = l < self.mu && self.mu < self.br && self.c > 0.0 && self.epsilon > 0.0;

        let c_exact = BigRational::from_float(self.c).unwrap_or_default();
        let lambda_exact = match &self.lambda {
            Rate::Exact(r) => r.clone(),
            Rate::Float(x) => BigRational::from_float(*x).unwrap_or_default(),
        };
        let budget = BudgetSequence::ExponentialFloor(self.lambda.clone());
        let mut sum = BigInt::zero();
        let mut summation = true;
        for n in 1..=horizon {
            sum += BigInt::from(budget.value_big(n));
            let bound = &c_exact * pow_rational(&lambda_exact, n);
            if BigRational::from_integer(sum.clone()) > bound {
                summation = false;
                break;
            }
        }
        if l > 1.0 && self.c < l / (l - 1.0) {
            summation = false;
        }

        let mu = Rate::float(self.mu)?;
        let mut cut_bound = (1..=cut_depth).all(|d| {
            expand(spec, d)
                .and_then(|t| min_cut_weight(&t, &mu))
                .map(|w| w.to_f64() > self.epsilon)
                .unwrap_or(false)
        });
        if let Some(p) = spec.to_periodic() {
            cut_bound &= cut_infimum(&p, self.mu, 10_000_000).is_some_and(|m| m > self.epsilon);
        }

        let r = l / self.mu;
        let tail = r < 1.0 && self.c * r.powi(self.k as i32 + 1) / (1.0 - r) < self.epsilon;
        Ok(CertificateCheck { ordering, summation, cut_bound, tail })
    }
}

/// `min_cut_weight` at a set of depths, evaluated as a batch.
pub fn min_cut_profile(spec: &TreeSpec, rate: &Rate, depths: &[u32], exec: Exec) -> Result<Vec<Weight>> {
    exec.map(depths, |&d| expand(spec, d).and_then(|t| min_cut_weight(&t, rate)))
        .into_iter()
        .collect()
}

/// Exact `λ^{-n}` for a rational rate, exposed for oracles and reports.
pub fn exact_capacity(lambda: &BigRational, level: u32) -> BigRational {
    pow_rational(&lambda.recip(), level)
}
