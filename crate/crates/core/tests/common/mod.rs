#![allow(dead_code)]

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use firefight::{ExplicitSpec, PeriodicSpec, Rate, TreeSpec};

/// Explicit trees with up to `max_edges` edges, parents drawn among earlier
/// vertices, and some leaves closed.
pub fn explicit_tree(max_edges: usize) -> impl Strategy<Value = ExplicitSpec> {
    (1..=max_edges)
        .prop_flat_map(|m| (prop::collection::vec(any::<prop::sample::Index>(), m), prop::collection::vec(any::<bool>(), m)))
        .prop_map(|(picks, close)| {
            let parents: Vec<usize> = picks.iter().enumerate().map(|(i, p)| p.index(i + 1)).collect();
            let mut has_child = vec![false; parents.len() + 1];
            parents.iter().for_each(|&p| has_child[p] = true);
            let closed: Vec<usize> = (1..=parents.len()).filter(|&v| !has_child[v] && close[v - 1]).collect();
            ExplicitSpec::new(parents, closed).unwrap()
        })
}

/// Periodic specs with 1 to 3 states and at most 3 children per state.
pub fn periodic_spec() -> impl Strategy<Value = PeriodicSpec> {
    (1usize..=3)
        .prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0..n, 0..=3), n))
        .prop_map(|kids| {
            let names: Vec<String> = (0..kids.len()).map(|i| format!("S{i}")).collect();
            let states: Vec<(String, Vec<String>)> = kids
                .iter()
                .enumerate()
                .map(|(i, ks)| (names[i].clone(), ks.iter().map(|&k| names[k].clone()).collect()))
                .collect();
            PeriodicSpec::new("S0", &states).unwrap()
        })
}

/// Periodic specs whose tree is infinite.
pub fn infinite_periodic_spec() -> impl Strategy<Value = PeriodicSpec> {
    periodic_spec().prop_filter("infinite tree", |p| TreeSpec::Periodic(p.clone()).is_infinite())
}

pub fn rates() -> Vec<Rate> {
    vec![
        Rate::ratio(1, 2).unwrap(),
        Rate::integer(1).unwrap(),
        Rate::ratio(3, 2).unwrap(),
        Rate::integer(2).unwrap(),
        Rate::float(std::f64::consts::E).unwrap(),
        Rate::float(1.3).unwrap(),
    ]
}

/// The same tree with vertex labels permuted (root kept at 0).
pub fn relabel(spec: &ExplicitSpec, rng: &mut impl Rng) -> (ExplicitSpec, Vec<usize>) {
    let n = spec.vertex_count();
    let mut perm: Vec<usize> = (1..n).collect();
    perm.shuffle(rng);
    let mut map = vec![0; n];
    for (old, &new) in (1..n).zip(&perm) {
        map[old] = new;
    }
    let mut parents = vec![0; n - 1];
    for (i, &p) in spec.parents().iter().enumerate() {
        parents[map[i + 1] - 1] = map[p];
    }
    let closed: Vec<usize> = spec.closed().iter().map(|&c| map[c]).collect();
    (ExplicitSpec::new(parents, closed).unwrap(), map)
}
