mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use firefight::game::{
    feasibility_check, feasibility_on_truncation, simulate, simulate_from, synthesize_cutset_strategy, BudgetSequence,
    Status, Strategy as Play,
};
use firefight::oracle::{brute_force_containment, triangle_case, CorpusEntry, SearchMode};
use firefight::{expand, Rate, TreeSpec, VertexId};

use common::{explicit_tree, relabel};

fn catalogue() -> Vec<BudgetSequence> {
    ["const:1", "const:2", "exp:3/2", "exp:2", "list:2,1", "list:1,0,3"].iter().map(|s| s.parse().unwrap()).collect()
}

fn budget() -> impl proptest::strategy::Strategy<Value = BudgetSequence> {
    (0usize..6).prop_map(|i| catalogue()[i].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn fire_and_protection_only_grow(e in explicit_tree(14), k in 0u32..2, b in budget(), seed in any::<u64>()) {
        let spec = TreeSpec::Explicit(e);
        let t = expand(&spec, 14).unwrap();
        let cut: Vec<VertexId> = (0..t.len()).filter(|v| v % 3 == (seed % 3) as usize).collect();
        let sim = simulate(&t, k, &Play::canonical(cut), &b, 16).unwrap();
        let mut burning: BTreeSet<VertexId> = sim.trace.initial_fire.iter().copied().collect();
        let mut protected = BTreeSet::new();
        for r in &sim.trace.rounds {
            for &v in &r.protected {
                prop_assert!(protected.insert(v));
                prop_assert!(!burning.contains(&v));
            }
            for &v in &r.burned {
                prop_assert!(burning.insert(v));
                prop_assert!(!protected.contains(&v));
            }
        }
    }

    #[test]
    fn smaller_fires_are_contained_too(e in explicit_tree(12), k in 0u32..3, b in budget(), mask in any::<u16>()) {
        let spec = TreeSpec::Explicit(e);
        let entry = CorpusEntry { spec: spec.clone(), k };
        let height = match &spec { TreeSpec::Explicit(e) => e.height(), _ => unreachable!() };
        let t = expand(&spec, height.max(k + 1)).unwrap();
        let ball: Vec<VertexId> = t.ball(k).unwrap().collect();
        let horizon = t.depth() + 2;
        let decision = brute_force_containment(&t, &ball, &b, horizon, SearchMode::Threatened).unwrap();
        let Some(strategy) = decision.schedule() else { return Ok(()) };
        let subset: Vec<VertexId> = ball.iter().copied().filter(|&v| mask & (1 << (v % 16)) != 0).collect();
        if subset.is_empty() {
            return Ok(());
        }
        let sim = simulate_from(&t, &subset, &strategy, &b, horizon).unwrap();
        prop_assert!(sim.verdict.is_contained(), "{:?}", entry.spec);
    }

    #[test]
    fn search_feasibility_and_canonical_play_agree(e in explicit_tree(10), k in 0u32..3, b in budget()) {
        let case = triangle_case(&CorpusEntry { spec: TreeSpec::Explicit(e), k }, &b).unwrap();
        prop_assert!(case.agrees(), "{case:?}");
    }

    #[test]
    fn search_modes_agree(e in explicit_tree(11), b in budget()) {
        let spec = TreeSpec::Explicit(e.clone());
        let t = expand(&spec, e.height().max(1)).unwrap();
        let horizon = t.depth() + 2;
        let strict = brute_force_containment(&t, &[0], &b, horizon, SearchMode::Strict).unwrap();
        let threatened = brute_force_containment(&t, &[0], &b, horizon, SearchMode::Threatened).unwrap();
        let frontier = brute_force_containment(&t, &[0], &b, horizon, SearchMode::Frontier).unwrap();
        prop_assert_eq!(strict.is_feasible(), threatened.is_feasible());
        prop_assert_eq!(strict.is_feasible(), frontier.is_feasible());
    }

    #[test]
    fn feasibility_ignores_child_order(e in explicit_tree(14), k in 0u32..3, b in budget(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (shuffled, _) = relabel(&e, &mut rng);
        let d = e.height().max(k + 1);
        let a = feasibility_on_truncation(&expand(&TreeSpec::Explicit(e), d).unwrap(), k, &b);
        let c = feasibility_on_truncation(&expand(&TreeSpec::Explicit(shuffled), d).unwrap(), k, &b);
        prop_assert_eq!(a.is_feasible(), c.is_feasible());
    }

    #[test]
    fn larger_budgets_keep_feasibility(e in explicit_tree(14), k in 0u32..3, base in prop::collection::vec(0u64..3, 1..6), extra in prop::collection::vec(0u64..3, 6)) {
        let small = BudgetSequence::Explicit(base.clone());
        let big = BudgetSequence::Explicit(base.iter().zip(&extra).map(|(a, b)| a + b).collect());
        let t = expand(&TreeSpec::Explicit(e.clone()), e.height().max(k + 1)).unwrap();
        if feasibility_on_truncation(&t, k, &small).is_feasible() {
            prop_assert!(feasibility_on_truncation(&t, k, &big).is_feasible());
        }
    }

    #[test]
    fn canonical_play_ignores_target_order(e in explicit_tree(14), k in 0u32..2, b in budget(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let spec = TreeSpec::Explicit(e.clone());
        let t = expand(&spec, e.height().max(k + 1)).unwrap();
        let Some(cut) = feasibility_on_truncation(&t, k, &b).witness_vertices().map(<[_]>::to_vec) else { return Ok(()) };
        let mut shuffled = cut.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = simulate(&t, k, &Play::canonical(cut), &b, t.depth() + 2).unwrap();
        let c = simulate(&t, k, &Play::canonical(shuffled), &b, t.depth() + 2).unwrap();
        prop_assert_eq!(a.verdict, c.verdict);
        prop_assert!(a.verdict.is_contained());
    }
}

#[test]
fn feasibility_is_monotone_in_depth_on_symmetric_trees() {
    for b in catalogue() {
        for k in 0..3 {
            let mut was = false;
            for d in k + 1..=14 {
                let now = feasibility_check(&TreeSpec::regular(2), k, &b, d).unwrap().is_feasible();
                assert!(!was || now, "{b} k={k} D={d}");
                was = now;
            }
        }
    }
}

#[test]
fn synthesized_strategies_never_fault() {
    let cases = [
        (TreeSpec::regular(2), Rate::integer(3).unwrap(), 0..=3),
        (TreeSpec::regular(2), Rate::ratio(5, 2).unwrap(), 0..=2),
        (TreeSpec::fibonacci(), Rate::integer(2).unwrap(), 0..=2),
        (TreeSpec::fibonacci(), Rate::float(2.5).unwrap(), 0..=2),
        (TreeSpec::regular(3), Rate::integer(4).unwrap(), 0..=1),
    ];
    for (spec, lambda, ks) in cases {
        for k in ks {
            let plan = synthesize_cutset_strategy(&spec, &lambda, k, 16).unwrap();
            let budget = BudgetSequence::ExponentialFloor(lambda.clone());
            // simulate rejects any over-budget or burning protection with an error
            let sim = simulate(&plan.truncation, k, &plan.strategy, &budget, plan.depth + 2).unwrap();
            assert!(sim.verdict.is_contained(), "{spec:?} λ={lambda} k={k}");
            let state_ok = sim.trace.rounds.iter().all(|r| r.protected.len() as u64 <= r.budget);
            assert!(state_ok);
        }
    }
}

#[test]
fn corpus_files_pass_the_triangle() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let spec = TreeSpec::from_file(&path).unwrap();
        for k in 0..2 {
            for b in catalogue() {
                let case = triangle_case(&CorpusEntry { spec: spec.clone(), k }, &b).unwrap();
                assert!(case.agrees(), "{} k={k} {b}: {case:?}", path.display());
            }
        }
    }
}

#[test]
fn status_of_protected_vertices() {
    let t = expand(&TreeSpec::ray(), 3).unwrap();
    let sim = simulate(&t, 0, &Play::schedule([(1, vec![1])]), &BudgetSequence::Constant(1), 5).unwrap();
    assert!(sim.verdict.is_contained());
    let state = firefight::game::step(&t, &firefight::game::GameState::new(&t, [0]).unwrap(), &[1], 1).unwrap().state;
    assert_eq!(state.status(1), Status::Protected);
    assert_eq!(state.status(2), Status::Untouched);
}
