mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use firefight::branching::{br_bracket, br_exact_periodic, cut_weight, max_flow, min_cut_weight};
use firefight::oracle::enumerate_cutsets;
use firefight::{expand, expand_with_cap, Rate, TreeSpec, Weight};

use common::{explicit_tree, infinite_periodic_spec, periodic_spec, rates, relabel};

const CAP: usize = 200_000;

fn same(a: &Weight, b: &Weight) -> bool {
    a.approx_eq(b, 1e-9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn level_counts_follow_the_state_recursion(p in periodic_spec(), d in 0u32..=12) {
        let spec = TreeSpec::Periodic(p.clone());
        let Ok(t) = expand_with_cap(&spec, d, CAP) else { return Ok(()) };
        let counts = t.level_counts();
        for n in 0..d as usize {
            let next: usize = t.vertices_at(n as u32).map(|v| p.children(t.state(v).unwrap() as usize).len()).sum();
            prop_assert_eq!(counts[n + 1], next);
        }
    }

    #[test]
    fn truncations_are_prefix_stable(p in periodic_spec(), d in 1u32..=9, cut in 0u32..9) {
        let spec = TreeSpec::Periodic(p);
        let Ok(t) = expand_with_cap(&spec, d, CAP) else { return Ok(()) };
        let d2 = cut % d;
        let direct = expand(&spec, d2).unwrap();
        let pre = t.prefix(d2);
        prop_assert_eq!(pre.len(), direct.len());
        for v in 0..pre.len() {
            prop_assert_eq!(pre.parent(v), direct.parent(v));
            prop_assert_eq!(pre.is_open(v), direct.is_open(v));
            prop_assert_eq!(pre.state(v), direct.state(v));
        }
    }

    #[test]
    fn edge_levels_on_symmetric_trees(pre in prop::collection::vec(1u32..=3, 0..3), per in prop::collection::vec(1u32..=3, 1..3), d in 1u32..=7) {
        let spec = TreeSpec::spherically_symmetric(pre, per).unwrap();
        let t = expand(&spec, d).unwrap();
        let lambda = Rate::ratio(3, 2).unwrap();
        let counts = t.level_counts();
        for n in 1..=d {
            let edges: Vec<usize> = t.vertices_at(n).collect();
            let w = cut_weight(&t.prefix(n), &firefight::branching::Cutset::new(edges), &lambda).unwrap();
            let expected = Rate::ratio(2, 3).unwrap();
            let expected = match expected {
                Rate::Exact(q) => Weight::Exact(num_traits::pow(q, n as usize) * num_rational::BigRational::from_integer(counts[n as usize].into())),
                Rate::Float(_) => unreachable!(),
            };
            prop_assert_eq!(w, expected);
        }
    }

    #[test]
    fn flow_equals_cut_on_periodic_truncations(p in periodic_spec(), d in 1u32..=8, which in 0usize..6) {
        let spec = TreeSpec::Periodic(p);
        let Ok(t) = expand_with_cap(&spec, d, CAP) else { return Ok(()) };
        let rate = &rates()[which];
        let flow = max_flow(&t, rate);
        prop_assert!(flow.check(&t, rate, 1e-9).is_ok());
        let cut = min_cut_weight(&t, rate).unwrap();
        if rate.is_exact() {
            prop_assert_eq!(&flow.value, &cut);
        } else {
            prop_assert!(same(&flow.value, &cut));
        }
    }

    #[test]
    fn min_cut_never_grows_with_depth(p in periodic_spec(), d in 1u32..=8, which in 0usize..6) {
        let spec = TreeSpec::Periodic(p);
        let rate = &rates()[which];
        let Ok(deep) = expand_with_cap(&spec, d + 1, CAP) else { return Ok(()) };
        let a = min_cut_weight(&deep.prefix(d), rate).unwrap();
        let b = min_cut_weight(&deep, rate).unwrap();
        prop_assert!(b.to_f64() <= a.to_f64() + 1e-12);
    }

    #[test]
    fn enumerated_cutsets_attain_the_min_cut(e in explicit_tree(12), which in 0usize..4) {
        let spec = TreeSpec::Explicit(e);
        let t = expand(&spec, 12).unwrap();
        let rate = &rates()[which];
        let cuts = enumerate_cutsets(&t, 12).unwrap();
        let best = cuts
            .iter()
            .map(|c| cut_weight(&t, c, rate).unwrap())
            .min_by(|a, b| a.partial_cmp(b).unwrap());
        match best {
            Some(w) => prop_assert_eq!(w, min_cut_weight(&t, rate).unwrap()),
            // no cutset at all: every leaf is closed and the empty cut is the only one
            None => prop_assert!(false, "enumeration always yields at least the empty cutset"),
        }
    }

    #[test]
    fn cuts_and_flows_ignore_child_order(e in explicit_tree(14), seed in any::<u64>(), which in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (shuffled, _) = relabel(&e, &mut rng);
        let rate = &rates()[which];
        let a = expand(&TreeSpec::Explicit(e), 14).unwrap();
        let b = expand(&TreeSpec::Explicit(shuffled), 14).unwrap();
        prop_assert!(same(&min_cut_weight(&a, rate).unwrap(), &min_cut_weight(&b, rate).unwrap()));
        prop_assert!(same(&max_flow(&a, rate).value, &max_flow(&b, rate).value));
    }

    #[test]
    fn bracket_contains_the_exact_value(p in infinite_periodic_spec()) {
        let spec = TreeSpec::Periodic(p);
        let br = br_exact_periodic(&spec).unwrap();
        let bracket = br_bracket(&spec, 0.02, 100_000).unwrap();
        prop_assert!(bracket.lo - 1e-9 <= br && br <= bracket.hi + 1e-9, "{br} not in {:?}", bracket);
    }
}

#[test]
fn min_cut_strictly_decreases_above_br() {
    for (spec, lambda) in [
        (TreeSpec::regular(2), Rate::integer(3).unwrap()),
        (TreeSpec::fibonacci(), Rate::integer(2).unwrap()),
        (TreeSpec::regular(3), Rate::float(3.5).unwrap()),
    ] {
        let weights: Vec<f64> =
            (1..=10).map(|d| min_cut_weight(&expand(&spec, d).unwrap(), &lambda).unwrap().to_f64()).collect();
        assert!(weights.windows(2).all(|w| w[1] < w[0]), "{spec:?}: {weights:?}");
    }
}

#[test]
fn corpus_files_parse_and_cut() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let spec = TreeSpec::from_file(entry.unwrap().path()).unwrap();
        let TreeSpec::Explicit(e) = &spec else { panic!("corpus holds explicit trees") };
        let t = expand(&spec, e.height()).unwrap();
        let r = Rate::ratio(3, 2).unwrap();
        let brute = enumerate_cutsets(&t, 32)
            .unwrap()
            .iter()
            .map(|c| cut_weight(&t, c, &r).unwrap())
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        assert_eq!(brute, min_cut_weight(&t, &r).unwrap());
        seen += 1;
    }
    assert!(seen >= 8);
}
