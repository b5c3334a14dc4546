use std::collections::HashMap;

use firefight::branching::br_bracket;
use firefight::cayley::{free_group_tree, sphere_sizes, CayleyBall, GroupModel};
use firefight::game::Arena;
use firefight::{expand, TreeSpec};

const BUILT_INS: [&str; 8] = ["free:1", "free:2", "free:3", "zd:1", "zd:2", "zd:3", "dinf", "freeprod:2,3"];

fn model(s: &str) -> GroupModel {
    s.parse().unwrap()
}

#[test]
fn free_group_tree_is_the_ball() {
    for r in 1..=3 {
        let m = GroupModel::Free { rank: r };
        let ball = CayleyBall::build(&m, 5, usize::MAX).unwrap();
        let t = expand(&ball.lex_min_tree(), 5).unwrap();
        let edges: usize = (0..ball.len()).map(|v| {
            let mut n = 0;
            ball.for_each_neighbor(v, &mut |_| n += 1);
            n
        }).sum::<usize>() / 2;
        assert_eq!(edges, ball.len() - 1, "the ball of a free group is a tree");
        assert_eq!(t.level_counts(), ball.sphere_sizes());
    }
}

#[test]
fn construction_is_deterministic() {
    for name in BUILT_INS {
        let a = CayleyBall::build(&model(name), 5, usize::MAX).unwrap();
        let b = CayleyBall::build(&model(name), 5, usize::MAX).unwrap();
        let words_a: Vec<_> = (0..a.len()).map(|v| a.word(v)).collect();
        let words_b: Vec<_> = (0..b.len()).map(|v| b.word(v)).collect();
        assert_eq!(words_a, words_b);
        assert_eq!(a.lex_min_tree(), b.lex_min_tree());
    }
}

#[test]
fn growth_matches_the_free_group_tree() {
    for r in 1..=3u32 {
        let spec = free_group_tree(r).unwrap();
        let bracket = br_bracket(&spec, 0.01, 100_000).unwrap();
        assert!(bracket.contains(f64::from(2 * r - 1)), "rank {r}: {bracket:?}");
    }
}

#[test]
fn more_generators_bigger_spheres() {
    for (small, big) in [("free:1", "free:2"), ("free:2", "free:3"), ("zd:1", "zd:2"), ("zd:2", "zd:3")] {
        let a = sphere_sizes(&model(small), 8, usize::MAX).unwrap();
        let b = sphere_sizes(&model(big), 8, usize::MAX).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x <= y), "{small} vs {big}");
    }
}

#[test]
fn lex_min_words_are_minimal_geodesics() {
    for name in ["zd:2", "freeprod:2,3", "dinf"] {
        let m = model(name);
        let ball = CayleyBall::build(&m, 4, usize::MAX).unwrap();
        let gens = m.generator_count();
        let mut best: HashMap<Vec<i32>, Vec<usize>> = HashMap::new();
        let mut words: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..=4 {
            for w in &words {
                let x = m.evaluate(w);
                best.entry(x).and_modify(|b| {
                    if (w.len(), w) < (b.len(), &*b) {
                        *b = w.clone();
                    }
                }).or_insert_with(|| w.clone());
            }
            words = words.iter().flat_map(|w| (0..gens).map(move |g| [w.as_slice(), &[g]].concat())).collect();
        }
        for v in 0..ball.len() {
            assert_eq!(&ball.word(v), &best[ball.element(v)], "{name} vertex {v}");
        }
    }
}

#[test]
fn exported_trees_are_valid_specs() {
    let ball = CayleyBall::build(&model("zd:2"), 3, usize::MAX).unwrap();
    let text = ball.lex_min_tree().to_toml_string();
    let back = TreeSpec::from_toml_str(&text).unwrap();
    assert_eq!(back, ball.lex_min_tree());
}
