use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use firefight::branching::min_cut_profile;
use firefight::game::BudgetSequence;
use firefight::oracle::{random_corpus, run_triangle};
use firefight::{Exec, Rate, TreeSpec};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn triangle(c: &mut Criterion) {
    let corpus = random_corpus(7, 200, 10);
    let budgets: Vec<BudgetSequence> =
        ["const:1", "const:2", "exp:3/2", "exp:2", "list:2,1"].iter().map(|s| s.parse().unwrap()).collect();
    let mut group = c.benchmark_group("triangle");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, corpus.len()), &exec, |b, &exec| {
            b.iter(|| run_triangle(&corpus, &budgets, exec).unwrap())
        });
    }
    group.finish();
}

fn cut_profile(c: &mut Criterion) {
    let depths: Vec<u32> = (1..=10).collect();
    let mut group = c.benchmark_group("min_cut_profile");
    group.sample_size(10);
    for (label, spec, rate) in [
        ("ternary-exact", TreeSpec::regular(3), Rate::ratio(7, 2).unwrap()),
        ("fibonacci-float", TreeSpec::fibonacci(), Rate::float(1.7).unwrap()),
    ] {
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, label), &exec, |b, &exec| {
                b.iter(|| min_cut_profile(&spec, &rate, &depths, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, triangle, cut_profile);
criterion_main!(benches);
