use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use elemdyn_bench::{dense_block, example_system, projection, schedule};
use elemdyn_core::criteria::{check_hypercyclicity_condition, find_cosine_split, DecayRule, Side};
use elemdyn_core::structured::build_example_w;
use elemdyn_core::witnesses::transitive_witness;
use elemdyn_core::SubspaceSpec;

fn compression_norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("norm_power_proj");
    for n in [8i64, 64, 512] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let w = build_example_w().with_memo_horizon(0);
            let s = SubspaceSpec::leading(16);
            b.iter(|| w.norm_power_proj(black_box(n), &s).unwrap())
        });
    }
    g.finish();
}

fn t_apply(c: &mut Criterion) {
    let sys = example_system();
    let f = projection(32);
    c.bench_function("t_apply P_32 n=64", |b| {
        b.iter(|| sys.t_apply(black_box(64), &f).unwrap())
    });
    c.bench_function("cosine_apply P_32 n=64", |b| {
        b.iter(|| sys.cosine_apply(black_box(64), &f).unwrap())
    });
}

fn norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("operator_norm");
    for size in [4u64, 16, 48] {
        let f = dense_block(size);
        g.bench_with_input(BenchmarkId::from_parameter(size), &f, |b, f| {
            b.iter(|| f.operator_norm().unwrap())
        });
    }
    g.finish();
}

fn criteria(c: &mut Criterion) {
    let w = build_example_w();
    let rule = DecayRule::default();
    let sched = schedule(25);
    c.bench_function("hypercyclicity m=3 k<=25", |b| {
        b.iter(|| check_hypercyclicity_condition(&w, 3, &sched, &rule).unwrap())
    });
    let sched20 = schedule(20);
    c.bench_function("cosine split m=8 k<=20", |b| {
        b.iter(|| find_cosine_split(&w, 8, &sched20, &rule, Side::Right).unwrap())
    });
    let sys = example_system();
    let p2 = projection(2);
    c.bench_function("transitive witness P_2 k<=25", |b| {
        b.iter(|| transitive_witness(&sys, &p2, &p2, 2, &sched, &rule).unwrap())
    });
}

criterion_group!(benches, compression_norms, t_apply, norms, criteria);
criterion_main!(benches);
