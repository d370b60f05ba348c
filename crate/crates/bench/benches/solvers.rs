//! Criterion benchmarks: exact solver across the small grid's sizes, the
//! heuristic at desk and stress scales, and model export.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sacrp_bench::fixture;
use sacrp_core::{solve_dp, solve_greedy, write_model, DpOptions};

fn bench_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("dp");
    group.sample_size(10);
    for (d, w, h) in [(5, 8, 8), (10, 12, 12), (15, 16, 16)] {
        let instance = fixture(d, w, h, 1);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("d{d}_w{w}_h{h}")),
            &instance,
            |b, inst| {
                b.iter(|| {
                    solve_dp(inst, &DpOptions::default())
                        .unwrap()
                        .solution
                        .unwrap()
                        .total_energy()
                })
            },
        );
    }
    group.finish();
}

fn bench_dominance_rules(c: &mut Criterion) {
    let mut group = c.benchmark_group("dp-rules");
    group.sample_size(10);
    let instance = fixture(12, 12, 12, 1);
    for (label, rules) in [("on", true), ("off", false)] {
        let options = DpOptions {
            rule1: rules,
            rule2: rules,
            rule3: rules,
            ..DpOptions::default()
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(label),
            &options,
            |b, options| {
                b.iter(|| {
                    solve_dp(&instance, options)
                        .unwrap()
                        .solution
                        .unwrap()
                        .total_energy()
                })
            },
        );
    }
    group.finish();
}

fn bench_heuristic(c: &mut Criterion) {
    let mut group = c.benchmark_group("greedy");
    for (d, w, h) in [(15, 16, 16), (24, 28, 28)] {
        let instance = fixture(d, w, h, 1);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("d{d}_w{w}_h{h}")),
            &instance,
            |b, inst| b.iter(|| solve_greedy(inst).unwrap().0.total_energy()),
        );
    }
    group.finish();
}

fn bench_export(c: &mut Criterion) {
    let instance = fixture(15, 16, 16, 1);
    c.bench_function("export-lp/d15_w16_h16", |b| {
        b.iter(|| {
            let mut buf = Vec::new();
            write_model(&instance, &mut buf).unwrap();
            buf.len()
        })
    });
}

criterion_group!(
    benches,
    bench_exact,
    bench_dominance_rules,
    bench_heuristic,
    bench_export
);
criterion_main!(benches);
