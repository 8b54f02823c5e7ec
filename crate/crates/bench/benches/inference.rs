use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use pathint_bench::spread_state;
use pathint_core::cli_io::builtin::{firemen_6x3, holiday_42};
use pathint_core::controller::JointController;
use pathint_core::endcost::firemen_factors;
use pathint_core::inference::{brute_force, infer};
use pathint_core::UnaryLogZTable;

fn holiday_control(c: &mut Criterion) {
    let s = holiday_42();
    let controller = JointController::new(&s).unwrap();
    let state = spread_state(&s, 0.5);
    c.bench_function("holiday-42 joint control", |b| {
        b.iter(|| controller.control(black_box(&state)).unwrap())
    });
}

fn firemen_control(c: &mut Criterion) {
    let s = firemen_6x3();
    let controller = JointController::new(&s).unwrap();
    let state = spread_state(&s, 0.5);
    c.bench_function("firemen-6x3 joint control", |b| {
        b.iter(|| controller.control(black_box(&state)).unwrap())
    });
}

fn exact_vs_enumeration(c: &mut Criterion) {
    let (n, m) = (8, 3);
    let ec = firemen_factors(n, m, 1.0).unwrap();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|a| (0..m).map(|s| ((a * m + s) as f64).sin()).collect())
        .collect();
    let tables = UnaryLogZTable::new(rows).unwrap();
    let mut group = c.benchmark_group("firemen 8x3 inference");
    group.bench_function("clique tree", |b| b.iter(|| infer(black_box(&tables), &ec, 1.0).unwrap()));
    group.bench_function("enumeration", |b| {
        b.iter(|| brute_force(black_box(&tables), &ec, 1.0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, holiday_control, firemen_control, exact_vs_enumeration);
criterion_main!(benches);
