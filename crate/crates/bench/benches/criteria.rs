use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use realization_bench::{minimal_system, nonminimal_system, seventeen_state_rows};
use realization_core::echelon::{block_echelon_reduce, build_selector_t};
use realization_core::feedback::minimality_equivalence_report;
use realization_core::minimality::{is_minimal, rank_formula_check};
use realization_core::numeric::spectrum;
use realization_core::squaring::square_realization;
use realization_core::Tolerances;
use std::hint::black_box;

fn minimality(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("is_minimal");
    for n in [4, 8, 12] {
        let r = minimal_system(n, 2, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &r, |b, r| {
            b.iter(|| is_minimal(black_box(r), &tol).unwrap())
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum_L");
    for n in [4, 8, 12] {
        let l = minimal_system(n, 3, 3).assemble_l().l;
        group.bench_with_input(BenchmarkId::from_parameter(n), &l, |b, l| {
            b.iter(|| spectrum(black_box(l)).unwrap())
        });
    }
    group.finish();
}

fn echelon(c: &mut Criterion) {
    let tol = Tolerances::default();
    let (spec, b) = seventeen_state_rows();
    c.bench_function("block_echelon_reduce/17x8", |bench| {
        bench.iter(|| block_echelon_reduce(black_box(&b), &spec, &tol).unwrap())
    });
    c.bench_function("build_selector_t/17x8", |bench| {
        bench.iter(|| build_selector_t(black_box(&b), &spec, &tol, 1).unwrap())
    });
}

fn squaring_and_rank(c: &mut Criterion) {
    let tol = Tolerances::default();
    let r = minimal_system(6, 3, 3);
    c.bench_function("square_realization/n6", |b| {
        b.iter(|| square_realization(black_box(&r), &tol, 5).unwrap())
    });
    c.bench_function("rank_formula_check/n6", |b| {
        b.iter(|| rank_formula_check(black_box(&r), &tol).unwrap())
    });
}

fn report(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("equivalence_report");
    group.sample_size(20);
    let minimal = minimal_system(6, 2, 3);
    let duplicated = nonminimal_system(3, 2, 3);
    group.bench_function("minimal_n6", |b| {
        b.iter(|| minimality_equivalence_report(black_box(&minimal), &tol, 7).unwrap())
    });
    group.bench_function("duplicated_n6", |b| {
        b.iter(|| minimality_equivalence_report(black_box(&duplicated), &tol, 7).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    minimality,
    spectra,
    echelon,
    squaring_and_rank,
    report
);
criterion_main!(benches);
