use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use seqpovm::linalg::{herm_eig, DEFAULT_TOL};
use seqpovm::sequential::run_exact;
use seqpovm::usd::{scenario, ScenarioKind, UsdInput};
use seqpovm::{execute_exact, naive_naimark, plan_binary_search, plan_outcome_decreasing, sample};
use seqpovm_bench::{hermitian, povm_and_state};

fn eigensolver(c: &mut Criterion) {
    let mut g = c.benchmark_group("herm_eig");
    for d in [2, 4, 8, 16, 32] {
        let m = hermitian(d);
        g.bench_with_input(BenchmarkId::from_parameter(d), &m, |b, m| {
            b.iter(|| herm_eig(black_box(m), DEFAULT_TOL).unwrap())
        });
    }
    g.finish();
}

fn planning(c: &mut Criterion) {
    let mut g = c.benchmark_group("plan");
    for (n, d) in [(4, 2), (8, 4), (16, 8)] {
        let (p, _) = povm_and_state(n, d);
        let id = format!("n{n}_d{d}");
        g.bench_with_input(BenchmarkId::new("binary-search", &id), &p, |b, p| {
            b.iter(|| plan_binary_search(black_box(p)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("outcome-decreasing", &id), &p, |b, p| {
            b.iter(|| plan_outcome_decreasing(black_box(p)).unwrap())
        });
    }
    g.finish();
}

fn execution(c: &mut Criterion) {
    let mut g = c.benchmark_group("execute_exact");
    for (n, d) in [(4, 2), (8, 4), (16, 8)] {
        let (p, s) = povm_and_state(n, d);
        let t = plan_binary_search(&p).unwrap();
        g.bench_function(format!("n{n}_d{d}"), |b| {
            b.iter(|| execute_exact(black_box(&t), black_box(&s)).unwrap())
        });
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    const SHOTS: u64 = 100_000;
    let sc = scenario(0.4, ScenarioKind::ConclusivenessFirst).unwrap();
    let rho = sc.problem.state(UsdInput::Psi1);
    let mut g = c.benchmark_group("sample");
    g.throughput(Throughput::Elements(SHOTS));
    g.sample_size(20);
    g.bench_function("usd_1e5_shots", |b| {
        b.iter(|| sample(&sc.tree, &rho, SHOTS, black_box(7)).unwrap())
    });
    let (p, s) = povm_and_state(8, 4);
    let t = plan_binary_search(&p).unwrap();
    g.bench_function("n8_d4_1e5_shots", |b| {
        b.iter(|| sample(&t, &s, SHOTS, black_box(7)).unwrap())
    });
    g.bench_function("n8_d4_exact_run", |b| {
        b.iter(|| run_exact(&t, black_box(&s)).unwrap())
    });
    g.finish();
}

fn dilation(c: &mut Criterion) {
    let (p, _) = povm_and_state(8, 4);
    c.bench_function("naive_naimark/n8_d4", |b| {
        b.iter(|| naive_naimark(black_box(&p)))
    });
}

criterion_group!(
    benches,
    eigensolver,
    planning,
    execution,
    sampling,
    dilation
);
criterion_main!(benches);
