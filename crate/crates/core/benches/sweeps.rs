use chyp::decomp::decomposability;
use chyp::hermlin::{HermitianForm, Tolerance};
use chyp::isometry::{anti_compose, classify};
use chyp::{par, sample};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn round_trip(seed: &u64) -> bool {
    let t = Tolerance::default();
    let mut rng = sample::rng(*seed);
    let f = HermitianForm::BALL;
    let s: Vec<_> = (0..3)
        .map(|_| sample::real_reflection(&mut rng, f))
        .collect();
    let a = anti_compose(&s[0], &s[1], &t).unwrap();
    let b = anti_compose(&s[0], &s[2], &t).unwrap();
    decomposability(&a, &b, &t).is_ok()
}

fn classify_one(seed: &u64) -> bool {
    let t = Tolerance::default();
    let a = sample::random_isometry(&mut sample::rng(*seed), HermitianForm::SIEGEL);
    classify(&a, &t).is_ok()
}

fn sweeps(c: &mut Criterion) {
    let seeds: Vec<u64> = (0..512).collect();
    let mut g = c.benchmark_group("decompose_round_trip");
    for n in [64usize, 512] {
        let s = &seeds[..n];
        g.bench_with_input(BenchmarkId::new("parallel", n), s, |b, s| {
            b.iter(|| par::map(black_box(s), round_trip))
        });
        g.bench_with_input(BenchmarkId::new("sequential", n), s, |b, s| {
            b.iter(|| par::map_seq(black_box(s), round_trip))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("classify");
    g.bench_function("parallel", |b| {
        b.iter(|| par::map(black_box(&seeds), classify_one))
    });
    g.bench_function("sequential", |b| {
        b.iter(|| par::map_seq(black_box(&seeds), classify_one))
    });
    g.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
