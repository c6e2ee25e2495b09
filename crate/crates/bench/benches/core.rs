use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use opint_bench::{function, pair};
use opint_core::{
    eigendecompose, f_of_pair, schatten_norm, triple_oi_first, DividedDifference, SchattenIndex,
    SpectralMeasure,
};

const DIMS: [usize; 3] = [16, 32, 64];

fn bench_eigendecompose(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigendecompose");
    for dim in DIMS {
        let (a, _) = pair(dim, 1);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &a, |b, a| {
            b.iter(|| eigendecompose(a).unwrap())
        });
    }
    g.finish();
}

fn bench_f_of_pair(c: &mut Criterion) {
    let f = function();
    let mut g = c.benchmark_group("f_of_pair");
    for dim in DIMS {
        let (a, bm) = pair(dim, 2);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &(a, bm), |b, (a, bm)| {
            b.iter(|| f_of_pair(&f, a, bm).unwrap())
        });
    }
    g.finish();
}

fn bench_triple_oi_first(c: &mut Criterion) {
    let dd = DividedDifference::first(&function());
    let mut g = c.benchmark_group("triple_oi_first");
    for dim in DIMS {
        let (a1, b) = pair(dim, 3);
        let (a2, _) = pair(dim, 4);
        let t = a1.sub(&a2);
        let (e1, e2, e3) = (
            SpectralMeasure::of(&a1).unwrap(),
            SpectralMeasure::of(&a2).unwrap(),
            SpectralMeasure::of(&b).unwrap(),
        );
        g.bench_function(BenchmarkId::from_parameter(dim), |bch| {
            bch.iter(|| triple_oi_first(&dd, &e1, &t, &e2, &e3).unwrap())
        });
    }
    g.finish();
}

fn bench_schatten_norm(c: &mut Criterion) {
    let mut g = c.benchmark_group("schatten_norm");
    for dim in DIMS {
        let (a, b) = pair(dim, 5);
        let m = a.sub(&b);
        for p in [
            SchattenIndex::TRACE,
            SchattenIndex::new(1.5).unwrap(),
            SchattenIndex::OPERATOR,
        ] {
            g.bench_function(BenchmarkId::new(format!("p={p}"), dim), |bch| {
                bch.iter(|| schatten_norm(&m, p).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(
    benches,
    bench_eigendecompose,
    bench_f_of_pair,
    bench_triple_oi_first,
    bench_schatten_norm
);
criterion_main!(benches);
