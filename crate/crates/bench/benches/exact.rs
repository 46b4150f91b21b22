use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use mobius_core::exact::{
    duality_sum, hyperbola_duality_check, mertens_exact, standard_family, ExactTables,
};
use mobius_core::Side;

fn duality(c: &mut Criterion) {
    let fam = standard_family();
    let mut g = c.benchmark_group("duality_sum");
    // 720720 has 240 divisors; 999983 is prime
    for n in [720_720u64, 999_983] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| duality_sum(black_box(n), &fam[0], Side::Min).unwrap());
        });
    }
    g.finish();

    let tables = ExactTables::new(10_000, 4).unwrap();
    c.bench_function("duality_sum_k/9240/k=4", |b| {
        b.iter(|| tables.duality_sum_k(black_box(9240), 4, &fam[1], Side::Max).unwrap());
    });
}

fn hyperbola(c: &mut Criterion) {
    let fam = standard_family();
    c.bench_function("hyperbola_duality/2000/k=3", |b| {
        b.iter(|| hyperbola_duality_check(black_box(2000), 3, &fam[0]).unwrap());
    });
    c.bench_function("mertens_exact/10000", |b| b.iter(|| mertens_exact(black_box(10_000))));
}

criterion_group!(benches, duality, hyperbola);
criterion_main!(benches);
