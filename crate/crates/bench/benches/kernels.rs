use criterion::{black_box, criterion_group, criterion_main, Criterion};
use mtlab_bench::{fs_fixture, power_fixture};
use mtlab_core::*;

fn profiles(c: &mut Criterion) {
    c.bench_function("fs_profile n=2 eps=0.01", |b| {
        b.iter(|| fs_profile(2, black_box(0.01), &GridSpec::default()).unwrap())
    });
    let p = fs_fixture(2, 0.1);
    c.bench_function("exp_integral gamma=2", |b| b.iter(|| exp_integral(&p, black_box(2.0)).unwrap()));
    c.bench_function("energy", |b| b.iter(|| energy(black_box(&p))));
    c.bench_function("lp_moment p=3.5", |b| b.iter(|| lp_moment(&p, black_box(3.5)).unwrap()));
}

fn transforms(c: &mut Criterion) {
    let f = power_fixture(2, 20.0, 40_001);
    let s: Vec<f64> = (0..2001).map(|i| 0.1 + 9.9 * i as f64 / 2000.0).collect();
    c.bench_function("legendre 40k -> 2k", |b| b.iter(|| legendre(&f, black_box(&s)).unwrap()));
    let p = fs_fixture(2, 0.5);
    c.bench_function("laplace_layer_cake t=2", |b| b.iter(|| laplace_layer_cake(&p, black_box(2.0)).unwrap()));
}

fn solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("mfe");
    g.sample_size(10);
    g.bench_function("solve n=2 a=4", |b| b.iter(|| solve(2, black_box(4.0), &SolveOptions::default()).unwrap()));
    g.bench_function("solve n=2 a=8.99", |b| {
        b.iter(|| solve(2, black_box(8.99), &SolveOptions::default()).unwrap())
    });
    g.finish();
    let p = fs_fixture(2, 0.5);
    c.bench_function("duality_gap gamma=1", |b| b.iter(|| duality_gap(&p, black_box(1.0)).unwrap()));
}

fn constants(c: &mut Criterion) {
    c.bench_function("constants_row n=20 50 digits", |b| b.iter(|| constants_row(black_box(20), 50)));
}

criterion_group!(benches, profiles, transforms, solvers, constants);
criterion_main!(benches);
