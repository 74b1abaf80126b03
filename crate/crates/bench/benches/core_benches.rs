//! Criterion benchmarks for the hot paths: block-sparse-to-CNN compilation,
//! compiled-model evaluation, capacity functionals, and the lattice
//! approximator build.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rescnn_core::{
    by_name, cnn_eval, compile_fnn_to_cnn, complexity_report, holder_fnn, random_fnn,
    random_point, ArchSummary, FnnSpec, TaylorOracle,
};

fn bench_compile(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let spec = FnnSpec { d: 6, m: 4, max_depth: 3, max_width: 4, b_bs: 1.0, b_fin: 1.0 };
    let fnn = random_fnn(&mut rng, &spec).unwrap();
    c.bench_function("compile d=6 M=4 K=3", |b| {
        b.iter(|| compile_fnn_to_cnn(black_box(&fnn), 3).unwrap());
    });
}

fn bench_eval(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let spec = FnnSpec { d: 6, m: 4, max_depth: 3, max_width: 4, b_bs: 1.0, b_fin: 1.0 };
    let fnn = random_fnn(&mut rng, &spec).unwrap();
    let (net, _) = compile_fnn_to_cnn(&fnn, 3).unwrap();
    let x = random_point(&mut rng, 6);
    c.bench_function("cnn_eval d=6 M=4", |b| {
        b.iter(|| cnn_eval(black_box(&net), black_box(&x)).unwrap());
    });
}

fn bench_complexity(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(13);
    let spec = FnnSpec { d: 8, m: 6, max_depth: 3, max_width: 5, b_bs: 1.0, b_fin: 1.0 };
    let fnn = random_fnn(&mut rng, &spec).unwrap();
    let (net, _) = compile_fnn_to_cnn(&fnn, 4).unwrap();
    let arch = ArchSummary::from_cnn(&net);
    c.bench_function("complexity_report d=8 M=6", |b| {
        b.iter(|| complexity_report(black_box(&arch), 0.01).unwrap());
    });
}

fn bench_holder_build(c: &mut Criterion) {
    let target = by_name("sinsin", 2).unwrap();
    let oracle = TaylorOracle::new(target, 2.0).unwrap();
    c.bench_function("holder_fnn sinsin M=25", |b| {
        b.iter(|| holder_fnn(black_box(&oracle), 25, 2).unwrap());
    });
}

criterion_group!(
    benches,
    bench_compile,
    bench_eval,
    bench_complexity,
    bench_holder_build
);
criterion_main!(benches);
