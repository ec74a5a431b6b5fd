use criterion::{criterion_group, criterion_main, Criterion};
use driftlab_core::oracle::{exact_hitting_time, TransitionModel};
use driftlab_core::FitnessFunction;

fn bench_full(c: &mut Criterion) {
    let mut group = c.benchmark_group("full_model");
    group.sample_size(10);
    for n in [8, 10] {
        let f = FitnessFunction::binval(n).unwrap();
        group.bench_function(format!("build_binval_n{n}_N4"), |b| {
            b.iter(|| TransitionModel::build(&f, 4).unwrap())
        });
        let model = TransitionModel::build(&f, 4).unwrap();
        group.bench_function(format!("hitting_binval_n{n}_N4"), |b| {
            b.iter(|| exact_hitting_time(&model).unwrap())
        });
    }
    group.finish();
}

fn bench_lumped(c: &mut Criterion) {
    let mut group = c.benchmark_group("lumped_model");
    group.sample_size(10);
    for n in [1000, 5000] {
        let f = FitnessFunction::onemax(n).unwrap();
        group.bench_function(format!("build_onemax_n{n}_N4"), |b| {
            b.iter(|| TransitionModel::build_lumped(&f, 4).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_full, bench_lumped);
criterion_main!(benches);
