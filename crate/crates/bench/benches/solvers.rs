use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use softkill_bench::{frozen_control, generic, PicardConfig};
use softkill_core::mean_field::{
    fp_forward_solve, hjb_backward_solve, mfc_picard_solve, MeasurePath,
};
use softkill_core::small_n::{solve_v2_reduced, ReducedConfig};

fn forward_backward(c: &mut Criterion) {
    let (spec, mu0) = generic(64, 1e-3);
    let alpha = frozen_control(&spec);
    c.bench_function("fp_forward_solve_64x500", |b| {
        b.iter(|| black_box(fp_forward_solve(&spec, &alpha, &mu0).unwrap()))
    });
    let mu = MeasurePath::constant(&spec, &mu0).unwrap();
    c.bench_function("hjb_backward_solve_64x500", |b| {
        b.iter(|| black_box(hjb_backward_solve(&spec, &mu).unwrap()))
    });
}

fn picard(c: &mut Criterion) {
    let (spec, mu0) = generic(32, 5e-3);
    let mut group = c.benchmark_group("picard");
    group.sample_size(10);
    group.bench_function("generic_32x100", |b| {
        b.iter(|| black_box(mfc_picard_solve(&spec, &mu0, &PicardConfig::default()).unwrap()))
    });
    group.finish();
}

fn pair(c: &mut Criterion) {
    let (spec, _) = generic(64, 1e-2);
    let cfg = ReducedConfig {
        points: 16,
        delta_points: 33,
        delta_max: 2.0,
        dt: 1e-2,
        snapshots: vec![0.0],
    };
    let mut group = c.benchmark_group("two_particle");
    group.sample_size(10);
    group.bench_function("reduced_16x16x33", |b| {
        b.iter(|| black_box(solve_v2_reduced(&spec, &cfg).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, forward_backward, picard, pair);
criterion_main!(benches);
