use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mehpp_core::{
    critical_coefficient, equilibria_at_pressure, loop_area, make_square, run, stationary_points,
    trace_cycle, ChainConfig, ChainPreset, MagnetoElasticParams, Preset,
};

fn model(c: &mut Criterion) {
    let prm = MagnetoElasticParams::symmetric(0.1);
    c.bench_function("critical_coefficient", |b| {
        b.iter(|| critical_coefficient(black_box(1.5)))
    });
    c.bench_function("stationary_points", |b| {
        b.iter(|| stationary_points(black_box(&prm)))
    });
    c.bench_function("equilibria_at_pressure", |b| {
        b.iter(|| equilibria_at_pressure(black_box(0.48), &prm))
    });
}

fn cycle(c: &mut Criterion) {
    let prm = MagnetoElasticParams::symmetric(0.1);
    let w = make_square(1.0, 7.0, -1.0, 0.1).unwrap();
    c.bench_function("trace_cycle_3x512", |b| {
        b.iter(|| loop_area(&trace_cycle(black_box(&prm), &w, 3, 512).unwrap()).unwrap())
    });
}

fn pump(c: &mut Criterion) {
    let cfg = ChainConfig::from_preset(
        ChainPreset::Paper2Cell,
        &MagnetoElasticParams::symmetric(0.0),
    );
    let w = Preset::PaperFsi.build(7.0, 1.0);
    let mut group = c.benchmark_group("pump");
    group.sample_size(10);
    group.bench_function("paper_2cell_one_period_dt1e-4", |b| {
        b.iter(|| run(black_box(&cfg), &w, w.period(), 1e-4).unwrap())
    });
    group.finish();
}

criterion_group!(benches, model, cycle, pump);
criterion_main!(benches);
