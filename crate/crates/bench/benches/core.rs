use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rotdop_core::phase_match::{emission_curves, intersection};
use rotdop_core::{
    estimate, jsa_grid, run_pipeline, synthesize_trace, trace, CrystalConfig, HomConfig, Method,
    PhaseMatchGaussian, PumpSpectrum, RdeShift,
};

const CENTER: f64 = 2.0 * std::f64::consts::PI * 370.44e12;

fn pipeline(c: &mut Criterion) {
    c.bench_function("pipeline", |b| {
        b.iter(|| run_pipeline(black_box(2), black_box(1e12), CENTER).unwrap())
    });
}

fn jsa(c: &mut Criterion) {
    let pump = PumpSpectrum::new(0.0, 1e12).unwrap();
    let pm = PhaseMatchGaussian::reference(1e12, 0.1).unwrap();
    let shift = Some(RdeShift { l: 2, omega_rot: 1e12 });
    c.bench_function("jsa_grid_256", |b| {
        b.iter(|| jsa_grid(&pump, &pm, shift, 6e12, black_box(256)).unwrap())
    });
}

fn hom(c: &mut Criterion) {
    let cfg = HomConfig::symmetric(1e-12, 2, 2e12, 3e-12, 601).unwrap();
    let mut group = c.benchmark_group("hom_trace_601");
    group.bench_function("closed", |b| b.iter(|| trace(&cfg, Method::Closed).unwrap()));
    group.bench_function("numeric", |b| b.iter(|| trace(&cfg, Method::Numeric).unwrap()));
    group.finish();
}

fn phase_matching(c: &mut Criterion) {
    let crystal = CrystalConfig::with_cut_angle(45.0);
    let mut group = c.benchmark_group("phase_match");
    group.sample_size(20);
    group.bench_function("curves_1401", |b| {
        b.iter(|| emission_curves(&crystal, (300.0, 440.0), black_box(1401)).unwrap())
    });
    group.bench_function("intersection_1401", |b| {
        b.iter(|| intersection(&crystal, (300.0, 440.0), black_box(1401)).unwrap())
    });
    group.finish();
}

fn estimator(c: &mut Criterion) {
    let cfg = HomConfig::symmetric(1e-12, 2, 2e12, 3e-12, 1201).unwrap();
    let noisy = synthesize_trace(&cfg, 0.01, 7).unwrap();
    let mut group = c.benchmark_group("estimate");
    group.sample_size(20);
    group.bench_function("noisy_1201", |b| b.iter(|| estimate(black_box(&noisy)).unwrap()));
    group.finish();
}

criterion_group!(benches, pipeline, jsa, hom, phase_matching, estimator);
criterion_main!(benches);
