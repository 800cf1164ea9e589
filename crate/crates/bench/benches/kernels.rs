use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use hqc_bench::{phase_gate, sample_h1};
use hqc_core::control::generate_segments;
use hqc_core::hamiltonians::build_h3;
use hqc_core::holonomy::bessel_j0;
use hqc_core::linalg::{eigh, matexp_hermitian};
use hqc_core::propagation::{propagate_adiabatic, propagate_lab};
use hqc_core::{KickSchedule, PulseKind, PulseTrain, Schedule, StepPolicy};

fn linalg(c: &mut Criterion) {
    let h = sample_h1();
    c.bench_function("eigh 4x4", |b| b.iter(|| eigh(black_box(&h)).unwrap()));
    c.bench_function("matexp 4x4", |b| b.iter(|| matexp_hermitian(black_box(&h), 0.01).unwrap()));
    let h3 = build_h3(&Schedule::new(1.2, 1.0).unwrap(), 0.3).unwrap();
    c.bench_function("matexp 16x16", |b| b.iter(|| matexp_hermitian(black_box(&h3), 0.01).unwrap()));
}

fn bessel(c: &mut Criterion) {
    c.bench_function("bessel_j0(1.52)", |b| b.iter(|| bessel_j0(black_box(1.521)).unwrap()));
    c.bench_function("bessel_j0(40)", |b| b.iter(|| bessel_j0(black_box(40.0)).unwrap()));
}

fn propagation(c: &mut Criterion) {
    let policy = StepPolicy::default();
    let gate = phase_gate(1.0);
    let free = generate_segments(&PulseTrain::none(), 1.0).unwrap();
    let noisy = generate_segments(&PulseTrain::new(PulseKind::PositiveSquare, 100.0, 0.005, 0.5, 3), 1.0).unwrap();
    let mut group = c.benchmark_group("propagate T=1");
    group.sample_size(20);
    group.bench_function("lab, no control", |b| {
        b.iter(|| propagate_lab(&gate, &free, &KickSchedule::empty(), &policy).unwrap())
    });
    group.bench_function("lab, positive square J=100", |b| {
        b.iter(|| propagate_lab(&gate, &noisy, &KickSchedule::empty(), &policy).unwrap())
    });
    group.bench_function("adiabatic, positive square J=100", |b| {
        b.iter(|| propagate_adiabatic(&gate.schedule, &noisy, &policy).unwrap())
    });
    group.finish();
}

criterion_group!(benches, linalg, bessel, propagation);
criterion_main!(benches);
