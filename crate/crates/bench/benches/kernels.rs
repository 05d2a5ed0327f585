use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shapeholo_bench::{controlled_loop, linked_pair, rotating_drive};
use shapeholo_core::holonomy::integrate_wilson;
use shapeholo_core::linking::gauss_integral;
use shapeholo_core::trimer::{aligned_step, reconstruct_rotation, REFERENCE_MASSES};

fn wilson(c: &mut Criterion) {
    let mut g = c.benchmark_group("integrate_wilson");
    for steps in [1024, 4096, 16384] {
        let hl = controlled_loop(steps);
        g.bench_with_input(BenchmarkId::from_parameter(steps), &hl, |b, hl| {
            b.iter(|| integrate_wilson(black_box(hl)).unwrap())
        });
    }
    g.finish();
}

fn linking(c: &mut Criterion) {
    let mut g = c.benchmark_group("gauss_linking");
    for samples in [128, 512, 1024] {
        let pair = linked_pair(samples);
        g.bench_with_input(BenchmarkId::from_parameter(samples), &pair, |b, (x, y)| {
            b.iter(|| gauss_integral(black_box(x), black_box(y)).unwrap())
        });
    }
    g.finish();
}

fn trimer(c: &mut Criterion) {
    let drive = rotating_drive();
    let mut g = c.benchmark_group("reconstruct_rotation");
    g.sample_size(20);
    for steps in [128, 512] {
        let (dt, per) = aligned_step(&drive, steps).unwrap();
        let t_end = dt * per as f64;
        g.bench_with_input(BenchmarkId::new("one period", steps), &t_end, |b, &t_end| {
            b.iter(|| reconstruct_rotation(black_box(&drive), REFERENCE_MASSES, t_end, dt).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, wilson, linking, trimer);
criterion_main!(benches);
