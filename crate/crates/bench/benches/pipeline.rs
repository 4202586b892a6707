use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use welrci::censoring::{generate, Preset};
use welrci::smoothing::smoothed_quantile;
use welrci::welr::neg2_log_welr;
use welrci::{fit_interval, fit_npmle, welrci, EmOptions, FitOptions};

fn npmle(c: &mut Criterion) {
    let mut group = c.benchmark_group("npmle");
    for preset in [Preset::Table1, Preset::Table3, Preset::Table5] {
        for n in [50, 200] {
            let sample = generate(&preset.params(), n, 1).unwrap();
            group.bench_with_input(BenchmarkId::new(preset.name(), n), &sample, |b, s| {
                b.iter(|| fit_npmle(black_box(s), EmOptions::default()).unwrap())
            });
        }
    }
    group.finish();
}

fn ratio(c: &mut Criterion) {
    let sample = generate(&Preset::Table1.params(), 200, 1).unwrap();
    let (dist, _) = fit_npmle(&sample, EmOptions::default()).unwrap();
    let theta = smoothed_quantile(&dist, 0.5).unwrap() * 1.1;
    c.bench_function("neg2_log_welr n=200", |b| {
        b.iter(|| neg2_log_welr(black_box(&dist), black_box(theta), 0.5, true))
    });
    c.bench_function("welrci endpoints n=200", |b| {
        b.iter(|| welrci(black_box(&dist), 0.5, 0.25, true).unwrap())
    });
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_interval");
    group.sample_size(10);
    let right = generate(&Preset::Table1.params(), 50, 1).unwrap();
    let opts = FitOptions {
        boot_reps: 200,
        ..FitOptions::new(0.5, 0.1)
    };
    group.bench_function("table1 n=50 B=200", |b| {
        b.iter(|| fit_interval(black_box(&right), &opts).unwrap())
    });
    let cs = generate(&Preset::Table5.params(), 100, 1).unwrap();
    let opts = FitOptions {
        boot_reps: 200,
        grid_step: Some(10),
        ..FitOptions::new(0.5, 0.05)
    };
    group.bench_function("table5 n=100 B=200 d=10", |b| {
        b.iter(|| fit_interval(black_box(&cs), &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, npmle, ratio, pipeline);
criterion_main!(benches);
