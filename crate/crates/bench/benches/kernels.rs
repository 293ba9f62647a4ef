use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use wind_atlas::{
    sweep_station, useful_fraction, useful_fraction_fast, LoadProfile, SimulationConfig,
    STARTS_PER_YEAR,
};
use wind_atlas_bench::synthetic_station;

const CAPACITIES: [f64; 6] = [200.0, 500.0, 800.0, 1000.0, 1500.0, 2000.0];

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("station_year");
    group.sample_size(10);
    let cfg = SimulationConfig::new(1000.0).unwrap();
    for (label, mean) in [("calm", 2.5), ("windy", 5.0)] {
        let power = synthetic_station(7, mean);
        for profile in [LoadProfile::dishwasher(), LoadProfile::household()] {
            let id = format!("{label}/{}", profile.name());
            group.bench_with_input(BenchmarkId::new("naive", &id), &profile, |b, p| {
                b.iter(|| useful_fraction(black_box(&power), p, &cfg))
            });
            group.bench_with_input(BenchmarkId::new("fast", &id), &profile, |b, p| {
                b.iter(|| useful_fraction_fast(black_box(&power), p, &cfg))
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("capacity_sweep");
    group.sample_size(10);
    let power = synthetic_station(11, 3.5);
    let profile = LoadProfile::dishwasher();
    group.bench_function("reuse", |b| {
        b.iter(|| sweep_station(black_box(&power), &profile, &CAPACITIES, STARTS_PER_YEAR).unwrap())
    });
    group.bench_function("independent", |b| {
        b.iter(|| {
            CAPACITIES
                .iter()
                .map(|&cap| {
                    useful_fraction_fast(
                        black_box(&power),
                        &profile,
                        &SimulationConfig::new(cap).unwrap(),
                    )
                })
                .collect::<Vec<_>>()
        })
    });
    group.finish();
}

criterion_group!(benches, kernels, sweep);
criterion_main!(benches);
