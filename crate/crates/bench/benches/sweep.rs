use criterion::{criterion_group, criterion_main, Criterion};
use polaromech::{interior_grid, run_sweep, AveragesMode, SweepSpec, SweepVariable};
use polaromech_bench::two_mode_scenario;
use std::f64::consts::FRAC_PI_2;

fn theta_sweep(c: &mut Criterion) {
    let scenario = two_mode_scenario();
    let spec = SweepSpec::new(SweepVariable::Theta, interior_grid(0.0, FRAC_PI_2, 101));
    c.bench_function("sweep/theta_101", |b| {
        b.iter(|| run_sweep(&scenario, &spec, AveragesMode::Approx).unwrap())
    });
}

fn temperature_grid(c: &mut Criterion) {
    let scenario = two_mode_scenario();
    let spec = SweepSpec::new(SweepVariable::Temperature, interior_grid(0.0, 1.1, 21))
        .with_theta(interior_grid(0.0, FRAC_PI_2, 41));
    let mut group = c.benchmark_group("sweep");
    group.sample_size(20);
    group.bench_function("temperature_theta_21x41", |b| {
        b.iter(|| run_sweep(&scenario, &spec, AveragesMode::Approx).unwrap())
    });
    group.finish();
}

criterion_group!(benches, theta_sweep, temperature_grid);
criterion_main!(benches);
