use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polaromech::{diagonalize_polaritons, linear_model, solve_lyapunov, AveragesMode};
use polaromech_bench::{many_mode_scenario, two_mode_scenario};
use std::hint::black_box;

fn lyapunov(c: &mut Criterion) {
    let mut group = c.benchmark_group("lyapunov");
    for modes in [2, 4, 6] {
        let (params, _) = many_mode_scenario(modes).resolve().unwrap();
        let basis = diagonalize_polaritons(&params).unwrap();
        let model = linear_model(&params, &basis, AveragesMode::Approx).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(model.dim()), &model, |b, m| {
            b.iter(|| solve_lyapunov(black_box(&m.drift), black_box(&m.diffusion)).unwrap())
        });
    }
    group.finish();
}

fn point(c: &mut Criterion) {
    let scenario = two_mode_scenario();
    c.bench_function("point/approx", |b| {
        b.iter(|| black_box(&scenario).evaluate(AveragesMode::Approx).unwrap())
    });
    c.bench_function("point/selfconsistent", |b| {
        b.iter(|| black_box(&scenario).evaluate(AveragesMode::SelfConsistent).unwrap())
    });
}

criterion_group!(benches, lyapunov, point);
criterion_main!(benches);
