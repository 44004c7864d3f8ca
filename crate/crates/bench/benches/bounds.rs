use std::hint::black_box;

use bandit_tails::bounds::tail_bound;
use bandit_tails::{BoundEnv, BoundParams, Knowledge, Scenario};
use criterion::{criterion_group, criterion_main, Criterion};

fn params(scenario: Scenario, timing: Knowledge, env: BoundEnv) -> BoundParams {
    BoundParams {
        scenario,
        timing,
        env,
        horizon: 100_000,
        arms: 3,
        sigma: 1.0,
        alpha: 0.5,
        beta: 0.5,
        eta1: 1.0,
        eta2: 1.0,
        gaps: vec![0.0, 0.2, 0.4],
    }
}

fn evaluation(c: &mut Criterion) {
    let cases = [
        ("fixed_worst_case", params(Scenario::WorstCase, Knowledge::FixedTime, BoundEnv::Plain)),
        ("anytime_instance", params(Scenario::InstanceDependent, Knowledge::Anytime, BoundEnv::Plain)),
        (
            "baseline_worst_case",
            params(Scenario::WorstCase, Knowledge::FixedTime, BoundEnv::Baseline { bound: 1.0 }),
        ),
        (
            "linear_instance",
            params(
                Scenario::InstanceDependent,
                Knowledge::FixedTime,
                BoundEnv::Linear { dim: 4, uniform_gap: 0.3 },
            ),
        ),
    ];
    let xs: Vec<f64> = (1..=64).map(|i| 500.0 * i as f64).collect();
    let mut group = c.benchmark_group("tail_bound_64x");
    for (name, p) in &cases {
        group.bench_function(*name, |b| {
            b.iter(|| {
                xs.iter()
                    .map(|&x| tail_bound(black_box(p), x).unwrap())
                    .sum::<f64>()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, evaluation);
criterion_main!(benches);
