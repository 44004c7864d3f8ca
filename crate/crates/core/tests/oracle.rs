use bandit_tails::env::{BanditInstance, NoiseModel};
use bandit_tails::policy::{BonusSpec, PolicySpec};
use bandit_tails::sim::{exact_regret_distribution, replicate, run_episode};

const REPS: u64 = 100_000;

fn check(instance: &BanditInstance, policy: &PolicySpec, horizon: u64, cell: u64) {
    let exact = exact_regret_distribution(instance, policy, horizon, None).unwrap();
    assert!((exact.total_probability() - 1.0).abs() < 1e-12);
    let samples: Vec<f64> = replicate(REPS, 2024, cell, |_, s| {
        run_episode(instance, policy, horizon, None, s).unwrap().pseudo_regret
    });
    let ks = exact.ks_distance(&samples);
    assert!(ks < 0.01, "{policy:?} T = {horizon}: KS {ks}");
    for (v, p, freq, z) in exact.atom_check(&samples) {
        assert!(z <= 4.0, "{policy:?} T = {horizon}: atom {v} exact {p} observed {freq}");
    }
}

#[test]
fn monte_carlo_matches_enumeration_two_arms() {
    let instance = BanditInstance::new(vec![0.6, 0.4], NoiseModel::rademacher(0.3).unwrap()).unwrap();
    for (i, horizon) in [6u64, 10].into_iter().enumerate() {
        let ucb = PolicySpec::Ucb {
            bonus: BonusSpec::standard_fixed(1.0, 0.3, horizon).unwrap(),
        };
        let se = PolicySpec::Se {
            bonus: BonusSpec::tail_optimal_fixed(1.0, 1.0, 0.5, 0.5, horizon, 2).unwrap(),
        };
        check(&instance, &ucb, horizon, 2 * i as u64);
        check(&instance, &se, horizon, 2 * i as u64 + 1);
    }
}

#[test]
fn monte_carlo_matches_enumeration_with_permutations() {
    let instance = BanditInstance::new(vec![0.5, 0.2, 0.45], NoiseModel::rademacher(0.2).unwrap()).unwrap();
    let horizon = 9;
    let bonus = BonusSpec::tail_optimal_fixed(0.3, 0.3, 0.5, 0.5, horizon, 3).unwrap();
    check(&instance, &PolicySpec::SeRandomPermutation { bonus }, horizon, 10);
    let any = BonusSpec::tail_optimal_anytime(0.5, 0.5, 0.5, 0.5, 3).unwrap();
    check(&instance, &PolicySpec::Ucb { bonus: any }, horizon, 11);
}
