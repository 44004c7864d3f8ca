use bandit_tails::bounds::noise_tail_bound;
use bandit_tails::env::{BanditInstance, BaselineSchedule, NoiseModel};
use bandit_tails::policy::{BonusSpec, PolicySpec};
use bandit_tails::sim::{replicate, run_episode};
use bandit_tails::stats::{binomial_se, summarize};

#[test]
fn permuted_elimination_matches_plain_elimination_without_baseline() {
    let instance = BanditInstance::new(vec![0.5, 0.35, 0.45], NoiseModel::gaussian(0.3).unwrap()).unwrap();
    let horizon = 300;
    let bonus = BonusSpec::tail_optimal_fixed(0.1, 0.1, 0.5, 0.5, horizon, 3).unwrap();
    let zero = BaselineSchedule::zero();
    let se: Vec<f64> = replicate(10_000, 11, 0, |_, s| {
        run_episode(&instance, &PolicySpec::Se { bonus }, horizon, Some(&zero), s)
            .unwrap()
            .pseudo_regret
    });
    let rp: Vec<f64> = replicate(10_000, 11, 1, |_, s| {
        run_episode(&instance, &PolicySpec::SeRandomPermutation { bonus }, horizon, Some(&zero), s)
            .unwrap()
            .pseudo_regret
    });
    let (a, b) = (summarize(&se).unwrap(), summarize(&rp).unwrap());
    let pooled = (a.variance / a.count as f64 + b.variance / b.count as f64).sqrt();
    assert!(pooled > 0.0);
    assert!((a.mean - b.mean).abs() < 4.0 * pooled, "{} vs {} (se {pooled})", a.mean, b.mean);
}

#[test]
fn genuine_noise_concentrates() {
    let sigma = 0.5;
    let horizon = 1000;
    let instance = BanditInstance::new(vec![0.7, 0.2], NoiseModel::gaussian(sigma).unwrap()).unwrap();
    let reps = 100_000;
    let noise: Vec<f64> = replicate(reps, 3, 0, |_, s| {
        let r = run_episode(&instance, &PolicySpec::FixedArm { arm: 0 }, horizon, None, s).unwrap();
        assert_eq!(r.pseudo_regret, 0.0);
        r.noise_sum
    });
    let root = sigma * (horizon as f64).sqrt();
    for x in [root, 2.0 * root] {
        let p = noise.iter().filter(|n| **n > x).count() as f64 / reps as f64;
        let bound = noise_tail_bound(x, sigma, horizon).unwrap();
        assert!(p <= bound + 3.0 * binomial_se(p, reps), "x = {x}: {p} > {bound}");
    }
}

#[test]
fn regret_is_zero_iff_only_optimal_arms_pulled() {
    let instance = BanditInstance::new(vec![0.6, 0.6, 0.3], NoiseModel::uniform(0.4).unwrap()).unwrap();
    let horizon = 200;
    let policies = [
        PolicySpec::Ucb {
            bonus: BonusSpec::tail_optimal_anytime(1.0, 1.0, 0.5, 0.3, 3).unwrap(),
        },
        PolicySpec::Se {
            bonus: BonusSpec::standard_fixed(1.0, 0.4, horizon).unwrap(),
        },
        PolicySpec::FixedArm { arm: 1 },
    ];
    for p in &policies {
        for seed in 0..200 {
            let r = run_episode(&instance, p, horizon, None, seed).unwrap();
            assert!(r.pseudo_regret >= 0.0);
            assert_eq!(r.pseudo_regret == 0.0, r.pull_counts[2] == 0);
        }
    }
}
