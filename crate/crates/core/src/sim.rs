//! Episode simulation, regret accounting and the exact enumeration oracle.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{BanditInstance, BaselinePath, BaselineSchedule, NoiseKind};
use crate::error::{input, Error, Result};
use crate::policy::{PolicySpec, SeState, UcbState};
use crate::seed;
use crate::source::{RngSource, Source};

/// Outcome of one seeded episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub pull_counts: Vec<u64>,
    pub pseudo_regret: f64,
    pub noise_sum: f64,
    /// `pseudo_regret - noise_sum`.
    pub empirical_regret: f64,
    pub horizon: u64,
    pub seed: u64,
}

impl EpisodeResult {
    pub fn new(pull_counts: Vec<u64>, pseudo_regret: f64, noise_sum: f64, horizon: u64, seed: u64) -> Self {
        Self {
            pull_counts,
            pseudo_regret,
            noise_sum,
            empirical_regret: pseudo_regret - noise_sum,
            horizon,
            seed,
        }
    }
}

/// `sum_k counts[k] * gaps[k]`, accumulated in index order.
pub fn pseudo_regret(counts: &[u64], gaps: &[f64]) -> Result<f64> {
    if counts.len() != gaps.len() {
        return Err(input(format!(
            "{} pull counts but {} gaps",
            counts.len(),
            gaps.len()
        )));
    }
    Ok(counts.iter().zip(gaps).map(|(&n, &g)| n as f64 * g).sum())
}

fn check_run(instance: &BanditInstance, policy: &PolicySpec, horizon: u64) -> Result<()> {
    if horizon == 0 {
        return Err(input("horizon must be >= 1"));
    }
    if policy.is_elimination() && horizon < instance.arms() as u64 {
        return Err(input(format!(
            "elimination policies need T >= K, got T = {horizon}, K = {}",
            instance.arms()
        )));
    }
    if let PolicySpec::FixedArm { arm } = policy {
        if *arm >= instance.arms() {
            return Err(Error::OutOfRange {
                what: "arm index",
                value: arm.to_string(),
                allowed: format!("0..{}", instance.arms()),
            });
        }
    }
    if let Some(b) = policy.bonus() {
        b.validate()?;
    }
    Ok(())
}

/// Runs `policy` for exactly `horizon` pulls with a stream derived from `seed`.
pub fn run_episode(
    instance: &BanditInstance,
    policy: &PolicySpec,
    horizon: u64,
    baseline: Option<&BaselineSchedule>,
    seed: u64,
) -> Result<EpisodeResult> {
    let path = baseline.map(|b| b.path(horizon));
    let mut source = RngSource(seed::stream(seed));
    let mut result = run_episode_with(instance, policy, horizon, path.as_ref(), &mut source)?;
    result.seed = seed;
    Ok(result)
}

/// Episode driver over an arbitrary randomness source. The baseline only
/// enters the rewards the policy observes; regret and noise ignore it.
pub fn run_episode_with<S: Source + ?Sized>(
    instance: &BanditInstance,
    policy: &PolicySpec,
    horizon: u64,
    baseline: Option<&BaselinePath>,
    source: &mut S,
) -> Result<EpisodeResult> {
    check_run(instance, policy, horizon)?;
    if let Some(p) = baseline {
        if (p.values().len() as u64) < horizon {
            return Err(input("baseline path shorter than the horizon"));
        }
    }
    let k = instance.arms();
    let means = instance.means();
    let noise = *instance.noise();
    let mut noise_sum = 0.0;
    let mut pull = |arm: usize, t: u64, src: &mut S| -> f64 {
        let eps = src.noise(&noise);
        noise_sum += eps;
        let b = baseline.map_or(0.0, |p| p.values()[t as usize - 1]);
        b + means[arm] + eps
    };

    let counts = match policy {
        PolicySpec::Se { bonus } | PolicySpec::SeRandomPermutation { bonus } => {
            let permute = matches!(policy, PolicySpec::SeRandomPermutation { .. });
            let mut state = SeState::new(k, permute);
            while state.step(bonus, horizon, source, &mut pull).is_some() {}
            state.counts
        }
        PolicySpec::Ucb { bonus } => {
            let mut state = UcbState::new(k);
            for _ in 0..horizon {
                state.step(bonus, source, &mut pull);
            }
            state.counts
        }
        PolicySpec::FixedArm { arm } => {
            let mut counts = vec![0; k];
            for t in 1..=horizon {
                pull(*arm, t, source);
            }
            counts[*arm] = horizon;
            counts
        }
    };
    let regret = pseudo_regret(&counts, instance.gaps())?;
    Ok(EpisodeResult::new(counts, regret, noise_sum, horizon, 0))
}

/// Runs `f(replicate, episode_seed)` for every replicate of a cell, in
/// parallel on the current rayon pool. Output order is replicate order, so
/// results do not depend on scheduling.
pub fn replicate<T, F>(replications: u64, experiment_seed: u64, cell: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    (0..replications)
        .into_par_iter()
        .map(|r| f(r, seed::episode_seed(experiment_seed, cell, r)))
        .collect()
}

pub const MAX_ENUMERATION_HORIZON: u64 = 14;

/// Exact distribution of pseudo regret: sorted `(value, probability)` atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretDistribution {
    pub support: Vec<(f64, f64)>,
}

impl RegretDistribution {
    pub fn total_probability(&self) -> f64 {
        self.support.iter().map(|a| a.1).sum()
    }

    /// `P(R <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.support
            .iter()
            .take_while(|a| a.0 <= x)
            .map(|a| a.1)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().map(|(v, p)| v * p).sum()
    }

    /// Kolmogorov-Smirnov distance between this distribution and the
    /// empirical distribution of `samples`.
    pub fn ks_distance(&self, samples: &[f64]) -> f64 {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut points: Vec<f64> = self.support.iter().map(|a| a.0).collect();
        points.extend(sorted.iter().copied());
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mut worst: f64 = 0.0;
        for x in points {
            let emp = sorted.partition_point(|v| *v <= x) as f64 / n;
            worst = worst.max((emp - self.cdf(x)).abs());
            // left limit
            let emp_l = sorted.partition_point(|v| *v < x) as f64 / n;
            let exact_l: f64 = self.support.iter().take_while(|a| a.0 < x).map(|a| a.1).sum();
            worst = worst.max((emp_l - exact_l).abs());
        }
        worst
    }

    /// For each atom: (value, exact probability, empirical frequency, z-score
    /// of the frequency under the binomial standard error).
    pub fn atom_check(&self, samples: &[f64]) -> Vec<(f64, f64, f64, f64)> {
        let n = samples.len() as f64;
        self.support
            .iter()
            .map(|&(v, p)| {
                let hits = samples.iter().filter(|s| (**s - v).abs() <= 1e-9 * (1.0 + v.abs())).count();
                let freq = hits as f64 / n;
                let se = (p * (1.0 - p) / n).sqrt();
                let z = if se > 0.0 {
                    (freq - p).abs() / se
                } else if (freq - p).abs() == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                (v, p, freq, z)
            })
            .collect()
    }
}

/// Replays recorded choices, extending the tape with first alternatives
/// whenever the episode asks for a choice it has not made before.
struct ChoiceTape {
    /// `(taken, arity)` per choice point.
    choices: Vec<(usize, usize)>,
    pos: usize,
}

impl ChoiceTape {
    fn choose_inner(&mut self, n: usize) -> usize {
        if self.pos < self.choices.len() {
            debug_assert_eq!(self.choices[self.pos].1, n);
        } else {
            self.choices.push((0, n));
        }
        let taken = self.choices[self.pos].0;
        self.pos += 1;
        taken
    }

    fn probability(&self) -> f64 {
        self.choices.iter().map(|c| 1.0 / c.1 as f64).product()
    }

    /// Moves to the next path in lexicographic order; `false` when exhausted.
    fn advance(&mut self) -> bool {
        self.choices.truncate(self.pos);
        self.pos = 0;
        while let Some(last) = self.choices.last_mut() {
            if last.0 + 1 < last.1 {
                last.0 += 1;
                return true;
            }
            self.choices.pop();
        }
        false
    }
}

impl Source for ChoiceTape {
    fn noise(&mut self, model: &crate::env::NoiseModel) -> f64 {
        if model.sigma == 0.0 {
            return 0.0;
        }
        if self.choose_inner(2) == 0 {
            -model.sigma
        } else {
            model.sigma
        }
    }

    fn choose(&mut self, n: usize) -> usize {
        if n <= 1 {
            0
        } else {
            self.choose_inner(n)
        }
    }
}

/// Exact pseudo-regret distribution by enumerating every Rademacher sign
/// path (and every phase permutation for SEwRP).
pub fn exact_regret_distribution(
    instance: &BanditInstance,
    policy: &PolicySpec,
    horizon: u64,
    baseline: Option<&BaselineSchedule>,
) -> Result<RegretDistribution> {
    if horizon > MAX_ENUMERATION_HORIZON {
        return Err(Error::OutOfRange {
            what: "enumeration horizon",
            value: horizon.to_string(),
            allowed: format!("<= {MAX_ENUMERATION_HORIZON}"),
        });
    }
    if instance.noise().kind != NoiseKind::Rademacher {
        return Err(input("exact enumeration needs two-point (Rademacher) noise"));
    }
    if instance.arms() > 3 {
        return Err(input(format!(
            "exact enumeration supports K <= 3, got K = {}",
            instance.arms()
        )));
    }
    check_run(instance, policy, horizon)?;
    let path = baseline.map(|b| b.path(horizon));
    let mut tape = ChoiceTape {
        choices: Vec::new(),
        pos: 0,
    };
    // Neumaier-compensated sums: there can be millions of tiny path weights.
    let mut by_counts: BTreeMap<Vec<u64>, (f64, f64)> = BTreeMap::new();
    loop {
        let ep = run_episode_with(instance, policy, horizon, path.as_ref(), &mut tape)?;
        let (sum, comp) = by_counts.entry(ep.pull_counts).or_insert((0.0, 0.0));
        let p = tape.probability();
        let next = *sum + p;
        if sum.abs() >= p.abs() {
            *comp += (*sum - next) + p;
        } else {
            *comp += (p - next) + *sum;
        }
        *sum = next;
        if !tape.advance() {
            break;
        }
    }
    let mut atoms: Vec<(f64, f64)> = by_counts
        .into_iter()
        .map(|(counts, (sum, comp))| Ok((pseudo_regret(&counts, instance.gaps())?, sum + comp)))
        .collect::<Result<_>>()?;
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut support: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match support.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => support.push((v, p)),
        }
    }
    Ok(RegretDistribution { support })
}
