//! Bandit environments: K-armed instances, baseline-reward schedules and
//! linear instances, all sharing one family of sub-Gaussian noise laws.
//!
//! Arms and actions are indexed from 0. Time steps are indexed from 1.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    /// Two-point law on `{-sigma, +sigma}`.
    Rademacher,
    /// Uniform on `[-sigma*sqrt(3), sigma*sqrt(3)]` (variance `sigma^2`).
    UniformSymmetric,
}

/// Zero-mean, `sigma`-sub-Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(domain(format!("noise scale must be finite and >= 0, got {sigma}")));
        }
        Ok(Self { kind, sigma })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian, sigma)
    }

    pub fn rademacher(sigma: f64) -> Result<Self> {
        Self::new(NoiseKind::Rademacher, sigma)
    }

    pub fn uniform(sigma: f64) -> Result<Self> {
        Self::new(NoiseKind::UniformSymmetric, sigma)
    }
}

/// One draw from `model`.
pub fn sample_noise<R: Rng + ?Sized>(model: &NoiseModel, stream: &mut R) -> f64 {
    match model.kind {
        NoiseKind::Gaussian => {
            let z: f64 = stream.sample(StandardNormal);
            model.sigma * z
        }
        NoiseKind::Rademacher => {
            if stream.random::<bool>() {
                model.sigma
            } else {
                -model.sigma
            }
        }
        NoiseKind::UniformSymmetric => {
            let half_width = model.sigma * 3f64.sqrt();
            let u: f64 = stream.random();
            half_width * (2.0 * u - 1.0)
        }
    }
}

/// K-armed instance with means in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    means: Vec<f64>,
    noise: NoiseModel,
    gaps: Vec<f64>,
}

impl BanditInstance {
    pub fn new(means: Vec<f64>, noise: NoiseModel) -> Result<Self> {
        if means.len() < 2 {
            return Err(input(format!("need at least 2 arms, got {}", means.len())));
        }
        if let Some((k, m)) = means
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && (0.0..=1.0).contains(*m)))
        {
            return Err(Error::OutOfRange {
                what: "arm mean",
                value: format!("arm {k}: {m}"),
                allowed: "[0, 1]".into(),
            });
        }
        let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gaps = means.iter().map(|m| best - m).collect();
        Ok(Self { means, noise, gaps })
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// `best mean - mean_k` for every arm.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest-index optimal arm.
    pub fn best_arm(&self) -> usize {
        self.gaps.iter().position(|g| *g == 0.0).unwrap_or(0)
    }
}

/// A reward and the noise component that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub reward: f64,
    pub noise: f64,
}

/// `b_t + mean_arm + noise`, with `b_t = 0` when no baseline path is given.
pub fn sample_reward<R: Rng + ?Sized>(
    instance: &BanditInstance,
    arm: usize,
    t: u64,
    baseline: Option<&BaselinePath>,
    stream: &mut R,
) -> Result<Draw> {
    if arm >= instance.arms() {
        return Err(Error::OutOfRange {
            what: "arm index",
            value: arm.to_string(),
            allowed: format!("0..{}", instance.arms()),
        });
    }
    let b = match baseline {
        Some(path) => path.value(t)?,
        None => 0.0,
    };
    let noise = sample_noise(&instance.noise, stream);
    Ok(Draw {
        reward: b + instance.means[arm] + noise,
        noise,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineKind {
    Zero,
    Constant { value: f64 },
    /// `B/2 + amplitude * sin(2*pi*t/period)`; needs `amplitude <= B/2`.
    Sinusoid { amplitude: f64, period: f64 },
    /// Reflected walk on `[0, B]` started at `B/2` with uniform steps in `[-B/10, B/10]`.
    SeededRandomWalk,
    /// `(start, value)` segments; the first segment must start at `t = 1`.
    Piecewise { segments: Vec<(u64, f64)> },
}

/// An oblivious baseline-reward schedule with values in `[0, bound]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSchedule {
    pub bound: f64,
    pub kind: BaselineKind,
    #[serde(default)]
    pub seed: u64,
}

impl BaselineSchedule {
    pub fn new(bound: f64, kind: BaselineKind, seed: u64) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(domain(format!("baseline bound must be finite and >= 0, got {bound}")));
        }
        let in_range = |v: f64| v.is_finite() && (0.0..=bound).contains(&v);
        match &kind {
            BaselineKind::Zero | BaselineKind::SeededRandomWalk => {}
            BaselineKind::Constant { value } => {
                if !in_range(*value) {
                    return Err(domain(format!("constant baseline {value} outside [0, {bound}]")));
                }
            }
            BaselineKind::Sinusoid { amplitude, period } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0 && *amplitude <= bound / 2.0) {
                    return Err(domain(format!(
                        "sinusoid amplitude {amplitude} must lie in [0, B/2] = [0, {}]",
                        bound / 2.0
                    )));
                }
                if !(period.is_finite() && *period > 0.0) {
                    return Err(domain(format!("sinusoid period must be > 0, got {period}")));
                }
            }
            BaselineKind::Piecewise { segments } => {
                if segments.first().map(|s| s.0) != Some(1) {
                    return Err(input("piecewise baseline must start at t = 1"));
                }
                if segments.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(input("piecewise segment starts must be strictly increasing"));
                }
                if let Some((s, v)) = segments.iter().find(|(_, v)| !in_range(*v)) {
                    return Err(domain(format!(
                        "piecewise value {v} at t = {s} outside [0, {bound}]"
                    )));
                }
            }
        }
        Ok(Self { bound, kind, seed })
    }

    pub fn zero() -> Self {
        Self {
            bound: 0.0,
            kind: BaselineKind::Zero,
            seed: 0,
        }
    }

    /// Materialize `b_1, ..., b_horizon`. Pure in `(kind, bound, horizon, seed)`.
    pub fn path(&self, horizon: u64) -> BaselinePath {
        let b = self.bound;
        let n = horizon as usize;
        let mut values = Vec::with_capacity(n);
        match &self.kind {
            BaselineKind::Zero => values.resize(n, 0.0),
            BaselineKind::Constant { value } => values.resize(n, *value),
            BaselineKind::Sinusoid { amplitude, period } => {
                for t in 1..=horizon {
                    let v = b / 2.0 + amplitude * (2.0 * PI * t as f64 / period).sin();
                    values.push(v.clamp(0.0, b));
                }
            }
            BaselineKind::SeededRandomWalk => {
                let mut rng = seed::stream(seed::splitmix64(self.seed ^ 0xB45E_11E0));
                let step = b / 10.0;
                let mut v = b / 2.0;
                for _ in 0..n {
                    values.push(v);
                    let u: f64 = rng.random();
                    v += step * (2.0 * u - 1.0);
                    if v > b {
                        v = 2.0 * b - v;
                    }
                    if v < 0.0 {
                        v = -v;
                    }
                    v = v.clamp(0.0, b);
                }
            }
            BaselineKind::Piecewise { segments } => {
                let mut seg = 0;
                for t in 1..=horizon {
                    while seg + 1 < segments.len() && segments[seg + 1].0 <= t {
                        seg += 1;
                    }
                    values.push(segments[seg].1);
                }
            }
        }
        BaselinePath { values }
    }
}

/// Materialized baseline values, `values[t - 1] = b_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselinePath {
    values: Vec<f64>,
}

impl BaselinePath {
    pub fn value(&self, t: u64) -> Result<f64> {
        if t == 0 || t as usize > self.values.len() {
            return Err(Error::OutOfRange {
                what: "time index",
                value: t.to_string(),
                allowed: format!("1..={}", self.values.len()),
            });
        }
        Ok(self.values[t as usize - 1])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// How the action set changes between rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    /// Same set every round.
    #[default]
    Fixed,
    /// Round `t` shifts every action's coordinates cyclically by `(t - 1) mod d`.
    Cyclic,
}

/// Stochastic linear bandit with a finite action set.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInstance {
    theta: Vec<f64>,
    /// One action set per rotation phase; length 1 for `Rotation::Fixed`.
    phases: Vec<Vec<Vec<f64>>>,
    rotation: Rotation,
    noise: NoiseModel,
    uniform_gap: f64,
}

impl LinearInstance {
    pub fn new(
        theta: Vec<f64>,
        actions: Vec<Vec<f64>>,
        rotation: Rotation,
        noise: NoiseModel,
    ) -> Result<Self> {
        let d = theta.len();
        if d == 0 {
            return Err(input("parameter vector must be nonempty"));
        }
        if theta.iter().any(|v| !(v.is_finite() && v.abs() <= 1.0)) {
            return Err(domain("parameter vector must satisfy max-norm <= 1"));
        }
        if actions.len() < 2 {
            return Err(input(format!("need at least 2 actions, got {}", actions.len())));
        }
        for (i, a) in actions.iter().enumerate() {
            if a.len() != d {
                return Err(input(format!(
                    "action {i} has dimension {}, expected {d}",
                    a.len()
                )));
            }
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm <= 1.0 + 1e-12) {
                return Err(domain(format!("action {i} has Euclidean norm {norm} > 1")));
            }
        }
        let phases: Vec<Vec<Vec<f64>>> = match rotation {
            Rotation::Fixed => vec![actions],
            Rotation::Cyclic => (0..d)
                .map(|shift| {
                    actions
                        .iter()
                        .map(|a| (0..d).map(|j| a[(j + d - shift) % d]).collect())
                        .collect()
                })
                .collect(),
        };
        let uniform_gap = phases
            .iter()
            .map(|set| set_gap(&theta, set))
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            theta,
            phases,
            rotation,
            noise,
            uniform_gap,
        })
    }

    /// The standard basis `{e_1, ..., e_d}`.
    pub fn basis_actions(d: usize) -> Vec<Vec<f64>> {
        (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn num_actions(&self) -> usize {
        self.phases[0].len()
    }

    /// Action set offered at round `t >= 1`.
    pub fn action_set(&self, t: u64) -> &[Vec<f64>] {
        let phase = (t.saturating_sub(1) % self.phases.len() as u64) as usize;
        &self.phases[phase]
    }

    /// Smallest gap between the best action and any other action, over every round.
    pub fn uniform_gap(&self) -> f64 {
        self.uniform_gap
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn set_gap(theta: &[f64], set: &[Vec<f64>]) -> f64 {
    let values: Vec<f64> = set.iter().map(|a| dot(theta, a)).collect();
    let star = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    set.iter()
        .enumerate()
        .filter(|(i, a)| *i != star && **a != set[star])
        .map(|(i, _)| values[star] - values[i])
        .fold(f64::INFINITY, f64::min)
}

/// `theta . action`, for an action offered by the instance in some round.
pub fn linear_mean(instance: &LinearInstance, action: &[f64]) -> Result<f64> {
    let offered = instance
        .phases
        .iter()
        .any(|set| set.iter().any(|a| a.as_slice() == action));
    if !offered {
        return Err(input(format!("action {action:?} is not in the action set")));
    }
    Ok(dot(&instance.theta, action))
}
