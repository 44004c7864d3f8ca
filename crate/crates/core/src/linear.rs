//! Linear UCB with the tail-aware radius
//! `rad_t(z) = min(eta1 (t/d)^alpha z, eta2 s^(beta/2) sqrt(z)) + sqrt(d z)`,
//! where `z = a' V^{-1} a`, `s = T` for the fixed-time variant and `s = t`
//! for the any-time variant.
//!
//! `V^{-1}` is maintained by rank-one (Sherman-Morrison) updates and
//! recomputed from the accumulated design matrix every
//! [`REFRESH_INTERVAL`] updates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::env::LinearInstance;
use crate::error::{domain, input, Result};
use crate::policy::{argmax, check_exponents};
use crate::seed;
use crate::sim::EpisodeResult;
use crate::source::{RngSource, Source};

pub const REFRESH_INTERVAL: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "timing", rename_all = "snake_case")]
pub enum Timing {
    FixedTime { horizon: u64 },
    Anytime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearBonusSpec {
    pub eta1: f64,
    pub eta2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
    pub timing: Timing,
}

impl LinearBonusSpec {
    pub fn new(eta1: f64, eta2: f64, alpha: f64, beta: f64, dim: usize, timing: Timing) -> Result<Self> {
        for (name, v) in [("eta1", eta1), ("eta2", eta2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        check_exponents(alpha, beta)?;
        if dim == 0 {
            return Err(input("dimension must be >= 1"));
        }
        if let Timing::FixedTime { horizon } = timing {
            if horizon < dim as u64 {
                return Err(domain(format!(
                    "fixed-time linear radius needs T >= d, got T = {horizon}, d = {dim}"
                )));
            }
        }
        Ok(Self {
            eta1,
            eta2,
            alpha,
            beta,
            dim,
            timing,
        })
    }

    /// Radius for squared norm `z = a' V^{-1} a` at round `t`.
    pub fn radius(&self, z: f64, t: u64) -> f64 {
        let z = z.max(0.0);
        let d = self.dim as f64;
        let t = t.max(1) as f64;
        let s = match self.timing {
            Timing::FixedTime { horizon } => horizon as f64,
            Timing::Anytime => t,
        };
        let first = self.eta1 * (t / d).powf(self.alpha) * z;
        let second = self.eta2 * s.powf(self.beta / 2.0) * z.sqrt();
        first.min(second) + (d * z).sqrt()
    }
}

pub fn radl_eval(spec: &LinearBonusSpec, z: f64, t: u64) -> f64 {
    spec.radius(z, t)
}

/// Ridge statistics for UCB-L with `V_0 = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearState {
    pub vinv: DMatrix<f64>,
    /// `V_t = I + sum a a'`, kept for periodic recomputation of `vinv`.
    pub design: DMatrix<f64>,
    pub xty: DVector<f64>,
    pub estimate: DVector<f64>,
    pub time: u64,
    since_refresh: u64,
    /// Largest Frobenius deviation seen at a refresh.
    pub max_refresh_drift: f64,
}

impl LinearState {
    pub fn new(dim: usize) -> Self {
        Self {
            vinv: DMatrix::identity(dim, dim),
            design: DMatrix::identity(dim, dim),
            xty: DVector::zeros(dim),
            estimate: DVector::zeros(dim),
            time: 0,
            since_refresh: 0,
            max_refresh_drift: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.xty.len()
    }

    /// `a' V^{-1} a`.
    pub fn norm_sq(&self, action: &[f64]) -> f64 {
        let a = DVector::from_column_slice(action);
        (a.transpose() * &self.vinv * &a)[(0, 0)]
    }

    /// Recomputes `V^{-1}` from the design matrix and returns the Frobenius
    /// distance between the maintained and the recomputed inverse.
    pub fn refresh(&mut self) -> f64 {
        let exact = match self.design.clone().cholesky() {
            Some(c) => c.inverse(),
            None => return f64::NAN,
        };
        let drift = (&self.vinv - &exact).norm();
        self.vinv = exact;
        self.estimate = &self.vinv * &self.xty;
        self.since_refresh = 0;
        self.max_refresh_drift = self.max_refresh_drift.max(drift);
        drift
    }
}

/// Index of the action maximizing `estimate' a + rad_{t+1}(a' V^{-1} a)`.
pub fn ucbl_select(state: &LinearState, spec: &LinearBonusSpec, actions: &[Vec<f64>]) -> Result<usize> {
    if actions.is_empty() {
        return Err(input("action list is empty"));
    }
    let t = state.time + 1;
    let scores: Vec<f64> = actions
        .iter()
        .map(|a| {
            let mean: f64 = state.estimate.iter().zip(a).map(|(x, y)| x * y).sum();
            mean + spec.radius(state.norm_sq(a), t)
        })
        .collect();
    Ok(argmax(&scores))
}

/// Rank-one update of the ridge statistics with `(action, reward)`.
pub fn ucbl_update(state: &mut LinearState, action: &[f64], reward: f64) {
    let a = DVector::from_column_slice(action);
    let va = &state.vinv * &a;
    let denom = 1.0 + a.dot(&va);
    state.vinv -= (&va * va.transpose()) / denom;
    state.design += &a * a.transpose();
    state.xty += &a * reward;
    state.time += 1;
    state.since_refresh += 1;
    if state.since_refresh >= REFRESH_INTERVAL {
        state.refresh();
    } else {
        state.estimate = &state.vinv * &state.xty;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearEpisode {
    pub result: EpisodeResult,
    /// `sum_t a_t' V_{t-1}^{-1} a_t`.
    pub elliptical_potential: f64,
    pub max_refresh_drift: f64,
}

pub fn run_linear_episode(
    instance: &LinearInstance,
    spec: &LinearBonusSpec,
    horizon: u64,
    seed: u64,
) -> Result<LinearEpisode> {
    let mut source = RngSource(seed::stream(seed));
    let mut ep = run_linear_episode_with(instance, spec, horizon, &mut source)?;
    ep.result.seed = seed;
    Ok(ep)
}

pub fn run_linear_episode_with<S: Source + ?Sized>(
    instance: &LinearInstance,
    spec: &LinearBonusSpec,
    horizon: u64,
    source: &mut S,
) -> Result<LinearEpisode> {
    if horizon == 0 {
        return Err(input("horizon must be >= 1"));
    }
    if spec.dim != instance.dim() {
        return Err(input(format!(
            "radius dimension {} does not match instance dimension {}",
            spec.dim,
            instance.dim()
        )));
    }
    let theta = instance.theta();
    let mut state = LinearState::new(instance.dim());
    let mut counts = vec![0u64; instance.num_actions()];
    let mut pseudo = 0.0;
    let mut noise_sum = 0.0;
    let mut potential = 0.0;
    for t in 1..=horizon {
        let set = instance.action_set(t);
        let values: Vec<f64> = set
            .iter()
            .map(|a| a.iter().zip(theta).map(|(x, y)| x * y).sum())
            .collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let idx = ucbl_select(&state, spec, set)?;
        potential += state.norm_sq(&set[idx]);
        let eps = source.noise(instance.noise());
        ucbl_update(&mut state, &set[idx], values[idx] + eps);
        counts[idx] += 1;
        pseudo += best - values[idx];
        noise_sum += eps;
    }
    Ok(LinearEpisode {
        result: EpisodeResult::new(counts, pseudo, noise_sum, horizon, 0),
        elliptical_potential: potential,
        max_refresh_drift: state.max_refresh_drift,
    })
}
