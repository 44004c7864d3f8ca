//! Experiment plans: TOML parsing, defaults and validation.

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use bandit_tails::bounds::Scenario;
use bandit_tails::env::{BaselineSchedule, NoiseKind, Rotation};
use bandit_tails::policy::check_exponents;
use bandit_tails::stats::FitMode;

pub const DEFAULT_REPLICATIONS: u64 = 10_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Noted in every manifest whose plan contains a gap sweep.
pub const SWEEP_NOTE: &str = "worst-case tail probabilities are approximated by the maximum over a finite gap sweep \
(gap = c * x / T for each c, plus any fixed gaps); the true supremum over instances may be larger";

fn default_replications() -> u64 {
    DEFAULT_REPLICATIONS
}

fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE
}

fn default_scenarios() -> Vec<Scenario> {
    vec![Scenario::WorstCase]
}

fn default_sigma() -> f64 {
    1.0
}

fn default_top_mean() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub name: String,
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(rename = "T_grid")]
    pub t_grid: Vec<u64>,
    pub policies: Vec<PolicyConfig>,
    pub instances: Vec<InstanceConfig>,
    #[serde(default)]
    pub thresholds: ThresholdRule,
    /// Bound families attached to tail curves.
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<Scenario>,
    #[serde(default)]
    pub fits: Vec<FitConfig>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Se,
    SeRandomPermutation,
    Ucb,
    FixedArm,
    UcbL,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BonusKind {
    Standard,
    TailOptimalFixed,
    TailOptimalAnytime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(default)]
    pub name: String,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub bonus: Option<BonusKind>,
    #[serde(default)]
    pub eta: Option<f64>,
    /// Noise scale assumed by the standard radius; the instance's own scale
    /// when absent.
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub eta1: Option<f64>,
    #[serde(default)]
    pub eta2: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub arm: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub means: Option<Vec<f64>>,
    #[serde(default)]
    pub sweep: Option<SweepRule>,
    #[serde(default)]
    pub linear: Option<LinearConfig>,
    #[serde(default = "default_noise")]
    pub noise: NoiseKind,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub baseline: Option<BaselineSchedule>,
}

fn default_noise() -> NoiseKind {
    NoiseKind::Gaussian
}

/// Two-armed instances with means `(top, top - gap)` where
/// `gap = c * T^x_exponent / T` for every `c`, plus the fixed `gaps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRule {
    pub c: Vec<f64>,
    #[serde(default = "default_x_exponent")]
    pub x_exponent: f64,
    #[serde(default)]
    pub gaps: Vec<f64>,
    #[serde(default = "default_top_mean")]
    pub top_mean: f64,
}

fn default_x_exponent() -> f64 {
    1.0
}

impl SweepRule {
    /// `(label, gap)` for each sweep member at horizon `t`.
    pub fn members(&self, t: u64) -> Vec<(String, f64)> {
        let t = t as f64;
        let x = t.powf(self.x_exponent);
        let mut out: Vec<(String, f64)> = self.c.iter().map(|c| (format!("c={c}"), c * x / t)).collect();
        out.extend(self.gaps.iter().map(|g| (format!("gap={g}"), *g)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    pub theta: Vec<f64>,
    /// Standard basis when absent.
    #[serde(default)]
    pub actions: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub rotation: Rotation,
}

/// Exactly one of the fields selects the rule; the default is a fraction
/// grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// `x = fraction * T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractions: Option<Vec<f64>>,
    /// `x = T^delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linspace: Option<Linspace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

pub const DEFAULT_FRACTIONS: [f64; 5] = [0.01, 0.02, 0.05, 0.1, 0.2];

impl ThresholdRule {
    fn selected(&self) -> usize {
        [
            self.values.is_some(),
            self.fractions.is_some(),
            self.exponents.is_some(),
            self.linspace.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count()
    }

    /// Sorted, deduplicated positive thresholds for horizon `t`.
    pub fn grid(&self, t: u64) -> Vec<f64> {
        let tf = t as f64;
        let mut xs: Vec<f64> = if let Some(v) = &self.values {
            v.clone()
        } else if let Some(f) = &self.fractions {
            f.iter().map(|f| f * tf).collect()
        } else if let Some(e) = &self.exponents {
            e.iter().map(|d| tf.powf(*d)).collect()
        } else if let Some(l) = &self.linspace {
            linspace(l.from, l.to, l.count)
        } else {
            DEFAULT_FRACTIONS.iter().map(|f| f * tf).collect()
        };
        xs.retain(|x| x.is_finite() && *x > 0.0);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }
}

pub fn linspace(from: f64, to: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![from],
        n => (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub mode: FitMode,
    /// Tail modes: threshold `x = fraction * T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    /// Tail modes: threshold `x = T^exponent`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

impl FitConfig {
    pub fn threshold(&self, t: u64) -> Option<f64> {
        let tf = t as f64;
        self.fraction
            .map(|f| f * tf)
            .or_else(|| self.exponent.map(|e| tf.powf(e)))
    }

    pub fn label(&self) -> String {
        match (self.fraction, self.exponent) {
            (Some(f), _) => format!("x={f}*T"),
            (None, Some(e)) => format!("x=T^{e}"),
            _ => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_true")]
    pub episodes: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { episodes: true }
    }
}

/// Parses and validates a TOML plan, filling defaults and labels.
pub fn parse_config(text: &str) -> Result<ExperimentPlan> {
    let mut plan: ExperimentPlan = toml::from_str(text).context("invalid experiment config")?;
    plan.normalize();
    plan.validate()?;
    Ok(plan)
}

impl ExperimentPlan {
    fn normalize(&mut self) {
        for (i, p) in self.policies.iter_mut().enumerate() {
            if p.name.is_empty() {
                p.name = format!("policy{i}");
            }
            let tail = matches!(p.bonus, Some(BonusKind::TailOptimalFixed | BonusKind::TailOptimalAnytime));
            if tail {
                p.eta1.get_or_insert(1.0);
                p.eta2.get_or_insert(1.0);
                p.alpha.get_or_insert(0.5);
                p.beta.get_or_insert(0.5);
            }
            if p.bonus == Some(BonusKind::Standard) {
                p.eta.get_or_insert(1.0);
            }
        }
        for (i, inst) in self.instances.iter_mut().enumerate() {
            if inst.name.is_empty() {
                inst.name = format!("instance{i}");
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.name.is_empty(), "field `name` must be nonempty");
        ensure!(
            self.confidence > 0.0 && self.confidence < 1.0,
            "field `confidence` must lie in (0, 1), got {}",
            self.confidence
        );
        ensure!(!self.t_grid.is_empty(), "field `T_grid` must list at least one horizon");
        ensure!(self.t_grid.iter().all(|t| *t >= 1), "field `T_grid`: horizons must be >= 1");
        ensure!(!self.policies.is_empty(), "field `policies` must list at least one policy");
        ensure!(!self.instances.is_empty(), "field `instances` must list at least one instance");
        ensure!(!self.scenarios.is_empty(), "field `scenarios` must be nonempty");
        let mut names: Vec<&str> = self.policies.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        ensure!(
            names.windows(2).all(|w| w[0] != w[1]),
            "field `policies`: names must be unique"
        );
        for p in &self.policies {
            p.validate().with_context(|| format!("policy `{}`", p.name))?;
        }
        for inst in &self.instances {
            inst.validate(&self.t_grid)
                .with_context(|| format!("instance `{}`", inst.name))?;
        }
        ensure!(
            self.thresholds.selected() <= 1,
            "field `thresholds`: choose exactly one of values, fractions, exponents, linspace"
        );
        for f in &self.fits {
            if f.mode != FitMode::RegretScaling {
                ensure!(
                    f.fraction.is_some() != f.exponent.is_some(),
                    "field `fits`: tail fits need exactly one of `fraction` or `exponent`"
                );
            }
        }
        if self.t_grid.len() < 3 && !self.fits.is_empty() {
            bail!("field `fits`: exponent fits need at least 3 horizons in `T_grid`");
        }
        Ok(())
    }

    pub fn has_sweep(&self) -> bool {
        self.instances.iter().any(|i| i.sweep.is_some())
    }
}

impl PolicyConfig {
    fn validate(&self) -> Result<()> {
        if let (Some(a), Some(b)) = (self.alpha, self.beta) {
            check_exponents(a, b).map_err(|e| anyhow!("field `alpha`/`beta`: {e}"))?;
        }
        for (field, v) in [
            ("eta", self.eta),
            ("sigma", self.sigma),
            ("eta1", self.eta1),
            ("eta2", self.eta2),
        ] {
            if let Some(v) = v {
                ensure!(v.is_finite() && v >= 0.0, "field `{field}` must be finite and >= 0, got {v}");
            }
        }
        match (self.algorithm, self.bonus) {
            (Algorithm::FixedArm, _) => {
                ensure!(self.arm.is_some(), "field `arm` is required for fixed_arm");
            }
            (_, None) => bail!("field `bonus` is required for {:?}", self.algorithm),
            (Algorithm::Se | Algorithm::SeRandomPermutation, Some(BonusKind::TailOptimalAnytime)) => {
                bail!("field `bonus`: elimination policies need a fixed-horizon radius")
            }
            (Algorithm::UcbL, Some(BonusKind::Standard)) => {
                bail!("field `bonus`: ucb_l uses tail_optimal_fixed or tail_optimal_anytime")
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.algorithm == Algorithm::UcbL
    }
}

impl InstanceConfig {
    fn validate(&self, t_grid: &[u64]) -> Result<()> {
        let chosen = [self.means.is_some(), self.sweep.is_some(), self.linear.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        ensure!(chosen == 1, "set exactly one of `means`, `sweep`, `linear`");
        ensure!(
            self.sigma.is_finite() && self.sigma >= 0.0,
            "field `sigma` must be finite and >= 0"
        );
        if let Some(b) = &self.baseline {
            BaselineSchedule::new(b.bound, b.kind.clone(), b.seed).context("field `baseline`")?;
            ensure!(self.linear.is_none(), "field `baseline` does not apply to linear instances");
        }
        if let Some(s) = &self.sweep {
            ensure!(!s.c.is_empty() || !s.gaps.is_empty(), "field `sweep`: empty gap set");
            ensure!((0.0..=1.0).contains(&s.top_mean), "field `sweep.top_mean` must lie in [0, 1]");
            for &t in t_grid {
                for (label, gap) in s.members(t) {
                    ensure!(
                        gap >= 0.0 && gap <= s.top_mean,
                        "field `sweep`: member {label} at T = {t} has gap {gap} outside [0, top_mean]"
                    );
                }
            }
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.linear.is_some()
    }
}
