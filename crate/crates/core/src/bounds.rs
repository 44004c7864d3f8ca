//! Closed-form regret-tail upper bounds and critical-rate envelopes.
//!
//! Every bound is a sum of terms `prefactor * exp(-argument)`. Terms are
//! evaluated as `exp(ln prefactor - argument)` so that large polynomial
//! prefactors never overflow and large arguments underflow cleanly to 0.
//! Results are clamped to `[0, 1]`. A positive part `(v)_+` that vanishes
//! zeroes every product and power built on it (including `0^0`), so the
//! corresponding exponential is exactly 1.

use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Error, Result};
use crate::policy::check_exponents;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    WorstCase,
    InstanceDependent,
}

/// Whether the policy knows the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knowledge {
    FixedTime,
    Anytime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "env", rename_all = "snake_case")]
pub enum BoundEnv {
    Plain,
    /// Baseline rewards in `[0, bound]`.
    Baseline { bound: f64 },
    Linear { dim: usize, uniform_gap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub scenario: Scenario,
    pub timing: Knowledge,
    pub env: BoundEnv,
    pub horizon: u64,
    /// K for plain and baseline environments; ignored for linear ones.
    pub arms: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta1: f64,
    pub eta2: f64,
    /// Per-arm gaps, needed by instance-dependent plain/baseline bounds.
    #[serde(default)]
    pub gaps: Vec<f64>,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        check_exponents(self.alpha, self.beta)?;
        for (name, v) in [("sigma", self.sigma), ("eta1", self.eta1), ("eta2", self.eta2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        match self.env {
            BoundEnv::Plain | BoundEnv::Baseline { .. } => {
                if self.horizon < 3 {
                    return Err(domain(format!("K-armed bounds need T >= 3, got {}", self.horizon)));
                }
                if self.arms < 2 {
                    return Err(input(format!("K-armed bounds need K >= 2, got {}", self.arms)));
                }
                if let BoundEnv::Baseline { bound } = self.env {
                    if !(bound.is_finite() && bound >= 0.0) {
                        return Err(domain(format!("baseline bound must be >= 0, got {bound}")));
                    }
                    if self.timing == Knowledge::Anytime {
                        return Err(input("no any-time bound exists for baseline-reward bandits"));
                    }
                }
                if self.scenario == Scenario::InstanceDependent {
                    delta_zero(&self.gaps)?;
                }
            }
            BoundEnv::Linear { dim, uniform_gap } => {
                if dim == 0 {
                    return Err(input("dimension must be >= 1"));
                }
                if self.horizon < dim as u64 {
                    return Err(domain(format!(
                        "linear bounds need T >= d, got T = {}, d = {dim}",
                        self.horizon
                    )));
                }
                if self.scenario == Scenario::InstanceDependent && !(uniform_gap > 0.0) {
                    return Err(Error::Degenerate(format!(
                        "instance-dependent linear bound needs a positive uniform gap, got {uniform_gap}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `1 / sum_{k: gap_k > 0} 1/gap_k`.
pub fn delta_zero(gaps: &[f64]) -> Result<f64> {
    let inv: f64 = gaps.iter().filter(|g| **g > 0.0).map(|g| 1.0 / g).sum();
    if inv == 0.0 {
        return Err(Error::Degenerate("every gap is zero".into()));
    }
    Ok(1.0 / inv)
}

fn pos(v: f64) -> f64 {
    v.max(0.0)
}

/// `(v)_+^e`, with a vanished positive part giving 0 for every exponent.
fn ppow(v: f64, e: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        v.powf(e)
    }
}

/// `num / den` with `0 / anything = 0`.
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Sum of `exp(log_prefactor - argument)` over terms, clamped to `[0, 1]`.
fn clamp_sum(terms: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for &(log_pref, arg) in terms {
        total += (log_pref - arg).exp();
        if total >= 1.0 {
            return 1.0;
        }
    }
    total.clamp(0.0, 1.0)
}

fn check_x(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(input(format!("threshold must be finite and > 0, got {x}")));
    }
    Ok(())
}

/// Tail bound `P(R >= x)` for K-armed bandits, with or without baseline
/// rewards. Plain fixed-time parameters select the SE bound with the
/// tail-optimal radius, plain any-time the UCB bound with the any-time radius,
/// baseline fixed-time the SEwRP bound.
pub fn mab_tail_bound(params: &BoundParams, x: f64) -> Result<f64> {
    params.validate()?;
    check_x(x)?;
    let terms = match (params.env, params.timing, params.scenario) {
        (BoundEnv::Plain, Knowledge::FixedTime, Scenario::WorstCase) => {
            fixed_worst_case(params, x, 32.0 * params.sigma.powi(2), 8.0 * params.sigma.powi(2))
        }
        (BoundEnv::Plain, Knowledge::FixedTime, Scenario::InstanceDependent) => {
            fixed_instance(params, x, 8.0 * params.sigma.powi(2), 8.0 * params.sigma.powi(2))?
        }
        (BoundEnv::Baseline { bound }, Knowledge::FixedTime, Scenario::WorstCase) => {
            let s2 = (bound + 2.0 * params.sigma).powi(2);
            fixed_worst_case(params, x, 8.0 * s2, 2.0 * s2)
        }
        (BoundEnv::Baseline { bound }, Knowledge::FixedTime, Scenario::InstanceDependent) => {
            let s2 = (bound + 2.0 * params.sigma).powi(2);
            fixed_instance(params, x, 2.0 * s2, 2.0 * s2)?
        }
        (BoundEnv::Plain, Knowledge::Anytime, Scenario::WorstCase) => anytime_worst_case(params, x),
        (BoundEnv::Plain, Knowledge::Anytime, Scenario::InstanceDependent) => {
            anytime_instance(params, x)?
        }
        (BoundEnv::Baseline { .. }, Knowledge::Anytime, _) => unreachable!("rejected by validate"),
        (BoundEnv::Linear { .. }, _, _) => {
            return Err(input("linear parameters passed to the K-armed bound"))
        }
    };
    Ok(clamp_sum(&terms))
}

/// Worst-case fixed-time bound. `den1` divides the squared first-term
/// numerator per unit `K T`, `den2` divides the second-term argument.
fn fixed_worst_case(p: &BoundParams, x: f64, den1: f64, den2: f64) -> Vec<(f64, f64)> {
    let k = p.arms as f64;
    let t = p.horizon as f64;
    let sqrt_ln_t = t.ln().sqrt();
    let shortfall = x - k - 4.0 * p.eta1 * k.powf(1.0 - p.alpha) * t.powf(p.alpha) * sqrt_ln_t;
    let arg1 = ratio(pos(shortfall).powi(2), den1 * k * t);
    let inner = (p.eta1 * pos(x - k) / (2.0 * k.powf(p.alpha) * t.powf(1.0 - p.alpha)))
        .min(p.eta2.powi(2) * t.powf(p.beta) * sqrt_ln_t);
    let arg2 = ratio(sqrt_ln_t * inner, den2);
    vec![((6.0 * k).ln(), arg1), ((6.0 * k * k * t).ln(), arg2)]
}

fn fixed_instance(p: &BoundParams, x: f64, den1: f64, den2: f64) -> Result<Vec<(f64, f64)>> {
    let k = p.arms as f64;
    let t = p.horizon as f64;
    let ln_t = t.ln();
    let d0 = delta_zero(&p.gaps)?;
    let arg1 = ratio(pos((x - k) * d0 - 4.0 * p.eta2.powi(2) * t.powf(p.beta) * ln_t), den1);
    let mut terms = vec![((3.0 * k).ln(), arg1)];
    let cap = p.eta2.powi(2) * t.powf(p.beta) * ln_t.sqrt();
    for &gap in p.gaps.iter().filter(|g| **g > 0.0) {
        let inner = (p.eta1 * (t / k).powf(p.alpha) * gap).min(cap);
        terms.push(((3.0 * k * t).ln(), ratio(inner * ln_t.sqrt(), den2)));
    }
    Ok(terms)
}

fn anytime_worst_case(p: &BoundParams, x: f64) -> Vec<(f64, f64)> {
    let k = p.arms as f64;
    let t = p.horizon as f64;
    let ln_t = t.ln();
    let s2 = p.sigma.powi(2);
    let shortfall = x - k - 4.0 * p.eta1 * k.powf(1.0 - p.alpha) * t.powf(p.alpha);
    let arg1 = ratio(pos(shortfall).powi(2), 32.0 * s2 * k * t * ln_t);
    let a = ratio(
        p.eta1 * pos(x - k),
        2.0 * s2 * k.powf(p.alpha) * t.powf(1.0 - p.alpha) * ln_t,
    );
    let b = ratio(p.eta2.powi(2) * ppow(x - k, p.beta), 2.0 * s2 * ln_t.powf(p.beta));
    vec![
        ((2.0 * k * t * t).ln(), arg1),
        ((2.0 * k * t.powi(3)).ln(), a.min(b)),
    ]
}

fn anytime_instance(p: &BoundParams, x: f64) -> Result<Vec<(f64, f64)>> {
    let k = p.arms as f64;
    let t = p.horizon as f64;
    let s2 = p.sigma.powi(2);
    let d0 = delta_zero(&p.gaps)?;
    let arg1 = ratio(pos((x - k) * d0 - 4.0 * p.eta2.powi(2) * t.powf(p.beta)), 8.0 * s2);
    let a = ratio(
        p.eta1 * ppow(x - k, p.alpha) * d0.powf(p.alpha),
        s2 * k.powf(p.alpha),
    );
    let b = ratio(
        p.eta2.powi(2) * ppow(x - k, p.beta) * d0.powf(p.beta),
        2.0 * s2,
    );
    Ok(vec![((k * t * t).ln(), arg1), ((k * t.powi(3)).ln(), a.min(b))])
}

/// Tail bound `P(R >= x)` for UCB-L with the fixed-time or any-time radius.
pub fn linear_tail_bound(params: &BoundParams, x: f64) -> Result<f64> {
    params.validate()?;
    check_x(x)?;
    let (dim, gap) = match params.env {
        BoundEnv::Linear { dim, uniform_gap } => (dim, uniform_gap),
        _ => return Err(input("linear bound needs linear parameters")),
    };
    let d = dim as f64;
    let t = params.horizon as f64;
    let ln_t = t.ln();
    let s2 = params.sigma.powi(2);
    let (a, b) = (params.alpha, params.beta);
    let (e1, e2) = (params.eta1, params.eta2);
    let log_pref = (2.0 * d).ln() + (2.0 * d + 1.0) * (t / d).ln();
    let excess = x - 2.0 * d.sqrt();
    let second_cap = match params.timing {
        Knowledge::FixedTime => ratio(e2 * e2 * t.powf(b), 2.0 * s2),
        Knowledge::Anytime => ratio(
            e2 * e2 * ppow(excess, b),
            16.0 * s2 * d.powf(b / 2.0) * ln_t.powf(b),
        ),
    };
    let (arg1, arg2) = match params.scenario {
        Scenario::WorstCase => {
            let shortfall = excess - 16.0 * d * t.sqrt() * ln_t - 8.0 * e1 * d.powf(1.0 - a) * t.powf(a) * ln_t;
            let arg1 = ratio(pos(shortfall).powi(2), 128.0 * s2 * d * t * ln_t * ln_t);
            let first = ratio(e1 * pos(excess), 4.0 * s2 * d.powf(a) * t.powf(1.0 - a) * ln_t);
            (arg1, first.min(second_cap))
        }
        Scenario::InstanceDependent => {
            let arg1 = ratio(
                pos(gap * excess - 128.0 * d - 32.0 * e2 * e2 * t.powf(b)),
                32.0 * s2 * d * ln_t,
            );
            let first = ratio(
                e1 * gap * ppow(excess, a),
                8.0 * s2 * d.powf(1.5 * a) * ln_t.powf(a),
            );
            (arg1, first.min(second_cap))
        }
    };
    Ok(clamp_sum(&[(log_pref, arg1), (log_pref, arg2)]))
}

/// Dispatches to [`mab_tail_bound`] or [`linear_tail_bound`].
pub fn tail_bound(params: &BoundParams, x: f64) -> Result<f64> {
    match params.env {
        BoundEnv::Linear { .. } => linear_tail_bound(params, x),
        _ => mab_tail_bound(params, x),
    }
}

/// `min(1, exp(-x^2 / (2 sigma^2 T)))`, the accumulated-noise tail.
pub fn noise_tail_bound(x: f64, sigma: f64, horizon: u64) -> Result<f64> {
    if !(x >= 0.0) || !(sigma >= 0.0) || horizon == 0 {
        return Err(input(format!(
            "need x >= 0, sigma >= 0, T >= 1; got x = {x}, sigma = {sigma}, T = {horizon}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    Ok((-(x * x) / (2.0 * sigma * sigma * horizon as f64)).exp().min(1.0))
}

/// Polynomial rate whose negative is the critical log tail probability for
/// policies that are `alpha`-optimal and `beta`-consistent.
pub fn critical_rate(scenario: Scenario, horizon_known: bool, x: f64, horizon: f64, alpha: f64, beta: f64) -> f64 {
    match (scenario, horizon_known) {
        (Scenario::WorstCase, true) => (x / horizon.powf(1.0 - alpha)).min(horizon.powf(beta)),
        (Scenario::WorstCase, false) => (x / horizon.powf(1.0 - alpha)).min(x.powf(beta)),
        (Scenario::InstanceDependent, true) => horizon.powf(beta),
        (Scenario::InstanceDependent, false) => x.powf(beta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plain(scenario: Scenario, timing: Knowledge) -> BoundParams {
        BoundParams {
            scenario,
            timing,
            env: BoundEnv::Plain,
            horizon: 2000,
            arms: 2,
            sigma: 0.1,
            alpha: 0.5,
            beta: 0.5,
            eta1: 1.0,
            eta2: 1.0,
            gaps: vec![0.0, 0.2],
        }
    }

    fn linear(scenario: Scenario, timing: Knowledge) -> BoundParams {
        BoundParams {
            scenario,
            timing,
            env: BoundEnv::Linear {
                dim: 2,
                uniform_gap: 0.3,
            },
            horizon: 10_000,
            arms: 0,
            sigma: 0.1,
            alpha: 0.5,
            beta: 0.5,
            eta1: 1.0,
            eta2: 1.0,
            gaps: vec![],
        }
    }

    #[test]
    fn delta_zero_examples() {
        assert_relative_eq!(delta_zero(&[0.0, 0.1, 0.2]).unwrap(), 1.0 / 15.0, max_relative = 1e-14);
        assert_eq!(delta_zero(&[0.0, 0.37]).unwrap(), 0.37);
        assert!(delta_zero(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn vacuous_below_k() {
        for timing in [Knowledge::FixedTime, Knowledge::Anytime] {
            for scenario in [Scenario::WorstCase, Scenario::InstanceDependent] {
                let p = plain(scenario, timing);
                assert_eq!(mab_tail_bound(&p, 1.5).unwrap(), 1.0);
                assert_eq!(mab_tail_bound(&p, 2.0).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn zero_etas_are_vacuous() {
        let mut p = plain(Scenario::WorstCase, Knowledge::FixedTime);
        p.eta1 = 0.0;
        p.eta2 = 0.0;
        assert_eq!(mab_tail_bound(&p, 1500.0).unwrap(), 1.0);
    }

    #[test]
    fn fixed_worst_case_golden() {
        // Reference values from a 50-digit evaluation.
        let v = mab_tail_bound(&plain(Scenario::WorstCase, Knowledge::FixedTime), 800.0).unwrap();
        assert_relative_eq!(v, GOLDEN_FIXED_WORST, max_relative = 1e-12);
    }

    #[test]
    fn linear_instance_golden() {
        let mut p = linear(Scenario::InstanceDependent, Knowledge::FixedTime);
        p.horizon = 1_000_000;
        let v = linear_tail_bound(&p, 110_000.0).unwrap();
        assert_relative_eq!(v, GOLDEN_LINEAR_INSTANCE, max_relative = 1e-12);
    }

    #[test]
    fn vacuous_reference_points() {
        let p = plain(Scenario::WorstCase, Knowledge::FixedTime);
        assert_eq!(mab_tail_bound(&p, 600.0).unwrap(), 1.0);
        let terms = fixed_worst_case(&p, 600.0, 32.0 * 0.01, 8.0 * 0.01);
        assert_eq!(terms[0].1, 0.0);
        assert_relative_eq!(terms[0].0, 12f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(terms[1].0, 10.778956289890028, max_relative = 1e-14);
        assert_relative_eq!(terms[1].1, 162.92352030380525, max_relative = 1e-12);

        let q = linear(Scenario::InstanceDependent, Knowledge::FixedTime);
        assert_eq!(linear_tail_bound(&q, 3000.0).unwrap(), 1.0);
    }

    const GOLDEN_FIXED_WORST: f64 = 0.004465502995454220;
    const GOLDEN_LINEAR_INSTANCE: f64 = 3.936147891166635e-8;

    #[test]
    fn linear_vacuous_below_two_root_d() {
        for timing in [Knowledge::FixedTime, Knowledge::Anytime] {
            for scenario in [Scenario::WorstCase, Scenario::InstanceDependent] {
                let p = linear(scenario, timing);
                assert_eq!(linear_tail_bound(&p, 2.0 * 2f64.sqrt()).unwrap(), 1.0);
                assert_eq!(linear_tail_bound(&p, 1.0).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn linear_minimal_dimensions() {
        let mut p = linear(Scenario::WorstCase, Knowledge::FixedTime);
        p.env = BoundEnv::Linear {
            dim: 1,
            uniform_gap: 0.5,
        };
        p.horizon = 1;
        // ln T = 0: first term's argument is infinite, second is
        // eta2^2 / (2 sigma^2) = 50, prefactor 2.
        let v = linear_tail_bound(&p, 5.0).unwrap();
        assert_relative_eq!(v, 2.0 * (-50f64).exp(), max_relative = 1e-12);
        p.horizon = 0;
        assert!(linear_tail_bound(&p, 5.0).is_err());
        let mut q = linear(Scenario::WorstCase, Knowledge::FixedTime);
        q.horizon = 1;
        assert!(linear_tail_bound(&q, 5.0).is_err());
    }

    #[test]
    fn bounds_are_monotone_in_x() {
        let mut all = Vec::new();
        for timing in [Knowledge::FixedTime, Knowledge::Anytime] {
            for scenario in [Scenario::WorstCase, Scenario::InstanceDependent] {
                all.push((plain(scenario, timing), 2.0));
                all.push((linear(scenario, timing), 2.0 * 2f64.sqrt()));
                if timing == Knowledge::FixedTime {
                    let mut b = plain(scenario, timing);
                    b.env = BoundEnv::Baseline { bound: 1.0 };
                    all.push((b, 2.0));
                }
            }
        }
        for (p, lo) in all {
            let hi = p.horizon as f64;
            let mut prev = f64::INFINITY;
            for i in 1..=400 {
                let x = lo + (hi - lo) * i as f64 / 400.0;
                let v = tail_bound(&p, x).unwrap();
                assert!((0.0..=1.0).contains(&v));
                assert!(v <= prev + 1e-15, "{p:?} at {x}: {v} > {prev}");
                prev = v;
            }
        }
    }

    #[test]
    fn baseline_reduces_to_plain_at_zero_bound() {
        for scenario in [Scenario::WorstCase, Scenario::InstanceDependent] {
            let p = plain(scenario, Knowledge::FixedTime);
            let mut b = p.clone();
            b.env = BoundEnv::Baseline { bound: 0.0 };
            for x in [3.0, 50.0, 150.0, 400.0, 600.0, 1200.0] {
                let vp = mab_tail_bound(&p, x).unwrap();
                let vb = mab_tail_bound(&b, x).unwrap();
                assert_relative_eq!(vp, vb, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn baseline_anytime_is_rejected() {
        let mut p = plain(Scenario::WorstCase, Knowledge::Anytime);
        p.env = BoundEnv::Baseline { bound: 1.0 };
        assert!(mab_tail_bound(&p, 10.0).is_err());
        let mut q = plain(Scenario::InstanceDependent, Knowledge::FixedTime);
        q.gaps = vec![0.0, 0.0];
        assert!(mab_tail_bound(&q, 10.0).is_err());
        assert!(mab_tail_bound(&plain(Scenario::WorstCase, Knowledge::FixedTime), 0.0).is_err());
    }

    #[test]
    fn delta_zero_sandwich() {
        let gaps = [0.0, 0.05, 0.3, 0.7, 0.11];
        let d0 = delta_zero(&gaps).unwrap();
        let positive: Vec<f64> = gaps.iter().copied().filter(|g| *g > 0.0).collect();
        let min = positive.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(d0 <= min);
        assert!(d0 >= min / positive.len() as f64);
    }

    #[test]
    fn noise_tail_examples() {
        assert_eq!(noise_tail_bound(0.0, 1.0, 100).unwrap(), 1.0);
        assert_relative_eq!(noise_tail_bound(20.0, 1.0, 100).unwrap(), (-2f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(noise_tail_bound(20.0, 1.0, 100).unwrap(), 0.1353352832366127, max_relative = 1e-12);
        assert_eq!(noise_tail_bound(1.0, 0.0, 10).unwrap(), 0.0);
    }

    #[test]
    fn critical_rate_examples() {
        let t: f64 = 10_000.0;
        assert_relative_eq!(critical_rate(Scenario::WorstCase, true, t, t, 0.5, 0.5), t.sqrt(), max_relative = 1e-12);
        assert_eq!(critical_rate(Scenario::InstanceDependent, true, 123.0, t, 0.5, 0.3), t.powf(0.3));
        assert_eq!(critical_rate(Scenario::InstanceDependent, false, 123.0, t, 0.5, 0.3), 123f64.powf(0.3));
        let v = critical_rate(Scenario::WorstCase, false, t.powf(0.8), t, 0.6, 0.5);
        assert_relative_eq!(v, 10f64.powf(1.6), max_relative = 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn bounds_stay_in_unit_interval(
            worst in proptest::bool::ANY,
            anytime in proptest::bool::ANY,
            env in 0u8..3,
            horizon in 3u64..1_000_000,
            sigma in 0.01f64..5.0,
            alpha in 0.0f64..=1.0,
            beta_frac in 0.0f64..=1.0,
            eta1 in 0.1f64..10.0,
            eta2 in 0.1f64..10.0,
            gap in 0.01f64..1.0,
            x_frac in 0.0f64..=1.0,
        ) {
            let scenario = if worst { Scenario::WorstCase } else { Scenario::InstanceDependent };
            let timing = if anytime && env != 1 { Knowledge::Anytime } else { Knowledge::FixedTime };
            let env = match env {
                0 => BoundEnv::Plain,
                1 => BoundEnv::Baseline { bound: sigma },
                _ => BoundEnv::Linear { dim: 3, uniform_gap: gap },
            };
            let p = BoundParams {
                scenario,
                timing,
                env,
                horizon,
                arms: 3,
                sigma,
                alpha,
                beta: alpha * beta_frac,
                eta1,
                eta2,
                gaps: vec![0.0, gap, 2.0 * gap],
            };
            let x = 1.0 + x_frac * horizon as f64;
            let v = tail_bound(&p, x).unwrap();
            proptest::prop_assert!((0.0..=1.0).contains(&v), "{p:?} at {x}: {v}");
        }
    }
}
