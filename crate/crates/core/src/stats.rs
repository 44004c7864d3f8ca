//! Tail-curve estimation and exponent fits over episode samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{input, Error, Result};

/// Empirical exceedance probabilities `P(R > x)` over a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub thresholds: Vec<f64>,
    pub exceed: Vec<u64>,
    pub total: u64,
    pub phat: Vec<f64>,
    /// Wilson score interval per threshold.
    pub ci: Vec<(f64, f64)>,
    pub confidence: f64,
}

impl TailCurve {
    /// Binomial standard error of each point estimate.
    pub fn standard_errors(&self) -> Vec<f64> {
        self.phat
            .iter()
            .map(|&p| binomial_se(p, self.total))
            .collect()
    }
}

pub fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Two-sided standard normal quantile for `confidence`.
pub fn normal_quantile(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::OutOfRange {
            what: "confidence level",
            value: confidence.to_string(),
            allowed: "(0, 1)".into(),
        });
    }
    let n = Normal::standard();
    Ok(n.inverse_cdf(1.0 - (1.0 - confidence) / 2.0))
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Ok((0.0, 1.0));
    }
    if successes > trials {
        return Err(input(format!("{successes} successes out of {trials} trials")));
    }
    let z = normal_quantile(confidence)?;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if successes == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok((lo, hi))
}

/// Counts `samples > x` for each threshold and attaches Wilson intervals.
pub fn estimate_tail(samples: &[f64], thresholds: &[f64], confidence: f64) -> Result<TailCurve> {
    if samples.is_empty() {
        return Err(input("no samples to estimate a tail from"));
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(input("thresholds must be sorted ascending"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total = sorted.len() as u64;
    let mut exceed = Vec::with_capacity(thresholds.len());
    let mut phat = Vec::with_capacity(thresholds.len());
    let mut ci = Vec::with_capacity(thresholds.len());
    for &x in thresholds {
        let k = total - sorted.partition_point(|v| *v <= x) as u64;
        exceed.push(k);
        phat.push(k as f64 / total as f64);
        ci.push(wilson_interval(k, total, confidence)?);
    }
    Ok(TailCurve {
        thresholds: thresholds.to_vec(),
        exceed,
        total,
        phat,
        ci,
        confidence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// `ln p` against `ln T`.
    PolyTail,
    /// `ln(-ln p)` against `ln T`.
    StretchTail,
    /// `ln E[R]` against `ln T`.
    RegretScaling,
}

impl FitMode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::PolyTail => "poly_tail",
            Self::StretchTail => "stretch_tail",
            Self::RegretScaling => "regret_scaling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub mode: FitMode,
    /// Points used by the regression.
    pub points: usize,
    /// Stretch-tail points dropped because their probability was zero.
    pub discarded: usize,
}

/// Ordinary least squares of the mode's transformed value against `ln T`.
pub fn fit_exponent(points: &[(f64, f64)], mode: FitMode) -> Result<ExponentFit> {
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    let mut discarded = 0;
    for (i, &(t, v)) in points.iter().enumerate() {
        let bad = |why: &str| input(format!("point {i} (T = {t}, value = {v}): {why}"));
        if !(t.is_finite() && t > 0.0) {
            return Err(bad("horizon must be positive"));
        }
        let y = match mode {
            FitMode::PolyTail => {
                if !(v > 0.0 && v < 1.0) {
                    return Err(bad("tail probability must lie in (0, 1)"));
                }
                v.ln()
            }
            FitMode::StretchTail => {
                if v == 0.0 {
                    discarded += 1;
                    continue;
                }
                if !(v > 0.0 && v < 1.0) {
                    return Err(bad("tail probability must lie in [0, 1)"));
                }
                (-v.ln()).ln()
            }
            FitMode::RegretScaling => {
                if !(v.is_finite() && v > 0.0) {
                    return Err(bad("expected regret must be positive"));
                }
                v.ln()
            }
        };
        xs.push(t.ln());
        ys.push(y);
    }
    if xs.len() < 3 {
        return Err(input(format!(
            "need at least 3 usable points, got {} ({} discarded)",
            xs.len(),
            discarded
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(input("all horizons are equal; slope is undefined"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(ExponentFit {
        slope,
        intercept,
        r_squared,
        mode,
        points: xs.len(),
        discarded,
    })
}

pub const SUMMARY_QUANTILES: [f64; 4] = [0.5, 0.9, 0.99, 0.999];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: u64,
    pub mean: f64,
    /// Unbiased (n - 1) sample variance; 0 for a single sample.
    pub variance: f64,
    /// `(q, value)` for each of [`SUMMARY_QUANTILES`], lower interpolation.
    pub quantiles: Vec<(f64, f64)>,
}

pub fn summarize(samples: &[f64]) -> Result<Summary> {
    if samples.is_empty() {
        return Err(input("no samples to summarize"));
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantiles = SUMMARY_QUANTILES
        .iter()
        .map(|&q| (q, sorted[(q * (n - 1) as f64).floor() as usize]))
        .collect();
    Ok(Summary {
        count: n as u64,
        mean,
        variance,
        quantiles,
    })
}
