//! Plan execution: cell expansion, replicated episodes, tail curves with
//! matched bounds, summaries and exponent fits.

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};

use bandit_tails::bounds::{tail_bound, BoundEnv, BoundParams, Knowledge, Scenario};
use bandit_tails::env::{BanditInstance, BaselineSchedule, LinearInstance, NoiseModel};
use bandit_tails::linear::{run_linear_episode, LinearBonusSpec, Timing};
use bandit_tails::policy::{BonusSpec, PolicySpec};
use bandit_tails::sim::{exact_regret_distribution, replicate, run_episode, MAX_ENUMERATION_HORIZON};
use bandit_tails::stats::{estimate_tail, fit_exponent, summarize, FitMode};
use bandit_tails::NoiseKind;

use crate::config::{Algorithm, BonusKind, ExperimentPlan, InstanceConfig, PolicyConfig};

#[derive(Debug, Clone)]
pub enum CellEnv {
    Bandit {
        instance: BanditInstance,
        baseline: Option<BaselineSchedule>,
    },
    Linear(LinearInstance),
}

#[derive(Debug, Clone)]
pub enum CellPolicy {
    Bandit(PolicySpec),
    Linear(LinearBonusSpec),
}

/// One (policy, instance, horizon) combination. `index` feeds the seed
/// derivation and is stable for a given plan.
#[derive(Debug, Clone)]
pub struct Cell {
    pub index: u64,
    pub policy: usize,
    pub instance: usize,
    /// `policy@instance`, with the sweep member appended for sweeps.
    pub label: String,
    /// Sweep member, or empty.
    pub member: String,
    pub horizon: u64,
    pub env: CellEnv,
    pub spec: CellPolicy,
}

fn noise_of(inst: &InstanceConfig) -> Result<NoiseModel> {
    NoiseModel::new(inst.noise, inst.sigma).map_err(|e| anyhow!("instance `{}`: {e}", inst.name))
}

fn bandit_policy(p: &PolicyConfig, arms: usize, sigma: f64, horizon: u64) -> Result<PolicySpec> {
    let need = |v: Option<f64>, field: &str| v.ok_or_else(|| anyhow!("policy `{}`: missing `{field}`", p.name));
    let bonus = match p.bonus {
        None => None,
        Some(BonusKind::Standard) => Some(BonusSpec::standard_fixed(
            need(p.eta, "eta")?,
            p.sigma.unwrap_or(sigma),
            horizon,
        )?),
        Some(BonusKind::TailOptimalFixed) => Some(BonusSpec::tail_optimal_fixed(
            need(p.eta1, "eta1")?,
            need(p.eta2, "eta2")?,
            need(p.alpha, "alpha")?,
            need(p.beta, "beta")?,
            horizon,
            arms,
        )?),
        Some(BonusKind::TailOptimalAnytime) => Some(BonusSpec::tail_optimal_anytime(
            need(p.eta1, "eta1")?,
            need(p.eta2, "eta2")?,
            need(p.alpha, "alpha")?,
            need(p.beta, "beta")?,
            arms,
        )?),
    };
    let bonus_or = || bonus.ok_or_else(|| anyhow!("policy `{}`: missing `bonus`", p.name));
    Ok(match p.algorithm {
        Algorithm::Se => PolicySpec::Se { bonus: bonus_or()? },
        Algorithm::SeRandomPermutation => PolicySpec::SeRandomPermutation { bonus: bonus_or()? },
        Algorithm::Ucb => PolicySpec::Ucb { bonus: bonus_or()? },
        Algorithm::FixedArm => PolicySpec::FixedArm {
            arm: p.arm.ok_or_else(|| anyhow!("policy `{}`: missing `arm`", p.name))?,
        },
        Algorithm::UcbL => unreachable!("linear policies are resolved separately"),
    })
}

fn linear_policy(p: &PolicyConfig, dim: usize, horizon: u64) -> Result<LinearBonusSpec> {
    let timing = match p.bonus {
        Some(BonusKind::TailOptimalFixed) => Timing::FixedTime { horizon },
        Some(BonusKind::TailOptimalAnytime) => Timing::Anytime,
        _ => return Err(anyhow!("policy `{}`: ucb_l needs a tail-optimal radius", p.name)),
    };
    let get = |v: Option<f64>| v.unwrap_or(f64::NAN);
    Ok(LinearBonusSpec::new(
        get(p.eta1),
        get(p.eta2),
        get(p.alpha),
        get(p.beta),
        dim,
        timing,
    )?)
}

/// Expands policies x instances x horizons (x sweep members) in that order.
/// Linear policies pair only with linear instances and vice versa.
pub fn expand_cells(plan: &ExperimentPlan) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for (pi, p) in plan.policies.iter().enumerate() {
        for (ii, inst) in plan.instances.iter().enumerate() {
            if p.is_linear() != inst.is_linear() {
                continue;
            }
            let noise = noise_of(inst)?;
            for &horizon in &plan.t_grid {
                let mut members: Vec<(String, CellEnv)> = Vec::new();
                if let Some(means) = &inst.means {
                    let instance = BanditInstance::new(means.clone(), noise)
                        .with_context(|| format!("instance `{}`", inst.name))?;
                    members.push((
                        String::new(),
                        CellEnv::Bandit {
                            instance,
                            baseline: inst.baseline.clone(),
                        },
                    ));
                } else if let Some(sweep) = &inst.sweep {
                    for (label, gap) in sweep.members(horizon) {
                        let instance = BanditInstance::new(vec![sweep.top_mean, sweep.top_mean - gap], noise)
                            .with_context(|| format!("instance `{}` member {label}", inst.name))?;
                        members.push((
                            label,
                            CellEnv::Bandit {
                                instance,
                                baseline: inst.baseline.clone(),
                            },
                        ));
                    }
                } else if let Some(lin) = &inst.linear {
                    let actions = lin
                        .actions
                        .clone()
                        .unwrap_or_else(|| LinearInstance::basis_actions(lin.theta.len()));
                    let instance = LinearInstance::new(lin.theta.clone(), actions, lin.rotation, noise)
                        .with_context(|| format!("instance `{}`", inst.name))?;
                    members.push((String::new(), CellEnv::Linear(instance)));
                }
                for (member, env) in members {
                    let spec = match &env {
                        CellEnv::Bandit { instance, .. } => {
                            CellPolicy::Bandit(bandit_policy(p, instance.arms(), inst.sigma, horizon)?)
                        }
                        CellEnv::Linear(instance) => CellPolicy::Linear(linear_policy(p, instance.dim(), horizon)?),
                    };
                    let label = if member.is_empty() {
                        format!("{}@{}", p.name, inst.name)
                    } else {
                        format!("{}@{}[{member}]", p.name, inst.name)
                    };
                    cells.push(Cell {
                        index: cells.len() as u64,
                        policy: pi,
                        instance: ii,
                        label,
                        member,
                        horizon,
                        env,
                        spec,
                    });
                }
            }
        }
    }
    Ok(cells)
}

/// Bound parameters matching the policy's guarantee, if one exists.
pub fn bound_params(policy: &PolicyConfig, cell: &Cell, sigma: f64, scenario: Scenario) -> Option<BoundParams> {
    let (eta1, eta2, alpha, beta) = (policy.eta1?, policy.eta2?, policy.alpha?, policy.beta?);
    let (env, timing, arms, gaps) = match (&cell.env, policy.algorithm, policy.bonus?) {
        (CellEnv::Bandit { instance, baseline }, Algorithm::Se, BonusKind::TailOptimalFixed)
            if baseline.is_none() =>
        {
            (BoundEnv::Plain, Knowledge::FixedTime, instance.arms(), instance.gaps().to_vec())
        }
        (CellEnv::Bandit { instance, baseline }, Algorithm::SeRandomPermutation, BonusKind::TailOptimalFixed) => {
            let bound = baseline.as_ref().map_or(0.0, |b| b.bound);
            (
                BoundEnv::Baseline { bound },
                Knowledge::FixedTime,
                instance.arms(),
                instance.gaps().to_vec(),
            )
        }
        (CellEnv::Bandit { instance, baseline }, Algorithm::Ucb, BonusKind::TailOptimalAnytime)
            if baseline.is_none() =>
        {
            (BoundEnv::Plain, Knowledge::Anytime, instance.arms(), instance.gaps().to_vec())
        }
        (CellEnv::Linear(instance), Algorithm::UcbL, bonus) => {
            let timing = if bonus == BonusKind::TailOptimalAnytime {
                Knowledge::Anytime
            } else {
                Knowledge::FixedTime
            };
            (
                BoundEnv::Linear {
                    dim: instance.dim(),
                    uniform_gap: instance.uniform_gap(),
                },
                timing,
                0,
                vec![],
            )
        }
        _ => return None,
    };
    let params = BoundParams {
        scenario,
        timing,
        env,
        horizon: cell.horizon,
        arms,
        sigma,
        alpha,
        beta,
        eta1,
        eta2,
        gaps,
    };
    params.validate().ok().map(|_| params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub policy: String,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub replicate: u64,
    pub seed: u64,
    pub pseudo_regret: f64,
    pub empirical_regret: f64,
    pub noise_sum: f64,
    pub pull_counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub policy: String,
    pub scenario: Scenario,
    pub horizon: u64,
    pub x: f64,
    pub reps: u64,
    pub exceed: u64,
    pub phat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: String,
    pub horizon: u64,
    pub reps: u64,
    pub mean: f64,
    pub variance: f64,
    /// Values at the standard summary quantiles.
    pub quantiles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub policy: String,
    pub mode: FitMode,
    pub threshold: String,
    pub points: usize,
    pub discarded: usize,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub policy: String,
    pub scenario: Scenario,
    pub horizon: u64,
    pub x: f64,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct RunArtifact {
    pub tail: Vec<TailRow>,
    pub summaries: Vec<SummaryRow>,
    pub fits: Vec<FitRow>,
    pub episodes: Vec<EpisodeRecord>,
}

/// Runs `f` on a rayon pool with `threads` workers (0 = rayon's default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("failed to build worker pool")?;
    Ok(pool.install(f))
}

fn run_cell(plan: &ExperimentPlan, cell: &Cell) -> Result<Vec<EpisodeRecord>> {
    let results = replicate(plan.replications, plan.seed, cell.index, |rep, seed| {
        let r = match (&cell.env, &cell.spec) {
            (CellEnv::Bandit { instance, baseline }, CellPolicy::Bandit(p)) => {
                run_episode(instance, p, cell.horizon, baseline.as_ref(), seed)?
            }
            (CellEnv::Linear(instance), CellPolicy::Linear(spec)) => {
                run_linear_episode(instance, spec, cell.horizon, seed)?.result
            }
            _ => unreachable!("cells pair matching environments and policies"),
        };
        Ok::<_, bandit_tails::Error>(EpisodeRecord {
            policy: cell.label.clone(),
            horizon: cell.horizon,
            replicate: rep,
            seed,
            pseudo_regret: r.pseudo_regret,
            empirical_regret: r.empirical_regret,
            noise_sum: r.noise_sum,
            pull_counts: r.pull_counts,
        })
    });
    results
        .into_iter()
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("cell {} (T = {})", cell.label, cell.horizon))
}

fn sigma_of(plan: &ExperimentPlan, cell: &Cell) -> f64 {
    plan.instances[cell.instance].sigma
}

/// Executes every cell of the plan on a pool of `threads` workers.
pub fn run_plan(plan: &ExperimentPlan, threads: usize) -> Result<RunArtifact> {
    let cells = expand_cells(plan)?;
    let per_cell: Vec<Vec<EpisodeRecord>> = with_threads(threads, || {
        cells.iter().map(|c| run_cell(plan, c)).collect::<Result<Vec<_>>>()
    })??;
    let mut artifact = RunArtifact::default();
    if plan.replications == 0 {
        return Ok(artifact);
    }
    for (cell, records) in cells.iter().zip(&per_cell) {
        let samples: Vec<f64> = records.iter().map(|r| r.pseudo_regret).collect();
        let summary = summarize(&samples)?;
        artifact.summaries.push(SummaryRow {
            policy: cell.label.clone(),
            horizon: cell.horizon,
            reps: summary.count,
            mean: summary.mean,
            variance: summary.variance,
            quantiles: summary.quantiles.iter().map(|q| q.1).collect(),
        });
        let thresholds = plan.thresholds.grid(cell.horizon);
        if thresholds.is_empty() {
            continue;
        }
        let curve = estimate_tail(&samples, &thresholds, plan.confidence)?;
        let policy = &plan.policies[cell.policy];
        for &scenario in &plan.scenarios {
            let params = bound_params(policy, cell, sigma_of(plan, cell), scenario);
            for (i, &x) in curve.thresholds.iter().enumerate() {
                artifact.tail.push(TailRow {
                    policy: cell.label.clone(),
                    scenario,
                    horizon: cell.horizon,
                    x,
                    reps: curve.total,
                    exceed: curve.exceed[i],
                    phat: curve.phat[i],
                    ci_lo: curve.ci[i].0,
                    ci_hi: curve.ci[i].1,
                    bound: params.as_ref().and_then(|p| tail_bound(p, x).ok()),
                });
            }
        }
    }
    artifact.fits = run_fits(plan, &cells, &per_cell);
    if plan.outputs.episodes {
        artifact.episodes = per_cell.into_iter().flatten().collect();
    }
    Ok(artifact)
}

fn run_fits(plan: &ExperimentPlan, cells: &[Cell], per_cell: &[Vec<EpisodeRecord>]) -> Vec<FitRow> {
    let mut groups: Vec<(&str, Vec<usize>)> = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        let key = c.label.as_str();
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    let mut rows = Vec::new();
    for fit in &plan.fits {
        for (_, members) in &groups {
            let label = cells[members[0]].label.clone();
            let mut points = Vec::new();
            for &i in members {
                let cell = &cells[i];
                let samples: Vec<f64> = per_cell[i].iter().map(|r| r.pseudo_regret).collect();
                let n = samples.len() as f64;
                let value = match fit.threshold(cell.horizon) {
                    None => samples.iter().sum::<f64>() / n,
                    Some(x) => samples.iter().filter(|s| **s > x).count() as f64 / n,
                };
                points.push((cell.horizon as f64, value));
            }
            rows.push(fit_row(label, fit.mode, fit.label(), &points));
        }
    }
    rows
}

pub fn fit_row(policy: String, mode: FitMode, threshold: String, points: &[(f64, f64)]) -> FitRow {
    match fit_exponent(points, mode) {
        Ok(f) => FitRow {
            policy,
            mode,
            threshold,
            points: f.points,
            discarded: f.discarded,
            slope: Some(f.slope),
            intercept: Some(f.intercept),
            r_squared: Some(f.r_squared),
            status: "ok".into(),
        },
        Err(e) => FitRow {
            policy,
            mode,
            threshold,
            points: points.len(),
            discarded: 0,
            slope: None,
            intercept: None,
            r_squared: None,
            status: e.to_string(),
        },
    }
}

/// Bound curves over the plan's threshold grids, without simulation.
pub fn bound_curves(plan: &ExperimentPlan) -> Result<Vec<BoundRow>> {
    let cells = expand_cells(plan)?;
    let mut rows = Vec::new();
    for cell in &cells {
        let policy = &plan.policies[cell.policy];
        for &scenario in &plan.scenarios {
            let params = bound_params(policy, cell, sigma_of(plan, cell), scenario);
            for x in plan.thresholds.grid(cell.horizon) {
                rows.push(BoundRow {
                    policy: cell.label.clone(),
                    scenario,
                    horizon: cell.horizon,
                    x,
                    bound: params.as_ref().and_then(|p| tail_bound(p, x).ok()),
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub policy: String,
    pub horizon: u64,
    pub reps: u64,
    pub atoms: usize,
    pub ks: f64,
    pub max_atom_z: f64,
    pub exact_mean: f64,
    pub sample_mean: f64,
}

/// Whether a cell's regret law can be enumerated exactly.
pub fn enumerable(cell: &Cell) -> bool {
    match &cell.env {
        CellEnv::Bandit { instance, .. } => {
            instance.noise().kind == NoiseKind::Rademacher
                && instance.arms() <= 3
                && cell.horizon <= MAX_ENUMERATION_HORIZON
        }
        CellEnv::Linear(_) => false,
    }
}

/// Exact law versus the plan's Monte Carlo replicates for every enumerable
/// cell; other cells are skipped.
pub fn oracle_check(plan: &ExperimentPlan, threads: usize) -> Result<Vec<OracleRow>> {
    let cells = expand_cells(plan)?;
    let mut rows = Vec::new();
    for cell in cells.iter().filter(|c| enumerable(c)) {
        let (CellEnv::Bandit { instance, baseline }, CellPolicy::Bandit(policy)) = (&cell.env, &cell.spec) else {
            continue;
        };
        let exact = exact_regret_distribution(instance, policy, cell.horizon, baseline.as_ref())?;
        let records = with_threads(threads, || run_cell(plan, cell))??;
        let samples: Vec<f64> = records.iter().map(|r| r.pseudo_regret).collect();
        let (ks, max_z, sample_mean) = if samples.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            let z = exact
                .atom_check(&samples)
                .iter()
                .map(|a| a.3)
                .fold(0.0, f64::max);
            (
                exact.ks_distance(&samples),
                z,
                samples.iter().sum::<f64>() / samples.len() as f64,
            )
        };
        rows.push(OracleRow {
            policy: cell.label.clone(),
            horizon: cell.horizon,
            reps: samples.len() as u64,
            atoms: exact.support.len(),
            ks,
            max_atom_z: max_z,
            exact_mean: exact.mean(),
            sample_mean,
        });
    }
    Ok(rows)
}
