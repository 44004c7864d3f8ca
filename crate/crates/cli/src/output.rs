//! Deterministic CSV/JSONL emission and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bandit_tails::bounds::Scenario;
use bandit_tails::stats::{FitMode, SUMMARY_QUANTILES};

use crate::config::{ExperimentPlan, SWEEP_NOTE};
use crate::run::{BoundRow, EpisodeRecord, FitRow, OracleRow, RunArtifact, SummaryRow, TailRow};

pub const TAIL_HEADER: [&str; 10] = [
    "policy", "scenario", "T", "x", "reps", "exceed", "phat", "ci_lo", "ci_hi", "bound",
];

/// 17 significant digits, enough to round-trip every `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn scenario_name(s: Scenario) -> &'static str {
    match s {
        Scenario::WorstCase => "worst_case",
        Scenario::InstanceDependent => "instance_dependent",
    }
}

fn parse_scenario(s: &str) -> Result<Scenario> {
    match s {
        "worst_case" => Ok(Scenario::WorstCase),
        "instance_dependent" => Ok(Scenario::InstanceDependent),
        other => bail!("unknown scenario `{other}`"),
    }
}

fn write_records(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<u64> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("csv buffer: {e}"))?;
    fs::write(path, &bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(bytes.len() as u64)
}

/// Writes tail rows sorted by (policy, T, x, scenario); returns bytes written.
pub fn emit_csv(rows: &[TailRow], path: &Path) -> Result<u64> {
    let mut sorted: Vec<&TailRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.policy
            .cmp(&b.policy)
            .then(a.horizon.cmp(&b.horizon))
            .then(a.x.total_cmp(&b.x))
            .then(scenario_name(a.scenario).cmp(scenario_name(b.scenario)))
    });
    let records: Vec<Vec<String>> = sorted
        .iter()
        .map(|r| {
            vec![
                r.policy.clone(),
                scenario_name(r.scenario).into(),
                r.horizon.to_string(),
                fmt_f64(r.x),
                r.reps.to_string(),
                r.exceed.to_string(),
                fmt_f64(r.phat),
                fmt_f64(r.ci_lo),
                fmt_f64(r.ci_hi),
                fmt_opt(r.bound),
            ]
        })
        .collect();
    write_records(path, &TAIL_HEADER, &records)
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize, line: usize) -> Result<&'a str> {
    rec.get(i).ok_or_else(|| anyhow!("line {line}: missing column {i}"))
}

fn num<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let s = field(rec, i, line)?;
    s.parse().map_err(|e| anyhow!("line {line}, column {i}: cannot parse `{s}`: {e}"))
}

fn read_csv(path: &Path, expected: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != expected {
        bail!("{}: unexpected header {:?}", path.display(), header);
    }
    Ok(r.records().collect::<std::result::Result<_, _>>()?)
}

pub fn read_tail_csv(path: &Path) -> Result<Vec<TailRow>> {
    read_csv(path, &TAIL_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let line = i + 2;
            let bound = field(rec, 9, line)?;
            Ok(TailRow {
                policy: field(rec, 0, line)?.to_string(),
                scenario: parse_scenario(field(rec, 1, line)?)?,
                horizon: num(rec, 2, line)?,
                x: num(rec, 3, line)?,
                reps: num(rec, 4, line)?,
                exceed: num(rec, 5, line)?,
                phat: num(rec, 6, line)?,
                ci_lo: num(rec, 7, line)?,
                ci_hi: num(rec, 8, line)?,
                bound: if bound.is_empty() { None } else { Some(num(rec, 9, line)?) },
            })
        })
        .collect()
}

pub const SUMMARY_HEADER: [&str; 9] = ["policy", "T", "reps", "mean", "variance", "q50", "q90", "q99", "q999"];

pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<u64> {
    debug_assert_eq!(SUMMARY_HEADER.len(), 5 + SUMMARY_QUANTILES.len());
    let mut sorted: Vec<&SummaryRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.policy.cmp(&b.policy).then(a.horizon.cmp(&b.horizon)));
    let records: Vec<Vec<String>> = sorted
        .iter()
        .map(|r| {
            let mut rec = vec![
                r.policy.clone(),
                r.horizon.to_string(),
                r.reps.to_string(),
                fmt_f64(r.mean),
                fmt_f64(r.variance),
            ];
            rec.extend(r.quantiles.iter().map(|q| fmt_f64(*q)));
            rec
        })
        .collect();
    write_records(path, &SUMMARY_HEADER, &records)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    read_csv(path, &SUMMARY_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let line = i + 2;
            Ok(SummaryRow {
                policy: field(rec, 0, line)?.to_string(),
                horizon: num(rec, 1, line)?,
                reps: num(rec, 2, line)?,
                mean: num(rec, 3, line)?,
                variance: num(rec, 4, line)?,
                quantiles: (5..9).map(|c| num(rec, c, line)).collect::<Result<_>>()?,
            })
        })
        .collect()
}

pub const FIT_HEADER: [&str; 9] = [
    "policy", "mode", "threshold", "points", "discarded", "slope", "intercept", "r_squared", "status",
];

pub fn write_fits_csv(rows: &[FitRow], path: &Path) -> Result<u64> {
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.policy.clone(),
                r.mode.name().into(),
                r.threshold.clone(),
                r.points.to_string(),
                r.discarded.to_string(),
                fmt_opt(r.slope),
                fmt_opt(r.intercept),
                fmt_opt(r.r_squared),
                r.status.clone(),
            ]
        })
        .collect();
    write_records(path, &FIT_HEADER, &records)
}

pub fn write_bounds_csv(rows: &[BoundRow], path: &Path) -> Result<u64> {
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.policy.clone(),
                scenario_name(r.scenario).into(),
                r.horizon.to_string(),
                fmt_f64(r.x),
                fmt_opt(r.bound),
            ]
        })
        .collect();
    write_records(path, &["policy", "scenario", "T", "x", "bound"], &records)
}

pub fn write_oracle_csv(rows: &[OracleRow], path: &Path) -> Result<u64> {
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.policy.clone(),
                r.horizon.to_string(),
                r.reps.to_string(),
                r.atoms.to_string(),
                fmt_f64(r.ks),
                fmt_f64(r.max_atom_z),
                fmt_f64(r.exact_mean),
                fmt_f64(r.sample_mean),
            ]
        })
        .collect();
    write_records(
        path,
        &["policy", "T", "reps", "atoms", "ks", "max_atom_z", "exact_mean", "sample_mean"],
        &records,
    )
}

pub fn write_episodes_jsonl(rows: &[EpisodeRecord], path: &Path) -> Result<u64> {
    let mut buf = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    f.write_all(&buf).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(buf.len() as u64)
}

/// Everything needed to regenerate the outputs: the normalized plan and the
/// program version. Deliberately free of timestamps and thread counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub seed: u64,
    pub version: String,
    pub plan_sha256: String,
    pub plan: ExperimentPlan,
    pub notes: Vec<String>,
    /// File name to SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn plan_hash(plan: &ExperimentPlan) -> Result<String> {
    Ok(sha256_hex(serde_json::to_string(plan)?.as_bytes()))
}

fn notes(plan: &ExperimentPlan) -> Vec<String> {
    let mut n = vec![
        "tail bounds are closed-form upper bounds evaluated in double precision and clamped to [0, 1]; \
         an empty bound means no guarantee applies to the policy/environment pair"
            .to_string(),
    ];
    if plan.has_sweep() {
        n.push(SWEEP_NOTE.to_string());
    }
    n
}

/// Writes the manifest last, hashing every file listed in `written`.
pub fn write_manifest(plan: &ExperimentPlan, dir: &Path, written: &[&str]) -> Result<Manifest> {
    let mut files = BTreeMap::new();
    for name in written {
        let path = dir.join(name);
        let bytes = fs::read(&path).with_context(|| format!("cannot read {}", path.display()))?;
        files.insert(name.to_string(), sha256_hex(&bytes));
    }
    let manifest = Manifest {
        name: plan.name.clone(),
        seed: plan.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        plan_sha256: plan_hash(plan)?,
        plan: plan.clone(),
        notes: notes(plan),
        files,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(manifest)
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

/// Writes every output of a full run plus the manifest.
pub fn write_artifact(plan: &ExperimentPlan, artifact: &RunArtifact, dir: &Path) -> Result<Manifest> {
    ensure_dir(dir)?;
    emit_csv(&artifact.tail, &dir.join("tail.csv"))?;
    write_summary_csv(&artifact.summaries, &dir.join("summary.csv"))?;
    write_fits_csv(&artifact.fits, &dir.join("fits.csv"))?;
    let mut written = vec!["tail.csv", "summary.csv", "fits.csv"];
    if plan.outputs.episodes {
        write_episodes_jsonl(&artifact.episodes, &dir.join("episodes.jsonl"))?;
        written.push("episodes.jsonl");
    }
    write_manifest(plan, dir, &written)
}

/// Fits from previously written CSVs: regret scaling from a summary file,
/// tail modes from a tail file at `x = fraction * T` (first scenario found).
pub fn fits_from_files(
    summary: Option<&Path>,
    tail: Option<&Path>,
    mode: FitMode,
    fraction: Option<f64>,
) -> Result<Vec<FitRow>> {
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let threshold;
    match mode {
        FitMode::RegretScaling => {
            let path = summary.ok_or_else(|| anyhow!("regret_scaling fits need --summary"))?;
            for r in read_summary_csv(path)? {
                groups.entry(r.policy).or_default().push((r.horizon as f64, r.mean));
            }
            threshold = String::new();
        }
        FitMode::PolyTail | FitMode::StretchTail => {
            let path = tail.ok_or_else(|| anyhow!("tail fits need --tail"))?;
            let f = fraction.ok_or_else(|| anyhow!("tail fits need --fraction"))?;
            let rows = read_tail_csv(path)?;
            let scenario = rows.first().map(|r| r.scenario);
            for r in rows.iter().filter(|r| Some(r.scenario) == scenario) {
                let target = f * r.horizon as f64;
                if (r.x - target).abs() <= 1e-9 * target.abs().max(1.0) {
                    groups.entry(r.policy.clone()).or_default().push((r.horizon as f64, r.phat));
                }
            }
            threshold = format!("x={f}*T");
        }
    }
    Ok(groups
        .into_iter()
        .map(|(policy, pts)| crate::run::fit_row(policy, mode, threshold.clone(), &pts))
        .collect())
}
