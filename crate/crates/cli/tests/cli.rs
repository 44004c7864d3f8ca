use std::fs;
use std::path::Path;
use std::process::Command;

use bandit_tails_cli::output::{emit_csv, read_tail_csv, Manifest};
use bandit_tails_cli::{parse_config, run_plan};

const PLAN: &str = r#"
name = "smoke"
seed = 5
replications = 300
T_grid = [50, 100, 200]
scenarios = ["worst_case", "instance_dependent"]
fits = [{ mode = "regret_scaling" }]

[[policies]]
name = "se"
algorithm = "se"
bonus = "tail_optimal_fixed"

[[policies]]
name = "ucb"
algorithm = "ucb"
bonus = "standard"
eta = 2.0

[[instances]]
name = "pair"
means = [0.5, 0.3]
sigma = 0.5
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bandit-tails"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_plan(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("plan.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn tail_run_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), PLAN);
    let out = dir.path().join("out");
    run_ok(bin().args(["tail", "--config"]).arg(&plan).arg("--out").arg(&out));
    for f in ["tail.csv", "summary.csv", "fits.csv", "episodes.jsonl", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.seed, 5);
    assert_eq!(manifest.files.len(), 4);
    let rows = read_tail_csv(&out.join("tail.csv")).unwrap();
    // 2 policies x 3 horizons x 5 default thresholds x 2 scenarios.
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().filter(|r| r.policy.starts_with("se@")).all(|r| r.bound.is_some()));
    assert!(rows.iter().filter(|r| r.policy.starts_with("ucb@")).all(|r| r.bound.is_none()));
    let episodes = fs::read_to_string(out.join("episodes.jsonl")).unwrap();
    assert_eq!(episodes.lines().count(), 2 * 3 * 300);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), PLAN);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    run_ok(bin().args(["simulate", "--threads", "2", "--config"]).arg(&plan).arg("--out").arg(&a));
    run_ok(bin().args(["simulate", "--threads", "1", "--config"]).arg(&plan).arg("--out").arg(&b));
    run_ok(bin().args(["simulate", "--seed", "6", "--config"]).arg(&plan).arg("--out").arg(&c));
    let read = |d: &Path| fs::read(d.join("episodes.jsonl")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn fit_from_prior_summary() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), PLAN);
    let out = dir.path().join("out");
    run_ok(bin().args(["tail", "--config"]).arg(&plan).arg("--out").arg(&out));
    let fits = dir.path().join("fits");
    let stdout = run_ok(
        bin()
            .args(["fit", "--mode", "regret-scaling", "--summary"])
            .arg(out.join("summary.csv"))
            .arg("--out")
            .arg(&fits),
    );
    assert_eq!(stdout.lines().count(), 2, "{stdout}");
    let original = fs::read_to_string(out.join("fits.csv")).unwrap();
    let refit = fs::read_to_string(fits.join("fits.csv")).unwrap();
    assert_eq!(original, refit);
}

#[test]
fn bounds_and_oracle_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let text = PLAN
        .replace("T_grid = [50, 100, 200]", "T_grid = [6, 8, 10]")
        .replace("sigma = 0.5", "sigma = 0.3\nnoise = \"rademacher\"")
        .replace("replications = 300", "replications = 20000");
    let plan = write_plan(dir.path(), &text);
    let out = dir.path().join("b");
    run_ok(bin().args(["bounds", "--config"]).arg(&plan).arg("--out").arg(&out));
    let bounds = fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert!(bounds.starts_with("policy,scenario,T,x,bound\n"));
    let o = dir.path().join("o");
    let stdout = run_ok(bin().args(["oracle", "--config"]).arg(&plan).arg("--out").arg(&o));
    assert_eq!(stdout.lines().count(), 6, "{stdout}");
    let oracle = fs::read_to_string(o.join("oracle.csv")).unwrap();
    assert_eq!(oracle.lines().count(), 7);
}

#[test]
fn sweep_requires_a_sweep_rule() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), PLAN);
    let out = bin().args(["sweep", "--config"]).arg(&plan).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn bad_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), &PLAN.replace("seed = 5", "seed = 5\nrepetitions = 3"));
    let out = bin().args(["tail", "--config"]).arg(&plan).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("repetitions"));
}

#[test]
fn emitted_phat_round_trips_bit_exactly() {
    let plan = parse_config(PLAN).unwrap();
    let artifact = run_plan(&plan, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tail.csv");
    let bytes = emit_csv(&artifact.tail, &path).unwrap();
    assert_eq!(bytes, fs::metadata(&path).unwrap().len());
    let back = read_tail_csv(&path).unwrap();
    assert_eq!(back.len(), artifact.tail.len());
    let mut original: Vec<u64> = artifact.tail.iter().map(|r| r.phat.to_bits()).collect();
    let mut parsed: Vec<u64> = back.iter().map(|r| r.phat.to_bits()).collect();
    original.sort_unstable();
    parsed.sort_unstable();
    assert_eq!(original, parsed);
    for r in &back {
        assert!(r.ci_lo <= r.phat && r.phat <= r.ci_hi);
    }
}

#[test]
fn shipped_plans_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("plans");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let plan = parse_config(&fs::read_to_string(&path).unwrap());
        assert!(plan.is_ok(), "{}: {:?}", path.display(), plan.err());
        seen += 1;
    }
    assert_eq!(seen, 2);
}
