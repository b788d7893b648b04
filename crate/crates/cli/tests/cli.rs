use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use mcc_eiv::bounds::xi_theorem1;
use mcc_eiv::io::{load_dataset, LoadedDataset};
use mcc_eiv::{BoundInputs, EivDataset};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mcc-eiv"));
    c.env_remove("MCC_EIV_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            headers.iter().map(str::to_string).zip(r.iter().map(str::to_string)).collect()
        })
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

const EXAMPLE1: [&str; 19] = [
    "generate", "--scenario", "scalar", "--w0", "3.0", "--n", "1000", "--alpha", "0.15", "--beta", "0.15",
    "--mu-u", "10", "--mu-v", "10", "--var-u", "0.001", "--var-v", "0.001",
];

fn generate(dir: &Path, name: &str, seed: &str) -> PathBuf {
    let path = dir.join(name);
    let mut args = EXAMPLE1.to_vec();
    args.extend(["--seed", seed, "--output", path.to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

#[test]
fn generate_writes_rows_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "d.csv", "7");
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1001);
    assert!(text.starts_with("i,x,u,v,x_obs,d\n"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["w0"][0], 3.0);
    let s = &meta["settings"];
    for (key, want) in [
        ("alpha", 0.15),
        ("beta", 0.15),
        ("mu_u", 10.0),
        ("mu_v", 10.0),
        ("var_u", 0.001),
        ("var_v", 0.001),
    ] {
        assert_eq!(s[key].as_f64(), Some(want), "{key}");
    }
    assert_eq!(s["n"], 1000);
    assert_eq!(s["scenario"], "scalar");
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.csv", "7");
    let b = generate(dir.path(), "b.csv", "7");
    let c = generate(dir.path(), "c.csv", "8");
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn zero_samples_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&["generate", "--n", "0", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("sample count"), "{err}");
}

#[test]
fn malformed_flags_exit_two_with_one_line() {
    let o = run(&["generate", "--n", "many"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).trim_end().lines().count(), 1);
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn noise_free_dataset_recovers_w0_with_every_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clean.csv");
    let o = run(&[
        "generate", "--alpha", "0", "--beta", "0", "--var-u", "0", "--var-v", "0", "--n", "200", "--output",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["estimate", "--data", path.to_str().unwrap(), "--sigma", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    let names: Vec<&str> = rows.iter().map(|r| r["estimator"].as_str()).collect();
    assert_eq!(names, ["mse", "lad", "tls", "mcc"]);
    for r in &rows {
        assert_eq!(r["failed"], "false");
        assert!((num(r, "w_hat") - 3.0).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn mcc_grid_estimate_lies_within_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "d.csv", "7");
    let sigma = 0.3;
    let o = run(&[
        "estimate", "--data", path.to_str().unwrap(), "--estimators", "mcc", "--sigma", "0.3", "--solver", "grid",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let w = num(&csv_rows(&stdout(&o))[0], "w_hat");

    let (ds, _) = load_dataset(&path).unwrap();
    let LoadedDataset::Scalar(ds) = ds else { unreachable!() };
    let clean = ds.clean_set(0.07, 0.07).unwrap();
    let mut inputs = BoundInputs::from_clean_set(ds.len(), &clean, 3.0);
    inputs.sigma = Some(sigma);
    let xi = xi_theorem1(&inputs).unwrap().xi.expect("admissible width");
    assert!((w - 3.0).abs() <= xi, "w = {w}, xi = {xi}");
}

#[test]
fn fixed_point_and_grid_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "d.csv", "7");
    let fit = |solver: &str| {
        let o = run(&[
            "estimate", "--data", path.to_str().unwrap(), "--estimators", "mcc", "--sigma", "0.2", "--solver",
            solver,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        num(&csv_rows(&stdout(&o))[0], "w_hat")
    };
    let (fp, grid) = (fit("fixed-point"), fit("grid"));
    assert!((fp - grid).abs() < 1e-3, "fixed-point {fp}, grid {grid}");
}

#[test]
fn estimate_reports_failures_per_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.csv");
    std::fs::write(&path, "i,x_obs,d\n0,0,1\n1,0,2\n2,0,3\n").unwrap();
    let o = run(&["estimate", "--data", path.to_str().unwrap(), "--estimators", "mse,lad"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["failed"] == "true" && !r["error"].is_empty()));
}

#[test]
fn unparsable_dataset_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "i,x_obs,d\n0,abc,1\n").unwrap();
    let o = run(&["estimate", "--data", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["estimate", "--data", "/nonexistent.csv"]).status.code(), Some(2));
}

fn bound(args: &[&str]) -> std::collections::HashMap<String, String> {
    let mut full = vec!["bound"];
    full.extend(args);
    let o = run(&full);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    csv_rows(&stdout(&o)).remove(0)
}

#[test]
fn bound_width_rule_example() {
    let r = bound(&[
        "--n", "10", "--m", "8", "--eps-u", "0.07", "--eps-v", "0.07", "--w0-abs", "3", "--c", "1", "--lambda", "1.2",
    ]);
    assert_eq!(r["admissible"], "true");
    assert_eq!(r["formula"], "corollary1");
    assert!((num(&r, "xi") - 0.6862).abs() < 5e-5);
}

#[test]
fn bound_noise_free_example() {
    let r = bound(&["--eps-u", "0", "--eps-v", "0", "--sigma", "0.1", "--c", "0.5", "--n", "10", "--m", "8"]);
    assert_eq!(r["admissible"], "true");
    assert_eq!(r["formula"], "corollary2");
    assert!((num(&r, "xi") - 0.1517).abs() < 5e-5);
}

#[test]
fn bound_without_clean_majority_is_informational() {
    let r = bound(&["--m", "5", "--n", "10", "--c", "1", "--sigma", "1"]);
    assert_eq!(r["admissible"], "false");
    assert_eq!(r["xi"], "");
    assert!(r["failure_reason"].contains("n = 10, m = 5"), "{r:?}");
}

#[test]
fn generated_dataset_feeds_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "d.csv", "7");
    let r = bound(&["--data", path.to_str().unwrap(), "--eps-u", "0.07", "--eps-v", "0.07", "--lambda", "1.2"]);
    assert_eq!(r["admissible"], "true");
    assert_eq!(r["n"], "1000");
    assert_eq!(num(&r, "w0_abs"), 3.0);
    let m: usize = r["m"].parse().unwrap();
    assert!(m > 500 && m < 1000);
}

#[test]
fn unknown_preset_exits_two() {
    let o = run(&["sweep", "--preset", "table9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("table9"));
}

#[test]
fn reduced_table_sweep_keeps_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t2.csv");
    let o = run(&["sweep", "--preset", "table2", "--runs", "2", "--seed", "1", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("sweep_param,sweep_value,estimator,mean,std,runs_ok,xi,xi_admissible,mean_m,mean_c,w0\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 44);
    assert!(rows.iter().all(|r| r["sweep_param"] == "mu_v" && r["runs_ok"] == "2"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("t2.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["rows"], 44);
    assert_eq!(manifest["master_seed"], 1);
    assert_eq!(manifest["sweep"]["fixed"]["runs"], 2);
}

#[test]
fn verify_single_trial_is_fast() {
    let start = Instant::now();
    let o = run(&["verify", "--trials", "1"]);
    let elapsed = start.elapsed();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("violations: 0"));
    assert!(elapsed.as_secs_f64() < 1.0, "{elapsed:?}");
}

#[test]
fn verify_reports_margins_below_one() {
    let o = run(&["verify", "--trials", "20", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("margin")).unwrap();
    let max: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(max < 1.0, "{line}");
    assert_eq!(run(&["verify", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 50, "mu_u": 4, "seed": 5}"#).unwrap();
    let out = dir.path().join("a.csv");
    let o = run(&[
        "generate", "--config", cfg.to_str().unwrap(), "--n", "30", "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["n"], 30);
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["settings"]["mu_u"].as_f64(), Some(4.0));

    std::fs::write(&cfg, r#"{"mu_w": 4}"#).unwrap();
    let o = run(&["generate", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_from_environment_loses_to_flag() {
    let dir = tempfile::tempdir().unwrap();
    let seed_of = |args: &[&str], env: Option<&str>| {
        let out = dir.path().join("e.csv");
        let mut c = bin();
        c.args(["generate", "--n", "10", "--output", out.to_str().unwrap()]).args(args);
        if let Some(s) = env {
            c.env("MCC_EIV_SEED", s);
        }
        assert!(c.output().unwrap().status.success());
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("e.meta.json")).unwrap()).unwrap();
        meta["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(&[], None), 0);
    assert_eq!(seed_of(&[], Some("12")), 12);
    assert_eq!(seed_of(&["--seed", "4"], Some("12")), 4);
}
