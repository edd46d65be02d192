use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dac_core::interface::cli::{run, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use dac_core::interface::ReportDocument;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn dac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dac")).args(args).output().unwrap()
}

fn run_in_process(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("dac").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn rank_args<'a>(data: &'a str, priors: &'a str, out: &'a str) -> Vec<&'a str> {
    vec!["rank", "--data", data, "--priors", priors, "--benchmark", "uniform:0,5", "--out", out]
}

#[test]
fn rank_orders_four_experts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let (data, priors) = (fixture("turnover.csv"), fixture("turnover_priors.json"));
    let o = dac(&rank_args(data.to_str().unwrap(), priors.to_str().unwrap(), out.to_str().unwrap()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("uninformative: yes"), "{stdout}");

    let doc = ReportDocument::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let mut by_dac: Vec<_> = doc.report.entries.iter().collect();
    by_dac.sort_by(|a, b| a.dac_value.total_cmp(&b.dac_value));
    let ids: Vec<&str> = by_dac.iter().map(|e| e.expert_id.as_str()).collect();
    assert_eq!(ids, ["expert4", "expert1", "expert2", "expert3"]);
    assert!(doc.input_digests.contains_key("observations"));
    assert!(doc.input_digests.contains_key("priors"));
    assert!(doc.input_digests.contains_key("benchmark"));
}

#[test]
fn rank_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (data, priors) = (fixture("turnover.csv"), fixture("turnover_priors.json"));
    let mut reports = Vec::new();
    let mut stdouts = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}.json"));
        let o = dac(&rank_args(data.to_str().unwrap(), priors.to_str().unwrap(), out.to_str().unwrap()));
        assert!(o.status.success());
        stdouts.push(o.stdout);
        reports.push(std::fs::read(out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(stdouts[0], stdouts[1]);
}

#[test]
fn mcmc_rank_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (data, priors) = (fixture("turnover.csv"), fixture("turnover_priors.json"));
    let mut reports = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("m{i}.json"));
        let mut args = rank_args(data.to_str().unwrap(), priors.to_str().unwrap(), out.to_str().unwrap());
        args.extend(["--method", "mcmc", "--seed", "7", "--iterations", "5000", "--burn-in", "500"]);
        let (code, stdout, _) = run_in_process(&args);
        assert_eq!(code, EXIT_OK);
        assert!(stdout.contains("r_hat"));
        reports.push(std::fs::read(out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let doc: Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(doc["report"]["posterior"]["method"], "mcmc");
    assert_eq!(doc["report"]["posterior"]["diagnostics"]["seed"], 7);
}

#[test]
fn rank_with_supplied_posterior() {
    let priors = fixture("turnover_priors.json");
    let (code, stdout, _) = run_in_process(&[
        "rank",
        "--posterior",
        "normal:2.29,0.09447",
        "--priors",
        priors.to_str().unwrap(),
        "--benchmark",
        "uniform:0,5",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("Supplied"), "{stdout}");
}

#[test]
fn empty_prior_set_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let priors = dir.path().join("empty.json");
    std::fs::write(&priors, r#"{"format_version":1,"experts":[]}"#).unwrap();
    let data = fixture("turnover.csv");
    let o = dac(&["rank", "--data", data.to_str().unwrap(), "--priors", priors.to_str().unwrap(), "--benchmark", "uniform:0,5"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no experts"));
}

#[test]
fn benchmark_equal_to_posterior_is_a_numerical_error() {
    let priors = fixture("turnover_priors.json");
    let o = dac(&[
        "rank",
        "--posterior",
        "normal:2.29,0.1",
        "--priors",
        priors.to_str().unwrap(),
        "--benchmark",
        "normal:2.29,0.1",
    ]);
    assert_eq!(o.status.code(), Some(EXIT_NUMERICAL));
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_inputs_are_usage_errors() {
    let priors = fixture("turnover_priors.json");
    let p = priors.to_str().unwrap();
    for args in [
        vec!["rank", "--data", "/nonexistent/y.csv", "--priors", p, "--benchmark", "uniform:0,5"],
        vec!["rank", "--posterior", "normal:0,1", "--priors", p, "--benchmark", "gamma:1,2"],
        vec!["rank", "--posterior", "normal:0,1", "--priors", p, "--benchmark", "uniform:5,0"],
        vec!["rank", "--priors", p, "--benchmark", "uniform:0,5"],
        vec!["kl", "--p", "normal:0,-1", "--q", "normal:0,1"],
        vec!["frobnicate"],
    ] {
        let (code, _, err) = run_in_process(&args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty());
    }
}

fn kl_json(p: &str, q: &str) -> Value {
    let o = dac(&["kl", "--p", p, "--q", q]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn kl_examples() {
    let v = kl_json("normal:0,1", "normal:0.5,1");
    assert!((v["value"].as_f64().unwrap() - 0.125).abs() < 1e-9);
    let v = kl_json("skew_normal:2.15,0.09,0.78", "skew_normal:2.15,0.09,0.78");
    assert!(v["value"].as_f64().unwrap().abs() < 1e-10);
    let v = kl_json("normal:0,1", "uniform:0,5");
    assert_eq!(v["value"], "inf");
    assert_eq!(v["infinite"], true);
}

#[test]
fn kl_floor_is_labelled() {
    let (code, out, _) = run_in_process(&["kl", "--p", "normal:0,1", "--q", "uniform:0,5", "--floor", "1e-300"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["value"].is_f64());
    assert_eq!(v["floored"], true);
}

fn csv_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn sensitivity_smoke_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = dac(&["sensitivity", "--steps", "2", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for id in ["A", "B", "C", "D"] {
        let rows = csv_rows(&dir.path().join(format!("dac_grid_{id}.csv")));
        assert_eq!(rows[0], "mean,sd,benchmark_id,dac");
        assert_eq!(rows.len(), 1 + 4);
        assert!(rows[1..].iter().all(|r| r.split(',').nth(2) == Some(id)));
    }
}

#[test]
fn sensitivity_default_grid_and_determinism() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let json = d.path().join("grid.json");
        let o = dac(&["sensitivity", "--out-dir", d.path().to_str().unwrap(), "--json", json.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["dac_grid_A.csv", "dac_grid_B.csv", "dac_grid_C.csv", "dac_grid_D.csv", "grid.json"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    for id in ["A", "B", "C", "D"] {
        assert_eq!(csv_rows(&dirs[0].path().join(format!("dac_grid_{id}.csv"))).len(), 1 + 81 * 30);
    }
}

#[test]
fn sensitivity_custom_benchmarks_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, err) = run_in_process(&[
        "sensitivity", "--steps", "3", "--out-dir", out, "--benchmark", "wide=uniform:-50,50", "--benchmark", "far=uniform:100,200",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("far"));
    assert!(dir.path().join("dac_grid_wide.csv").exists());
    assert!(!dir.path().join("dac_grid_far.csv").exists());

    let (code, _, _) = run_in_process(&["sensitivity", "--steps", "3", "--out-dir", out, "--benchmark", "far=uniform:100,200"]);
    assert_eq!(code, EXIT_NUMERICAL);
    let (code, _, _) = run_in_process(&["sensitivity", "--steps", "1", "--out-dir", out]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = run_in_process(&["sensitivity", "--steps", "2", "--out-dir", out, "--benchmark", "../x=normal:0,1"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn sensitivity_from_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("turnover.csv");
    let (code, out, _) = run_in_process(&[
        "sensitivity", "--steps", "3", "--data", data.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("n=104"), "{out}");
}

#[test]
fn version_and_help_exit_cleanly() {
    assert_eq!(run_in_process(&["--version"]).0, EXIT_OK);
    let (code, out, _) = run_in_process(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("sensitivity"));
}
