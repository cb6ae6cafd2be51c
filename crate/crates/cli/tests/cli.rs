use std::path::Path;
use std::process::{Command, Output};

fn circlaw(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circlaw"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn limit_density_at_one_is_semicircle() {
    let tmp = tempfile::tempdir().unwrap();
    let o = circlaw(&["limit", "--z", "0", "--grid", "2001"], tmp.path());
    assert!(o.status.success());
    let rows = read_csv(&tmp.path().join("limit.csv"));
    let row = rows
        .iter()
        .min_by(|a, b| {
            let da = (a[0].parse::<f64>().unwrap() - 1.0).abs();
            let db = (b[0].parse::<f64>().unwrap() - 1.0).abs();
            da.total_cmp(&db)
        })
        .unwrap();
    let d: f64 = row[1].parse().unwrap();
    assert!((d - 0.27566).abs() <= 1e-3, "{d}");
}

#[test]
fn simulate_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--n", "4", "--dist", "rademacher", "--seed", "7"];
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(circlaw(&args, &a).status.success());
    assert!(circlaw(&args, &b).status.success());
    for f in ["simulate.csv", "simulate_sv.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn converge_reports_rows_and_slopes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = circlaw(
        &["converge", "--n", "64,128", "--z", "0.5", "--trials", "2", "--seed", "1", "--json"],
        tmp.path(),
    );
    assert!(o.status.success());
    assert_eq!(read_csv(&tmp.path().join("converge.csv")).len(), 2);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let slopes = doc["results"]["slopes"].as_array().unwrap();
    assert_eq!(slopes.len(), 1);
    assert!(slopes[0]["slope"].is_number());
}

#[test]
fn json_output_carries_config_echo() {
    let tmp = tempfile::tempdir().unwrap();
    let o = circlaw(&["char", "--n", "16", "--draws", "10", "--seed", "3", "--json"], tmp.path());
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["command"], "char");
    assert_eq!(doc["config"]["globals"]["seed"], 3);
    assert_eq!(doc["config"]["char"]["n"], 16);
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "seed = 5\n[simulate]\nn = 8\ndist = \"rademacher\"\n").unwrap();
    let out = tmp.path().join("out");
    let o = circlaw(
        &["simulate", "--config", cfg.to_str().unwrap(), "--n", "6", "--json"],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["simulate"]["n"], 6);
    assert_eq!(doc["config"]["simulate"]["dist"], "rademacher");
    assert_eq!(doc["config"]["globals"]["seed"], 5);
    assert_eq!(read_csv(&out.join("simulate.csv")).len(), 6);
}

#[test]
fn config_echo_reproduces_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let o = circlaw(&["svtail", "--n", "16", "--trials", "60", "--seed", "9"], &first);
    assert!(o.status.success());
    let echo = first.join("svtail_config.toml");
    let second = tmp.path().join("second");
    let o = circlaw(&["svtail", "--config", echo.to_str().unwrap()], &second);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(first.join("svtail.csv")).unwrap(),
        std::fs::read(second.join("svtail.csv")).unwrap()
    );
}

#[test]
fn writes_only_inside_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_circlaw"))
        .args(["limit", "--plot-data", "--out", "out"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let top: Vec<_> = std::fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(top, vec![std::ffi::OsString::from("out")]);
    assert!(out.join("limit_plot.csv").exists());
}

fn error_line(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().unwrap();
    serde_json::from_str(line).unwrap()
}

#[test]
fn unknown_flag_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = circlaw(&["limit", "--bogus", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["code"], 2);
}

#[test]
fn domain_violation_is_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = circlaw(&["simulate", "--n", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    let o = circlaw(&["limit", "--grid", "11"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_line(&o)["error"], "validation");
}

#[test]
fn help_exits_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let o = circlaw(&["--help"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for cmd in ["simulate", "limit", "potential", "svtail", "converge", "char"] {
        assert!(text.contains(cmd));
    }
}

#[test]
fn every_subcommand_accepts_seed_and_json() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 6] = [
        &["simulate", "--n", "8"],
        &["limit", "--grid", "801"],
        &["potential", "--n", "16", "--trials", "2"],
        &["svtail", "--n", "8", "--trials", "50"],
        &["converge", "--n", "16,24", "--trials", "1"],
        &["char", "--n", "8", "--draws", "5"],
    ];
    for args in runs {
        let mut full = args.to_vec();
        full.extend(["--seed", "4", "--json"]);
        let o = circlaw(&full, &tmp.path().join(args[0]));
        assert!(o.status.success(), "{}: {}", args[0], String::from_utf8_lossy(&o.stderr));
        let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(doc["config"]["globals"]["seed"], 4);
    }
}
